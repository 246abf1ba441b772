# -*- coding: utf-8 -*-
"""
Service d'expériences — une méthode par sous-commande du CLI.

Chaque méthode lit un ExperimentConfig déjà fusionné (options CLI >
document > Settings), exécute les réplications, écrit ses fichiers via
ResultStore puis le manifeste, et retourne un dict avec un champ
"status" :

    ok             — exécution complète
    rejected       — au moins un verdict de dominance rejeté
    caps_exceeded  — au moins une réplication a atteint un plafond
    error          — configuration ou modèle invalide

Les exceptions des modules core sont converties ici, jamais plus haut.

Usage :
    service = get_experiment_service()
    result = service.run("simulate", load_config("exp.json"))
"""

import csv
import hashlib
import json
import logging
import math
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .. import __version__
from ..config import get_settings
from .bounds import (
    BusyPeriodSampler, all_join_spec, decompound_cdf, empirical_bound_cdf, eta_moment_report,
    sample_prop_bound, stability_for, steady_state_bound, tail_ratio,
)
from .coupling import (
    BatchConfig, PairedBatch, arm_name, first_crossing, horizon_sample, paired_csv,
    paired_functional_batch,
)
from .errors import ConfigError, QueueBoundsError
from .model import CostFunction, Init, QueueSpec, RateFunction, render_canonical, validate_spec
from .models import FunctionalSample, RunManifest
from .pool import run_replications
from .presets import ModelSection, get_preset
from .simulator import SimCaps, run_busy_period, run_cycle, run_horizon, run_until_long_idle, trace_csv
from .stats import (
    EmpiricalDistribution, ecdf_csv, mean_with_se, moment_estimate, ratio_estimate,
    test_against_cdf, test_st_dominance,
)
from .storage import ResultStore
from .streams import ReplicationStreams
from .validation import run_suite

logger = logging.getLogger("queue_bounds.experiments")

SCHEMA_VERSION = 1
SUBCOMMANDS = ("simulate", "dominance", "bound", "tail", "stability", "steady-state",
               "moments", "validate")
SAMPLE_COLUMNS = ("rep", "duration", "A", "A_star", "eta_star", "balk_patience", "balk_room")
BOUND_COLUMNS = ("u", "J", "J_star", "index_bound_cdf", "index_bound_star_cdf",
                 "tail_variant_cdf")
TAIL_COLUMNS = ("target", "quantile", "u", "survival", "reference", "ratio", "bound")
VALIDATE_MIN_HORIZON = 1e6
SIMULATE_HORIZON = 100.0
STEADY_STATE_MIN_HORIZON = 1e4
STEADY_STATE_MAX_HORIZON = 1e6
STEADY_STATE_REPS = 30


# =============================================================================
# Document de configuration
# =============================================================================

class ModelConfig(BaseModel):
    """Section `model` : un preset, éventuellement surchargé, ou une file explicite."""
    model_config = ConfigDict(extra="forbid")

    preset: Optional[str] = None
    spec: Optional[QueueSpec] = None
    g: Optional[CostFunction] = None
    rate_hi: Optional[RateFunction] = None
    window: Optional[float] = None
    ladder: Optional[list[Optional[int]]] = None

    def resolve(self) -> ModelSection:
        base = get_preset(self.preset) if self.preset else None
        if base is None and self.spec is None:
            raise ConfigError("section model : `preset` ou `spec` requis")
        updates = {k: v for k, v in (("spec", self.spec), ("g", self.g), ("rate_hi", self.rate_hi),
                                     ("window", self.window), ("ladder", self.ladder))
                   if v is not None}
        if base is None:
            return ModelSection(**updates)
        return base.model_copy(update=updates)


class RunSection(BaseModel):
    """Section `run` : paramètres propres aux sous-commandes (None = défaut Settings)."""
    model_config = ConfigDict(extra="forbid")

    reps: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)
    threads: Optional[int] = Field(default=None, ge=1)
    max_events: Optional[int] = None
    max_time: Optional[float] = None
    mode: Literal["busy-period", "cycle", "horizon"] = "busy-period"
    horizon: Optional[float] = Field(default=None, gt=0)
    horizon_reps: Optional[int] = Field(default=None, ge=2)
    suite: Literal["rates", "rooms", "monotonicity", "conjecture", "pathwise"] = "rates"
    coupled: bool = True
    costs: list[CostFunction] = Field(default_factory=list)
    ladder: Optional[list[Optional[int]]] = None
    alpha: Optional[float] = None
    permutation: bool = False
    arms_csv: Optional[str] = None
    u_grid: list[float] = Field(default_factory=list)
    grid_points: int = 50
    bound_samples: Optional[int] = None
    tol: Optional[float] = None
    quantiles: list[float] = Field(default_factory=lambda: [0.99, 0.999])
    orders: list[int] = Field(default_factory=lambda: [1, 2])
    checks: list[str] = Field(default_factory=list)


class OutputSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: Optional[str] = None
    trace: bool = False
    trace_limit: int = 100


class ExperimentConfig(BaseModel):
    """Document de configuration versionné (JSON)."""
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = SCHEMA_VERSION
    model: ModelConfig = Field(default_factory=lambda: ModelConfig(preset="sinusoid-product"))
    run: RunSection = Field(default_factory=RunSection)
    output: OutputSection = Field(default_factory=OutputSection)

    def with_overrides(self, run: Optional[dict] = None, output: Optional[dict] = None) -> "ExperimentConfig":
        """Options CLI (valeurs None ignorées) appliquées par-dessus le document."""
        run = {k: v for k, v in (run or {}).items() if v is not None}
        output = {k: v for k, v in (output or {}).items() if v is not None}
        return ExperimentConfig.model_validate({
            "schema_version": self.schema_version,
            "model": self.model.model_dump(exclude_none=True),
            "run": {**self.run.model_dump(exclude_none=True), **run},
            "output": {**self.output.model_dump(exclude_none=True), **output},
        })

    def with_defaults(self) -> "ExperimentConfig":
        """Complète reps / seed / threads / dossier depuis Settings."""
        s = get_settings()
        return self.with_overrides(
            run={"reps": self.run.reps or s.run_reps,
                 "seed": s.run_seed if self.run.seed is None else self.run.seed,
                 "threads": self.run.threads or s.run_threads,
                 "alpha": self.run.alpha or s.stats_alpha,
                 "tol": self.run.tol or s.bound_tolerance},
            output={"directory": self.output.directory or s.run_output_dir},
        )

    def config_hash(self) -> str:
        return hashlib.sha256(render_canonical(self).encode("utf-8")).hexdigest()


def load_config(path: Optional[str]) -> ExperimentConfig:
    """Lit et valide un document JSON ; None ⇒ configuration par défaut."""
    if path is None:
        return ExperimentConfig()
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"configuration illisible ({path}) : {e}") from e
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"configuration invalide ({path}) : {e.error_count()} erreur(s)\n{e}") from e


def _json_safe(value: Any) -> Any:
    """Flottants non finis → chaînes, pour un JSON strict."""
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


# =============================================================================
# Contexte d'exécution
# =============================================================================

class _Run:
    """Paramètres résolus + magasin de sortie + suivi des incidents."""

    def __init__(self, subcommand: str, cfg: ExperimentConfig):
        self.subcommand = subcommand
        self.cfg = cfg
        self.model = cfg.model.resolve()
        r = cfg.run
        self.reps, self.seed, self.threads = r.reps, r.seed, r.threads
        self.alpha, self.tol = r.alpha, r.tol
        s = get_settings()
        self.caps = SimCaps(max_events=r.max_events or s.sim_max_events,
                            max_time=r.max_time or s.sim_max_time)
        self.store = ResultStore(cfg.output.directory)
        self.cap_incidents: set[int] = set()
        self.errored: set[int] = set()
        self.started = time.monotonic()
        self.started_at = datetime.now(timezone.utc).isoformat()

    @property
    def spec(self) -> QueueSpec:
        return self.model.spec

    @property
    def cycle_spec(self) -> QueueSpec:
        """Même file partant vide (cycles régénératifs)."""
        return self.model.spec.model_copy(update={"init": Init()})

    @property
    def g(self) -> CostFunction:
        return self.model.g

    def replicate(self, task, count: Optional[int] = None) -> list:
        result = run_replications(task, range(count or self.reps), self.threads)
        self.errored.update(result.errored_ids)
        for rep, err in result.errors.items():
            if err.code == "cap-exceeded":
                self.cap_incidents.add(rep)
        return result.ordered()

    def note_caps(self, samples) -> None:
        for s in samples:
            if getattr(s, "cap_exceeded", False):
                self.cap_incidents.add(s.replication_id)

    def absorb(self, batch: PairedBatch) -> None:
        self.errored.update(batch.errored_ids)
        self.cap_incidents.update(batch.cap_incidents)

    def finish(self, summary: dict, status: str = "ok") -> dict:
        if status == "ok" and self.cap_incidents:
            status = "caps_exceeded"
        summary = _json_safe({"status": status, "subcommand": self.subcommand, **summary,
                              "cap_incidents": sorted(self.cap_incidents),
                              "errored_replications": sorted(self.errored)})
        self.store.put_json("summary.json", summary)
        manifest = RunManifest(
            subcommand=self.subcommand, config_hash=self.cfg.config_hash(), seed=self.seed,
            version=__version__, started_at=self.started_at,
            wall_clock_seconds=round(time.monotonic() - self.started, 3), threads=self.threads,
            outputs=self.store.index(), cap_incidents=sorted(self.cap_incidents),
            errored_replications=sorted(self.errored),
            config=self.cfg.model_dump(mode="json"),
        )
        self.store.put_json("manifest.json", manifest.model_dump(mode="json"))
        logger.info("%s terminé : %s (%d fichiers, %.2fs)", self.subcommand, status,
                    len(manifest.outputs), manifest.wall_clock_seconds)
        return {**summary, "output_dir": str(self.store.root),
                "outputs": [o.path for o in manifest.outputs]}


def _sample_rows(samples: list[FunctionalSample]) -> list[tuple]:
    return [(s.replication_id, s.duration, s.A, s.A_star, s.eta_star, s.balk_patience, s.balk_room)
            for s in samples]


def _describe(values) -> dict:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return {"n": 0}
    mean, se = mean_with_se(arr)
    return {"n": int(arr.size), "mean": mean, "standard_error": se,
            "min": float(arr.min()), "max": float(arr.max())}


def steady_state_horizon(rho_eff: float) -> float:
    """
    Horizon par défaut de la moyenne temporelle de `steady-state`.

    La relaxation d'une file M/G/1 croît comme (1 − ρ)^−2 : l'horizon suit,
    borné par [STEADY_STATE_MIN_HORIZON, STEADY_STATE_MAX_HORIZON].
    """
    if not 0.0 <= rho_eff < 1.0:
        return STEADY_STATE_MIN_HORIZON
    scaled = 1e3 / (1.0 - rho_eff) ** 2
    return min(max(scaled, STEADY_STATE_MIN_HORIZON), STEADY_STATE_MAX_HORIZON)


def _verdict_dict(v) -> dict:
    return v.model_dump(mode="json")


# =============================================================================
# Service
# =============================================================================

class ExperimentService:
    """Sous-commandes de qb ; chaque méthode retourne un dict avec "status"."""

    def run(self, subcommand: str, cfg: ExperimentConfig) -> dict:
        """Point d'entrée unique : valide, exécute, convertit les erreurs."""
        handler = getattr(self, "_" + subcommand.replace("-", "_"), None)
        if subcommand not in SUBCOMMANDS or handler is None:
            return {"status": "error", "code": "unknown-subcommand",
                    "message": f"sous-commande inconnue : {subcommand}"}
        try:
            ctx = _Run(subcommand, cfg.with_defaults())
            logger.info("%s : reps=%d seed=%d threads=%d → %s", subcommand, ctx.reps, ctx.seed,
                        ctx.threads, ctx.store.root)
            return handler(ctx)
        except QueueBoundsError as e:
            logger.error("%s : %s", subcommand, e)
            return e.to_dict()
        except ValidationError as e:
            logger.error("%s : options invalides : %s", subcommand, e)
            return ConfigError(f"options invalides : {e}").to_dict()

    # ─────────────────────────────────────────────────────────
    # simulate
    # ─────────────────────────────────────────────────────────

    def _simulate(self, ctx: _Run) -> dict:
        """Périodes d'activité, cycles ou horizons → samples.csv + summary.json."""
        mode, g = ctx.cfg.run.mode, ctx.g
        spec = ctx.cycle_spec if mode == "cycle" else ctx.spec
        horizon = ctx.model.window or ctx.cfg.run.horizon or SIMULATE_HORIZON
        validate_spec(spec, mode, g)
        trace = ctx.cfg.output.trace

        def task(rep: int):
            streams = ReplicationStreams(ctx.seed, rep)
            record = trace and rep < ctx.cfg.output.trace_limit
            if mode == "busy-period":
                path, s = run_busy_period(spec, g, streams, ctx.caps, record, validate=False)
            elif mode == "cycle":
                path, s = run_cycle(spec, g, streams, ctx.caps, record, validate=False)
            else:
                path, res = run_horizon(spec, horizon, g, streams, ctx.caps, record, validate=False)
                s = horizon_sample(res, path.x)
            return s, (trace_csv(path) if record else None)

        out = ctx.replicate(task)
        samples = [s for s, _ in out]
        ctx.note_caps(samples)
        ctx.store.put_csv("samples.csv", SAMPLE_COLUMNS, _sample_rows(samples))
        for s, text in out:
            if text is not None:
                ctx.store.put(f"trace/rep_{s.replication_id:04d}.csv", text)
        summary = {
            "mode": mode,
            "duration": _describe([s.duration for s in samples]),
            "A": _describe([s.A for s in samples]),
            "A_star": _describe([s.A_star for s in samples]),
            "eta_star": _describe([s.eta_star for s in samples]),
            "balks": {"patience": sum(s.balk_patience for s in samples),
                      "room": sum(s.balk_room for s in samples)},
        }
        return ctx.finish(summary)

    # ─────────────────────────────────────────────────────────
    # dominance
    # ─────────────────────────────────────────────────────────

    def _test_arms(self, ctx: _Run, batch: PairedBatch, lower: str, upper: str, label: str) -> list[dict]:
        out = []
        for attr in ("A", "A_star"):
            v = test_st_dominance(batch.values(lower, attr), batch.values(upper, attr), ctx.alpha,
                                  ctx.cfg.run.permutation, label=f"{label} {attr}")
            d = _verdict_dict(v)
            d.update({"functional": attr, "lower": lower, "upper": upper, "evidence": batch.label})
            out.append(d)
        return out

    def _batch(self, ctx: _Run, kind: str, cfg: BatchConfig, coupled: Optional[bool] = None) -> PairedBatch:
        batch = paired_functional_batch(kind, cfg, ctx.reps, ctx.seed, ctx.threads,
                                        ctx.cfg.run.coupled if coupled is None else coupled, ctx.caps)
        ctx.absorb(batch)
        return batch

    def _dominance(self, ctx: _Run) -> dict:
        run = ctx.cfg.run
        if run.arms_csv:
            return self._dominance_from_csv(ctx, run.arms_csv)
        suite = run.suite
        costs = run.costs or [ctx.g]
        ladder = run.ladder or ctx.model.ladder
        verdicts: list[dict] = []
        extra: dict = {}
        batches: list[PairedBatch] = []

        if suite in ("rates", "conjecture"):
            rate_hi = ctx.model.rate_hi if suite == "conjecture" else None
            if suite == "conjecture" and rate_hi is None:
                raise ConfigError("suite conjecture : model.rate_hi requis")
            label = "conjecture evidence" if suite == "conjecture" else "verified"
            for i, g in enumerate(costs):
                batch = self._batch(ctx, "rates", BatchConfig(spec=ctx.spec, g=g, rate_hi=rate_hi,
                                                              label=label))
                batches.append(batch)
                verdicts += [dict(v, cost=i) for v in self._test_arms(ctx, batch, "lo", "hi", f"g#{i}")]
        elif suite == "rooms":
            for k in [k for k in ladder if k is not None]:
                batch = self._batch(ctx, "rates", BatchConfig(spec=ctx.spec.with_room(k), g=costs[0]))
                batches.append(batch)
                verdicts += [dict(v, room=k) for v in self._test_arms(ctx, batch, "lo", "hi", f"k={k}")]
        elif suite == "monotonicity":
            spec = ctx.spec.dominating().with_room(None)
            batch = self._batch(ctx, "rooms", BatchConfig(spec=spec, g=costs[0], ladder=ladder))
            batches.append(batch)
            for k, l in zip(ladder, ladder[1:]):
                verdicts += self._test_arms(ctx, batch, arm_name(k), arm_name(l),
                                            f"{arm_name(k)} ≤ {arm_name(l)}")
            if batch.ladders:
                extra["K_of_u"] = _describe([s.K_of_u for s in batch.ladders])
                extra["ladder_convergence_ok"] = all(s.convergence_ok for s in batch.ladders)
        else:
            extra.update(self._pathwise(ctx, costs[0], batches))

        for i, batch in enumerate(batches):
            name = "paired.csv" if len(batches) == 1 else f"paired_{i}.csv"
            ctx.store.put(name, paired_csv(batch))
        if batches:
            ctx.store.put("ecdf.csv", ecdf_csv({n: batches[0].values(n) for n in batches[0].arm_names}))

        rejected = [v for v in verdicts if v["verdict"] == "rejected"]
        if extra.get("pathwise_violations"):
            rejected.append({"label": "pathwise"})
        if extra.get("ladder_convergence_ok") is False or extra.get("shared_marks_ok") is False:
            rejected.append({"label": "coupling audit"})
        summary = {"suite": suite, "coupled": run.coupled, "verdicts": verdicts, **extra,
                   "rejected_count": len(rejected)}
        return ctx.finish(summary, "rejected" if rejected else "ok")

    def _pathwise(self, ctx: _Run, g: CostFunction, batches: list) -> dict:
        """Couplage λ ≤ λ_h sur une fenêtre : violations de W_hi ≥ W_lo."""
        window = ctx.model.window or ctx.cfg.run.horizon or SIMULATE_HORIZON
        batch = self._batch(ctx, "rates", BatchConfig(spec=ctx.spec, g=g, window=window), coupled=True)
        batches.append(batch)
        infinite = ctx.spec.joint.survival_limit == 1.0
        out = {
            "window": window,
            "patience_infinite": infinite,
            "paths": len(batch.pairs),
            "shared_marks_ok": all(p.shared_marks_ok for p in batch.pairs),
        }
        if infinite:
            out["pathwise_violations"] = sum(p.violations for p in batch.pairs)
            out["paths_with_violation"] = sum(1 for p in batch.pairs if p.violations)
        else:
            crossings = ctx.replicate(
                lambda r: first_crossing(ctx.spec, ReplicationStreams(ctx.seed, r), window, ctx.caps))
            hits = [t for t in crossings if t is not None]
            out["paths_with_crossing"] = len(hits)
            out["first_crossing_times"] = hits[:20]
        return out

    def _dominance_from_csv(self, ctx: _Run, path: str) -> dict:
        """Bras lus depuis un CSV (arm, value) : arm ∈ {lower, upper}."""
        arms: dict[str, list[float]] = {"lower": [], "upper": []}
        try:
            with open(path, newline="", encoding="utf-8") as fh:
                for row in csv.DictReader(fh):
                    arms[row["arm"]].append(float(row["value"]))
        except (OSError, KeyError, ValueError) as e:
            raise ConfigError(f"arms_csv illisible ({path}) : {e}") from e
        v = test_st_dominance(arms["lower"], arms["upper"], ctx.alpha, ctx.cfg.run.permutation,
                              label="csv")
        ctx.store.put("ecdf.csv", ecdf_csv(arms))
        status = "rejected" if v.verdict == "rejected" else "ok"
        return ctx.finish({"suite": "csv", "verdicts": [_verdict_dict(v)],
                           "rejected_count": int(status == "rejected")}, status)

    # ─────────────────────────────────────────────────────────
    # bound
    # ─────────────────────────────────────────────────────────

    def _bound(self, ctx: _Run) -> dict:
        """Décomposition géométrique + bornes Monte Carlo face aux cycles simulés."""
        spec, g = ctx.cycle_spec, ctx.g
        validate_spec(spec, "cycle", g)
        kappa, lam_h, g0 = spec.rate.kappa, spec.rate.lambda_h, g.g0

        decs = ctx.replicate(lambda r: run_until_long_idle(spec, g, ReplicationStreams(ctx.seed, r),
                                                           ctx.caps, validate=False))
        for d in decs:
            if d.cap_exceeded:
                ctx.cap_incidents.add(d.replication_id)
        decs = [d for d in decs if not d.cap_exceeded and d.cycle is not None]
        cyc_A = np.array([d.cycle.A for d in decs])
        cyc_star = np.array([d.cycle.A_star for d in decs])
        a_bar = np.array([d.A_bar for d in decs])
        pathwise = [d.cycle.A <= d.A_bar * (1 + 1e-12) + 1e-12 for d in decs]

        sampler = BusyPeriodSampler(spec, g, ctx.seed, ctx.threads, ctx.caps)
        n_f = ctx.cfg.run.bound_samples or ctx.reps
        F_a, F_star = sampler(n_f)
        props = sample_prop_bound(sampler, kappa, lam_h, g0, max(ctx.reps, 100), ctx.seed)

        u = ctx.cfg.run.u_grid
        if not u:
            finite = props.index_bound[np.isfinite(props.index_bound)]
            top = (float(np.quantile(finite, 0.999)) if finite.size else 0.0) + max(1.0, kappa)
            u = np.linspace(0.0, top, ctx.cfg.run.grid_points).tolist()
        J = decompound_cdf(EmpiricalDistribution(F_a), kappa, lam_h, u, ctx.tol)
        J_star = decompound_cdf(EmpiricalDistribution(F_star), kappa, lam_h, u, ctx.tol)
        result = J.model_copy(update={
            "J_star": J_star.J,
            "index_bound_cdf": empirical_bound_cdf(props.index_bound, u),
            "index_bound_star_cdf": empirical_bound_cdf(props.index_bound_star, u),
            "tail_variant_cdf": empirical_bound_cdf(props.tail_variant, u),
        })
        ctx.store.put_csv("bound.csv", BOUND_COLUMNS,
                          zip(result.u, result.J, result.J_star, result.index_bound_cdf,
                              result.index_bound_star_cdf, result.tail_variant_cdf))

        verdicts = []
        if decs:
            for lower, upper, label in ((cyc_A, props.index_bound, "cycle A ≤ borne indice"),
                                        (cyc_star, props.index_bound_star, "cycle A* ≤ borne indice*"),
                                        (a_bar, props.index_bound, "A_bar ≤ borne indice")):
                verdicts.append(_verdict_dict(test_st_dominance(lower, upper, ctx.alpha, label=label)))
            verdicts.append(_verdict_dict(test_against_cdf(cyc_A, result.u, result.J, ctx.alpha,
                                                           label="cycle A ≤ J")))
            verdicts.append(_verdict_dict(test_against_cdf(cyc_star, result.u, J_star.J, ctx.alpha,
                                                           label="cycle A* ≤ J*")))
        rejected = any(v["verdict"] == "rejected" for v in verdicts) or not all(pathwise)
        summary = {
            "p": result.p, "shift": result.shift, "n_max": result.n_max, "residual": result.residual,
            "lattice_width": result.lattice_width, "lattice_width_star": J_star.lattice_width,
            "tolerance": result.tolerance, "rounding": result.rounding,
            "cycles": len(decs), "busy_samples": n_f,
            "busy_periods_capped": sampler.cap_incidents,
            "pathwise_A_le_A_bar": {"paths": len(pathwise), "holds": sum(pathwise)},
            "cycle_A": _describe(cyc_A), "A_bar": _describe(a_bar),
            "index_bound": _describe(props.index_bound),
            "index_bound_star": _describe(props.index_bound_star),
            "tail_variant": _describe(props.tail_variant),
            "verdicts": verdicts,
            "note": "J, borne à indice géométrique et variante de queue calculées côte à côte",
        }
        return ctx.finish(summary, "rejected" if rejected else "ok")

    # ─────────────────────────────────────────────────────────
    # tail
    # ─────────────────────────────────────────────────────────

    def _cycles(self, ctx: _Run, g: CostFunction) -> list[FunctionalSample]:
        spec = ctx.cycle_spec
        validate_spec(spec, "cycle", g)
        samples = ctx.replicate(lambda r: run_cycle(spec, g, ReplicationStreams(ctx.seed, r),
                                                    ctx.caps, validate=False)[1])
        ctx.note_caps(samples)
        return [s for s in samples if not s.cap_exceeded]

    def _tail(self, ctx: _Run) -> dict:
        """Rapports empiriques/référence aux quantiles (tendance, pas une limite)."""
        spec = ctx.spec
        stability = stability_for(spec)
        cycles = self._cycles(ctx, CostFunction.one())
        qs = ctx.cfg.run.quantiles
        kappa, lam_h = spec.rate.kappa, spec.rate.lambda_h
        reports = [
            tail_ratio([s.duration for s in cycles], spec.joint.service, stability.rho_h, kappa,
                       lam_h, 1.0, qs, "cycle"),
            tail_ratio([s.eta_star for s in cycles], spec.joint.service, stability.rho_h, kappa,
                       lam_h, 1.0, qs, "joins"),
        ]
        mg1 = BusyPeriodSampler(all_join_spec(spec), CostFunction.one(), ctx.seed, ctx.threads, ctx.caps)
        busy = [s.duration for s in mg1.samples(ctx.reps) if not s.cap_exceeded]
        reports.append(tail_ratio(busy, spec.joint.service, stability.rho_h, kappa, lam_h, 0.0,
                                  qs, "busy-period"))
        rows = []
        for rep in reports:
            rows += [(rep.target, q, u, s, r, ratio, rep.bound)
                     for q, u, s, r, ratio in zip(rep.quantiles, rep.u, rep.survival,
                                                  rep.reference, rep.ratio)]
        ctx.store.put_csv("tail.csv", TAIL_COLUMNS, rows)
        summary = {"label": "trend check", "rho_h": stability.rho_h,
                   "reports": [r.model_dump(mode="json") for r in reports],
                   "within_twice_bound": all(x <= 2.0 * r.bound for r in reports for x in r.ratio)}
        return ctx.finish(summary)

    # ─────────────────────────────────────────────────────────
    # stability / steady-state / moments
    # ─────────────────────────────────────────────────────────

    def _stability(self, ctx: _Run) -> dict:
        report = stability_for(ctx.spec)
        return ctx.finish({"report": report.model_dump(mode="json"), "verdict": report.verdict})

    def _steady_state(self, ctx: _Run) -> dict:
        """Ratio régénératif E𝒜/Eξ face à la moyenne temporelle sur horizon long."""
        spec, g = ctx.spec, ctx.g
        cycles = self._cycles(ctx, g)
        ratio = ratio_estimate([s.A for s in cycles], [s.duration for s in cycles], paired=True,
                               seed=ctx.seed)
        horizon = ctx.cfg.run.horizon or steady_state_horizon(stability_for(spec).rho_eff)
        empty = spec.model_copy(update={"init": Init()})
        averages = ctx.replicate(
            lambda r: run_horizon(empty, horizon, g, ReplicationStreams(ctx.seed, r, 1), ctx.caps,
                                  validate=r == 0)[1],
            ctx.cfg.run.horizon_reps or STEADY_STATE_REPS)
        avg, avg_se = mean_with_se([a.time_average for a in averages])
        joint_se = math.hypot(ratio.standard_error, avg_se)
        summary = {
            "ratio": ratio.model_dump(mode="json"),
            "time_average": {"estimate": avg, "standard_error": avg_se, "horizon": horizon,
                             "reps": len(averages)},
            "agreement_3se": abs(ratio.estimate - avg) <= 3.0 * joint_se,
        }
        try:
            sampler = BusyPeriodSampler(spec, g, ctx.seed, ctx.threads, ctx.caps)
            summary["steady_state_bound"] = steady_state_bound(spec, g, sampler.samples(ctx.reps))
        except QueueBoundsError as e:
            summary["steady_state_bound"] = {"applies": False, "code": e.code, "message": str(e)}
        return ctx.finish(summary)

    def _moments(self, ctx: _Run) -> dict:
        cycles = self._cycles(ctx, CostFunction.one())
        estimates = [eta_moment_report(cycles, m, ctx.spec, seed=ctx.seed).model_dump(mode="json")
                     for m in ctx.cfg.run.orders]
        cycle_len = moment_estimate([s.duration for s in cycles], 1, seed=ctx.seed)
        return ctx.finish({"eta_star": estimates, "cycle_length": cycle_len.model_dump(mode="json")})

    # ─────────────────────────────────────────────────────────
    # validate / replay
    # ─────────────────────────────────────────────────────────

    def _validate(self, ctx: _Run) -> dict:
        checks = run_suite(reps=ctx.reps, seed=ctx.seed, threads=ctx.threads,
                           horizon=max(ctx.cfg.run.horizon or 0.0, VALIDATE_MIN_HORIZON),
                           tol=ctx.tol, caps=ctx.caps, only=ctx.cfg.run.checks or None)
        failed = [c["name"] for c in checks if not c["ok"]]
        return ctx.finish({"checks": checks, "failed": failed}, "rejected" if failed else "ok")

    def replay(self, manifest_path: str, out_dir: Optional[str] = None) -> dict:
        """Rejoue la sous-commande d'un manifeste et compare les empreintes."""
        try:
            data = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
            manifest = RunManifest.model_validate(data)
            cfg = ExperimentConfig.model_validate(manifest.config)
        except (OSError, json.JSONDecodeError, ValidationError) as e:
            return ConfigError(f"manifeste illisible ({manifest_path}) : {e}").to_dict()
        target = out_dir or str(Path(manifest_path).parent / "replay")
        cfg = cfg.with_overrides(output={"directory": target})
        result = self.run(manifest.subcommand, cfg)
        if result.get("status") == "error":
            return result
        fresh_manifest = RunManifest.model_validate(ResultStore(target).get_json("manifest.json"))
        fresh = {o.path: o.sha256 for o in fresh_manifest.outputs}
        compared = [o for o in manifest.outputs if o.path.endswith(".csv")]
        mismatched = [o.path for o in compared if fresh.get(o.path) != o.sha256]
        result.update({"replayed_from": manifest_path, "compared": [o.path for o in compared],
                       "mismatched": mismatched, "identical": not mismatched})
        if mismatched:
            result["status"] = "rejected"
        return result


_service: Optional[ExperimentService] = None


def get_experiment_service() -> ExperimentService:
    """Retourne le singleton ExperimentService."""
    global _service
    if _service is None:
        _service = ExperimentService()
    return _service
