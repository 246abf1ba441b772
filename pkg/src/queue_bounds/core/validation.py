# -*- coding: utf-8 -*-
"""
Suite d'oracles de `qb validate`.

Chaque contrôle retourne {"name", "ok", "value", "expected", "detail"} ;
les tailles sont réglables (reps, horizon) pour passer de l'échelle du
poste de travail aux tailles de recette.
"""

import logging
import math
from typing import Callable, Optional

import numpy as np
from scipy import stats as sps

from .bounds import (
    compound_geometric_mc, decompound_cdf, mg1_oracles, stability_check,
)
from .coupling import run_coupled_rates
from .errors import QueueBoundsError
from .model import CostFunction, Init, JointLaw, Marginal, QueueSpec, RateFunction
from .pool import run_replications
from .simulator import SimCaps, one_step_drift, run_busy_period, run_cycle, run_horizon
from .stats import EmpiricalDistribution, mean_with_se
from .streams import CandidateStream, ReplicationStreams, count_arrivals

logger = logging.getLogger("queue_bounds.validation")

_MM1 = JointLaw.infinite_patience(Marginal.exponential(1.0))


def _check(name: str, ok: bool, value, expected, detail: str = "") -> dict:
    return {"name": name, "ok": bool(ok), "value": value, "expected": expected, "detail": detail}


# ─────────────────────────────────────────────────────────────
# Contrôles
# ─────────────────────────────────────────────────────────────

def check_deterministic_drain(**_) -> list[dict]:
    spec = QueueSpec(rate=RateFunction.constant(0.0, 0.0), joint=_MM1, init=Init.at(3.0))
    _, s = run_busy_period(spec, CostFunction.identity(), ReplicationStreams(0, 0))
    return [
        _check("drain.tau", abs(s.duration - 3.0) <= 1e-12, s.duration, 3.0),
        _check("drain.A", abs(s.A - 4.5) <= 1e-12, s.A, 4.5),
    ]


def check_thinning(reps: int, seed: int, threads: int, **_) -> list[dict]:
    rate = RateFunction.sinusoid(base=0.5, amplitude=0.5, lambda_h=1.0, kappa=1.0)
    result = run_replications(lambda r: count_arrivals(ReplicationStreams(seed, r), rate, 1.0)[1],
                              range(reps), threads)
    mean, se = mean_with_se(result.ordered())
    cands = CandidateStream(ReplicationStreams(seed, reps), rate).candidates_until(float(min(reps, 10_000)))
    gaps = np.diff([0.0] + [c[0] for c in cands])
    ks = sps.kstest(gaps, "expon")
    return [
        _check("thinning.mean_count", abs(mean - 0.5) <= 3 * se, mean, 0.5, f"SE={se:.3g}"),
        _check("thinning.gaps_exp1", ks.pvalue >= 0.01, float(ks.pvalue), "p ≥ 0.01",
               f"{gaps.size} écarts"),
    ]


def check_mg1(reps: int, seed: int, threads: int, horizon: float, caps: SimCaps, **_) -> list[dict]:
    oracle = mg1_oracles(0.5, Marginal.exponential(1.0), x=1.0)
    spec = QueueSpec(rate=RateFunction.constant(0.5), joint=_MM1, init=Init.at(1.0))
    busy = run_replications(
        lambda r: run_busy_period(spec, CostFunction.one(), ReplicationStreams(seed, r), caps,
                                  validate=False)[1], range(reps), threads).ordered()
    tau, se_tau = mean_with_se([s.duration for s in busy])
    served, se_served = mean_with_se([1 + s.eta_star for s in busy])
    _, avg = run_horizon(spec.model_copy(update={"init": Init()}), horizon, CostFunction.identity(),
                         ReplicationStreams(seed, reps), caps)
    pk = oracle["pk_mean_workload"]
    return [
        _check("mg1.mean_tau", abs(tau - oracle["mean_busy_from_x"]) <= 3 * se_tau, tau,
               oracle["mean_busy_from_x"], f"SE={se_tau:.3g}"),
        _check("mg1.busy_count", abs(served - oracle["busy_count_mean"]) <= 3 * se_served, served,
               oracle["busy_count_mean"], f"SE={se_served:.3g}"),
        _check("mg1.pk_workload", abs(avg.time_average - pk) <= 0.05 * pk, avg.time_average, pk,
               f"horizon {horizon:g}"),
    ]


def check_drift(reps: int, seed: int, caps: SimCaps, **_) -> list[dict]:
    spec = QueueSpec(rate=RateFunction.constant(0.5), joint=JointLaw.product_exp(1.0, 1.0),
                     init=Init.at(2.0))
    out = []
    for x in (2.0, 5.0, 10.0):
        d = one_step_drift(spec, x, reps, seed, caps)
        out.append(_check(f"drift.x={x:g}", d["ok"], d["estimate"], f"≤ {d['bound']:.4g} + 3 SE",
                          f"SE={d['standard_error']:.3g}"))
    return out


def check_identical_coupling(seed: int, caps: SimCaps, **_) -> list[dict]:
    spec = QueueSpec(rate=RateFunction.constant(0.6, kappa=1.0), joint=JointLaw.product_exp(),
                     init=Init.at(1.0))
    pairs = [run_coupled_rates(spec, CostFunction.one(), ReplicationStreams(seed, r), caps)
             for r in range(20)]
    same = all(p.sample_lo.same_values(p.sample_hi) for p in pairs)
    marks = all(p.shared_marks_ok for p in pairs)
    return [
        _check("coupling.identical_arms", same, same, True, "λ ≡ λ_h"),
        _check("coupling.shared_marks", marks, marks, True),
    ]


def check_decompounding(seed: int, tol: float, **_) -> list[dict]:
    point = EmpiricalDistribution([1.0])
    res = decompound_cdf(point, 1.0, math.log(2.0), [0.5, 3.5], tol)
    j35 = res.J[1]

    rng = np.random.default_rng(seed)
    F_hat = EmpiricalDistribution(rng.exponential(1.0, size=2000))
    grid = np.linspace(1.0, 8.0, 50)
    lattice = np.asarray(decompound_cdf(F_hat, 1.0, 0.6, grid, tol).J)
    mc = compound_geometric_mc(F_hat, 1.0, 0.6, 200_000, seed)
    mc_cdf = EmpiricalDistribution(mc).ecdf(grid)
    se = np.sqrt(mc_cdf * (1.0 - mc_cdf) / mc.size)
    gap = np.abs(lattice - mc_cdf) - (3.0 * se + tol)
    return [
        _check("bound.point_mass_J", abs(j35 - 0.75) <= 1e-9 and res.J[0] == 0.0, j35, 0.75),
        _check("bound.lattice_vs_mc", bool(np.all(gap <= 0.0)), float(np.max(gap)), "≤ 0",
               "|J − Ĵ_MC| − (3 SE + tol) sur 50 points"),
    ]


def check_stability(**_) -> list[dict]:
    a = stability_check(1.0, Marginal.deterministic(0.5))
    b = stability_check(2.0, Marginal.exponential(1.0), Marginal.exponential(1.0, atom_at_infinity=0.4))
    c = stability_check(2.0, Marginal.exponential(1.0))
    return [
        _check("stability.rho_half", a.verdict == "stable" and a.rho_eff == 0.5, a.rho_eff, 0.5),
        _check("stability.p_inf", b.verdict == "stable" and abs(b.rho_eff - 0.8) < 1e-12, b.rho_eff, 0.8),
        _check("stability.unstable", c.verdict == "unstable", c.verdict, "unstable"),
    ]


def check_stability_simulated(reps: int, seed: int, threads: int, caps: SimCaps, **_) -> list[dict]:
    """Verdicts confrontés aux trajectoires : cycles finis si stable, charge qui croît sinon."""
    stable = QueueSpec(rate=RateFunction.sinusoid(base=0.4, amplitude=0.2, lambda_h=0.6, kappa=1.0),
                       joint=JointLaw.product_exp())
    cycles = run_replications(
        lambda r: run_cycle(stable, CostFunction.one(), ReplicationStreams(seed, r), caps,
                            validate=r == 0)[1], range(reps), threads).ordered()
    capped = sum(1 for s in cycles if s.cap_exceeded)

    unstable = QueueSpec(rate=RateFunction.constant(2.0, kappa=1.0), joint=_MM1)
    paths = min(reps, 100)

    def growth(r: int) -> bool:
        _, short = run_horizon(unstable, 1e2, CostFunction.one(), ReplicationStreams(seed, r, 2), caps,
                               validate=False)
        _, long = run_horizon(unstable, 1e4, CostFunction.one(), ReplicationStreams(seed, r, 2), caps,
                              validate=False)
        return long.end_workload > 10.0 * short.end_workload

    grew = sum(run_replications(growth, range(paths), threads).ordered())
    return [
        _check("stability.stable_cycles", capped == 0, capped, 0, f"{len(cycles)} cycles"),
        _check("stability.unstable_growth", grew >= 0.95 * paths, grew / paths, "≥ 0.95",
               f"W(10⁴) > 10·W(10²) sur {paths} chemins"),
    ]


CHECKS: dict[str, Callable[..., list[dict]]] = {
    "drain": check_deterministic_drain,
    "thinning": check_thinning,
    "mg1": check_mg1,
    "drift": check_drift,
    "coupling": check_identical_coupling,
    "decompounding": check_decompounding,
    "stability": check_stability,
    "stability-sim": check_stability_simulated,
}


def run_suite(reps: int = 2000, seed: int = 0, threads: int = 1, horizon: float = 1e6,
              tol: float = 1e-3, caps: Optional[SimCaps] = None,
              only: Optional[list[str]] = None) -> list[dict]:
    """Exécute les contrôles demandés (tous par défaut) ; une erreur devient un échec."""
    caps = caps or SimCaps.from_settings()
    params = dict(reps=reps, seed=seed, threads=threads, horizon=horizon, tol=tol, caps=caps)
    out: list[dict] = []
    for name, check in CHECKS.items():
        if only and name not in only:
            continue
        try:
            results = check(**params)
        except QueueBoundsError as e:
            results = [_check(name, False, None, None, f"{e.code}: {e}")]
        for r in results:
            logger.info("%s %s : %s (attendu %s)", "✅" if r["ok"] else "❌", r["name"],
                        r["value"], r["expected"])
        out.extend(results)
    return out
