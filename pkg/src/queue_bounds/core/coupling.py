# -*- coding: utf-8 -*-
"""
Couplages sur aléa partagé.

    run_coupled_rates       — file λ et file λ_h (ou deux taux λ₁ ≤ λ₂) tirées
                              sur le même flux de candidats et de marques
    run_room_ladder         — échelle LCFS-PR k ∈ {k₀ < k₁ < … < ∞}
    paired_functional_batch — lots de réplications par bras, couplés ou
                              indépendants, prêts pour stats.test_st_dominance

Les marques (S, Y) sont attachées aux candidats du flux λ_h : deux bras de
même λ_h rejoués sur les mêmes voies (streams.fresh()) voient les mêmes
marques pour toute arrivée qu'ils partagent. Les bras d'une même
réplication tournent l'un après l'autre dans le même thread.

Usage :
    pair = run_coupled_rates(spec, CostFunction.one(), ReplicationStreams(seed, rep))
    ladder = run_room_ladder(spec, [0, 1, 2, None], g, 50.0, ReplicationStreams(seed, rep))
"""

import bisect
import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from .errors import CapExceeded, SimulationError
from .model import CostFunction, QueueSpec, RateFunction, validate_spec
from .models import (
    CoupledPairSample, EventKind, FunctionalSample, HorizonAverage, RoomLadderSample, WorkloadPath,
)
from .pool import run_replications
from .simulator import SimCaps, run_busy_period, run_horizon
from .streams import ReplicationStreams, count_arrivals

logger = logging.getLogger("queue_bounds.coupling")

PATHWISE_TOLERANCE = 1e-9
MIN_BATCH_REPS = 100

BatchKind = Literal["rates", "rooms"]
_JOIN = EventKind.JOIN.value


# =============================================================================
# Lecture d'une trajectoire enregistrée
# =============================================================================

class _WorkloadCursor:
    """
    W(t−) et W(t) relus depuis les admissions d'une trajectoire, avec les
    mêmes opérations flottantes que le moteur.
    """

    def __init__(self, path: WorkloadPath):
        joins = path.joins()
        self.times = [e.time for e in joins]
        self.refs = [(0.0, path.x)] + [(e.time, e.w_pre + e.jump) for e in joins]

    def _at(self, t: float, idx: int) -> float:
        t_ref, w_ref = self.refs[idx]
        w = w_ref - (t - t_ref)
        return w if w > 0.0 else 0.0

    def before(self, t: float) -> float:
        return self._at(t, bisect.bisect_left(self.times, t))

    def after(self, t: float) -> float:
        return self._at(t, bisect.bisect_right(self.times, t))


def _pathwise_check(lo: WorkloadPath, hi: WorkloadPath, end: float) -> tuple[int, Optional[float]]:
    """Compte les instants t ≤ end (de l'un ou l'autre chemin) où W_hi < W_lo."""
    c_lo, c_hi = _WorkloadCursor(lo), _WorkloadCursor(hi)
    epochs = sorted({e.time for e in lo.events} | {e.time for e in hi.events} | {0.0})
    violations, first = 0, None
    for t in epochs:
        if t > end:
            break
        for w_lo, w_hi in ((c_lo.before(t), c_hi.before(t)), (c_lo.after(t), c_hi.after(t))):
            if w_hi + PATHWISE_TOLERANCE * max(1.0, w_lo) < w_lo:
                violations += 1
                if first is None:
                    first = t
    return violations, first


def _shared_marks_ok(lo: WorkloadPath, hi: WorkloadPath) -> bool:
    """Arrivées communes : même instant ⇒ même Y, et même S si les deux admettent."""
    by_time = {e.time: e for e in hi.arrivals()}
    for e in lo.arrivals():
        if e.time > hi.end_time:
            break
        twin = by_time.get(e.time)
        if twin is None or twin.patience != e.patience:
            return False
        if e.jump > 0.0 and twin.jump > 0.0 and twin.jump != e.jump:
            return False
    return True


def horizon_sample(res: HorizonAverage, x: float) -> FunctionalSample:
    return FunctionalSample(
        replication_id=res.replication_id, horizon_kind="horizon", x=x, duration=res.horizon,
        A=res.integral, A_star=res.A_star, eta_star=res.eta_star,
        balk_patience=res.balk_patience, balk_room=res.balk_room,
        end_reason="horizon", cap_exceeded=res.cap_exceeded,
    )


# =============================================================================
# Couplage λ ≤ λ_h
# =============================================================================

def run_coupled_rates(spec_lo: QueueSpec, g: CostFunction, streams: ReplicationStreams,
                      caps: Optional[SimCaps] = None, rate_hi: Optional[RateFunction] = None,
                      window: Optional[float] = None, label: str = "verified") -> CoupledPairSample:
    """
    Simule la file λ (amincie) et la file dominante sur les mêmes candidats.

    Sans rate_hi, le bras haut a λ ≡ λ_h. Sans window, chaque bras est une
    période d'activité ; avec window = T, les deux bras couvrent [0, T].
    La dominance trajectorielle W_hi ≥ W_lo n'est vérifiée qu'en patience
    infinie (sinon « not-applicable »).
    """
    spec_hi = spec_lo.dominating() if rate_hi is None else spec_lo.with_rate(rate_hi)
    if spec_hi.rate.lambda_h != spec_lo.rate.lambda_h:
        raise SimulationError(
            f"λ_h différents : {spec_lo.rate.lambda_h} ≠ {spec_hi.rate.lambda_h}", "coupling-mismatch")
    caps = caps or SimCaps.from_settings()
    rid = streams.replication_id

    if window is None:
        path_lo, s_lo = run_busy_period(spec_lo, g, streams.fresh(), caps, record=True)
        path_hi, s_hi = run_busy_period(spec_hi, g, streams.fresh(), caps, record=True)
        end = min(path_lo.end_time, path_hi.end_time)
    else:
        path_lo, h_lo = run_horizon(spec_lo, window, g, streams.fresh(), caps, record=True)
        path_hi, h_hi = run_horizon(spec_hi, window, g, streams.fresh(), caps, record=True)
        s_lo, s_hi = horizon_sample(h_lo, path_lo.x), horizon_sample(h_hi, path_hi.x)
        end = window

    if s_lo.cap_exceeded or s_hi.cap_exceeded:
        raise CapExceeded(f"rep {rid} : plafond atteint sur un bras couplé")

    marks_ok = _shared_marks_ok(path_lo, path_hi)
    if not marks_ok:
        logger.warning("rep %d : marques partagées divergentes", rid)

    flag, violations, first = "not-applicable", 0, None
    if spec_lo.joint.survival_limit == 1.0:
        violations, first = _pathwise_check(path_lo, path_hi, end)
        flag = "holds" if violations == 0 else "violated"
        if violations:
            logger.warning("rep %d : %d violation(s) de W_hi ≥ W_lo, première à t=%.6g",
                           rid, violations, first)

    return CoupledPairSample(
        replication_id=rid, sample_lo=s_lo, sample_hi=s_hi, pathwise_dominance_ok=flag,
        violations=violations, first_violation_time=first, shared_marks_ok=marks_ok, label=label,
    )


def first_crossing(spec_lo: QueueSpec, streams: ReplicationStreams, window: float,
                   caps: Optional[SimCaps] = None) -> Optional[float]:
    """
    Premier instant où W_lo > W_hi sur [0, window], sans restriction sur la
    patience : exhibe le croisement possible en patience finie.
    """
    g = CostFunction.one()
    path_lo, _ = run_horizon(spec_lo, window, g, streams.fresh(), caps, record=True)
    path_hi, _ = run_horizon(spec_lo.dominating(), window, g, streams.fresh(), caps, record=True)
    _, first = _pathwise_check(path_lo, path_hi, window)
    return first


# =============================================================================
# Échelle de salles d'attente
# =============================================================================

def _arrival_signature(path: WorkloadPath, u: float) -> list[tuple]:
    return [(e.time, e.kind == _JOIN, e.w_pre, e.jump) for e in path.arrivals() if e.time <= u]


def run_room_ladder(spec: QueueSpec, ks: list[Optional[int]], g: CostFunction, window: float,
                    streams: ReplicationStreams, caps: Optional[SimCaps] = None) -> RoomLadderSample:
    """
    Une période d'activité LCFS-PR par k, toutes sur les mêmes voies.

    K_of_u = max des L(t−) vus par les admissions de [0, u] dans le membre
    ∞ : aucune salle k ≥ K_of_u n'a refusé de client sur [0, u], donc ces
    membres coïncident avec le membre ∞ sur la fenêtre.
    """
    finite = [k for k in ks if k is not None]
    if not ks or ks[-1] is not None or ks.count(None) != 1:
        raise SimulationError("l'échelle doit se terminer par k = ∞ (None)", "invalid-ladder")
    if finite != sorted(set(finite)) or any(k < 0 for k in finite):
        raise SimulationError(f"échelle non strictement croissante : {ks}", "invalid-ladder")
    caps = caps or SimCaps.from_settings()
    rid = streams.replication_id

    paths: list[WorkloadPath] = []
    samples: list[FunctionalSample] = []
    for k in ks:
        path, sample = run_busy_period(spec.with_room(k), g, streams.fresh(), caps,
                                       record=True, validate=k == ks[0])
        if sample.cap_exceeded:
            raise CapExceeded(f"rep {rid} : plafond atteint pour k={k}")
        paths.append(path)
        samples.append(sample)

    inf_path = paths[-1]
    K = max((e.l_pre for e in inf_path.joins() if e.time <= window), default=0)
    count_window = window if math.isfinite(window) else inf_path.end_time
    candidates, _ = count_arrivals(streams, spec.rate, count_window)

    reference = _arrival_signature(inf_path, window)
    reference_end = inf_path.end_time if inf_path.end_time <= window else None
    converged = True
    for k, path in zip(ks[:-1], paths[:-1]):
        if k < K:
            continue
        end = path.end_time if path.end_time <= window else None
        if _arrival_signature(path, window) != reference or end != reference_end:
            converged = False
            logger.warning("rep %d : membre k=%d ≠ membre ∞ sur [0, %g] (K=%d)", rid, k, window, K)

    return RoomLadderSample(
        replication_id=rid, ks=list(ks), samples=samples, window=window,
        K_of_u=K, candidates_in_window=candidates, convergence_ok=converged,
    )


# =============================================================================
# Lots de réplications appariées
# =============================================================================

class BatchConfig(BaseModel):
    """Entrée d'un lot : file, coût, et paramètres propres au type de lot."""
    model_config = ConfigDict(frozen=True)

    spec: QueueSpec
    g: CostFunction
    rate_hi: Optional[RateFunction] = None        # rates : bras haut (λ_h par défaut)
    ladder: list[Optional[int]] = [0, None]        # rooms
    window: Optional[float] = None                 # rates : horizon ; rooms : u
    label: str = "verified"


@dataclass
class PairedBatch:
    """Échantillons par bras (alignés par identifiant) et suivi des erreurs."""
    kind: str
    arms: dict[str, list[FunctionalSample]]
    pairs: list[CoupledPairSample] = field(default_factory=list)
    ladders: list[RoomLadderSample] = field(default_factory=list)
    errored_ids: list[int] = field(default_factory=list)
    cap_incidents: list[int] = field(default_factory=list)
    coupled: bool = True
    label: str = "verified"

    def values(self, arm: str, attr: str = "A") -> np.ndarray:
        return np.array([getattr(s, attr) for s in self.arms[arm]], dtype=float)

    @property
    def arm_names(self) -> list[str]:
        return list(self.arms)


def arm_name(k: Optional[int]) -> str:
    return "k=inf" if k is None else f"k={k}"


def _independent_member(spec: QueueSpec, cfg: BatchConfig, streams: ReplicationStreams,
                        caps: SimCaps) -> FunctionalSample:
    if cfg.window is not None and spec.discipline.kind == "fcfs":
        path, res = run_horizon(spec, cfg.window, cfg.g, streams, caps)
        sample = horizon_sample(res, path.x)
    else:
        _, sample = run_busy_period(spec, cfg.g, streams, caps)
    if sample.cap_exceeded:
        raise CapExceeded(f"rep {streams.replication_id} : plafond atteint")
    return sample


def paired_functional_batch(kind: BatchKind, cfg: BatchConfig, reps: int, seed: int,
                            threads: int = 1, coupled: bool = True,
                            caps: Optional[SimCaps] = None,
                            min_reps: int = MIN_BATCH_REPS) -> PairedBatch:
    """
    reps réplications ; réplication r ↦ ReplicationStreams(seed, r, arm).

    Bras couplés : arm = 0 partout. Bras indépendants : le bras i tire sur
    arm = i. Une réplication en erreur est retirée de tous les bras.
    """
    if reps < min_reps:
        raise SimulationError(f"reps={reps} < {min_reps}", "too-few-reps")
    caps = caps or SimCaps.from_settings()
    if kind == "rates":
        spec_hi = cfg.spec.dominating() if cfg.rate_hi is None else cfg.spec.with_rate(cfg.rate_hi)
        names = ["lo", "hi"]
        members = [cfg.spec, spec_hi]
    elif kind == "rooms":
        names = [arm_name(k) for k in cfg.ladder]
        members = [cfg.spec.with_room(k) for k in cfg.ladder]
    else:
        raise SimulationError(f"type de lot inconnu : {kind}", "invalid-batch-kind")
    run_kind = "horizon" if cfg.window is not None and kind == "rates" else "busy-period"
    for member in members:
        validate_spec(member, run_kind, cfg.g)

    def task(rep: int):
        if not coupled:
            return [_independent_member(m, cfg, ReplicationStreams(seed, rep, i), caps)
                    for i, m in enumerate(members)]
        streams = ReplicationStreams(seed, rep)
        if kind == "rates":
            return run_coupled_rates(cfg.spec, cfg.g, streams, caps, cfg.rate_hi,
                                     cfg.window, cfg.label)
        return run_room_ladder(cfg.spec, cfg.ladder, cfg.g,
                               math.inf if cfg.window is None else cfg.window, streams, caps)

    logger.info("lot %s (%s) : %d réplications, %d bras, seed=%d",
                kind, "couplé" if coupled else "indépendant", reps, len(names), seed)
    result = run_replications(task, range(reps), threads)

    batch = PairedBatch(kind=kind, arms={n: [] for n in names}, coupled=coupled, label=cfg.label,
                        errored_ids=result.errored_ids)
    batch.cap_incidents = sorted(r for r, err in result.errors.items()
                                 if isinstance(err.cause, CapExceeded))
    for out in result.ordered():
        if isinstance(out, CoupledPairSample):
            batch.pairs.append(out)
            batch.arms["lo"].append(out.sample_lo)
            batch.arms["hi"].append(out.sample_hi)
        elif isinstance(out, RoomLadderSample):
            batch.ladders.append(out)
            for n, s in zip(names, out.samples):
                batch.arms[n].append(s)
        else:
            for n, s in zip(names, out):
                batch.arms[n].append(s)
    return batch


PAIRED_COLUMNS = ("rep", "arm", "duration", "A", "A_star", "eta_star", "dominance_flag")


def paired_csv(batch: PairedBatch) -> str:
    """Un enregistrement par (réplication, bras) ; flag de dominance trajectorielle."""
    flags = {p.replication_id: p.pathwise_dominance_ok for p in batch.pairs}
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PAIRED_COLUMNS)
    for name, samples in batch.arms.items():
        for s in samples:
            writer.writerow((s.replication_id, name, repr(s.duration), repr(s.A), repr(s.A_star),
                             s.eta_star, flags.get(s.replication_id, "not-applicable")))
    return buf.getvalue()
