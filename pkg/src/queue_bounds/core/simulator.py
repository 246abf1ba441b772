# -*- coding: utf-8 -*-
"""
Moteur de simulation à événements — file FCFS M_t/G(Ψ)/1+H(Ψ) et file
LCFS-PR M_t/G(Ψ)/1/k+H(Ψ).

La charge de travail est portée par un couple de référence (t_ref, w_ref)
mis à jour aux seules admissions :

    W(t) = max(w_ref − (t − t_ref), 0)

FCFS et LCFS-PR calculent W avec exactement les mêmes opérations
flottantes ; seule change la tenue de L(t) :
    - FCFS    : file des instants de départ (d = t + (W(t−) + S))
    - LCFS-PR : pile des niveaux de charge à l'arrivée ; le client du
                sommet part quand W redescend à son niveau

Règle d'admission : un candidat accepté par l'amincissement rejoint la
file ssi Y ≥ W(t−) et L(t−) < k + 1 (la salle est testée en premier).
En cas d'égalité de dates, la fin de service passe avant l'arrivée.

Pilotes :
    run_busy_period      — de W(0) = x jusqu'à τ (premier zéro)
    run_cycle            — de W(0) = 0 jusqu'à ξ (premier nκ, n ≥ 1, avec W(nκ) = 0)
    run_horizon          — moyenne temporelle de g∘W sur [0, T]
    run_until_long_idle  — jusqu'à la première inactivité plus longue que κ
"""

import csv
import io
import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..config import get_settings
from .errors import SimulationError
from .model import (
    CostFunction, QueueSpec, make_segment_integrator, validate_spec,
)
from .models import (
    EventKind, EventRecord, FunctionalSample, HorizonAverage,
    LongIdleDecomposition, WorkloadPath,
)
from .streams import CandidateStream, ReplicationStreams

logger = logging.getLogger("queue_bounds.simulator")

_JOIN = EventKind.JOIN.value
_BALK_P = EventKind.BALK_PATIENCE.value
_BALK_R = EventKind.BALK_ROOM.value
_DONE = EventKind.COMPLETION.value
_EMPTY = EventKind.EMPTY_HIT.value
_CYCLE = EventKind.CYCLE_END.value


@dataclass(frozen=True)
class SimCaps:
    """Plafonds par réplication : nombre de candidats traités et temps simulé."""
    max_events: int = 10_000_000
    max_time: float = 1e7

    @classmethod
    def from_settings(cls) -> "SimCaps":
        s = get_settings()
        return cls(max_events=s.sim_max_events, max_time=s.sim_max_time)


# =============================================================================
# Moteur
# =============================================================================

class QueueEngine:
    """
    État d'une file pendant une réplication.

    Attributes:
        t_ref, w_ref: référence de la charge (dernière admission)
        A: ∫ g∘W dt accumulée jusqu'à t_ref
        A_busy: part de A due aux seules périodes d'activité
        A_star: Σ g(W(t−)) sur les admissions
        A_star_inner: idem, hors admissions qui ouvrent une période d'activité
        eta: nombre d'admissions
    """

    def __init__(self, spec: QueueSpec, g: CostFunction, x: float = 0.0, record: bool = False):
        self.lcfs = spec.discipline.kind == "lcfs-pr"
        self.capacity = spec.discipline.capacity
        self.seg = make_segment_integrator(g)
        self.gf = g.compile()
        self.g0 = self.gf(0.0)
        self.x = float(x)
        self.t_ref = 0.0
        self.w_ref = float(x)
        # FCFS : instants de départ ; LCFS-PR : niveaux (sommet à droite)
        self.present: deque = deque()
        if x > 0:
            self.present.append(0.0 if self.lcfs else self.w_ref)
        self.A = 0.0
        self.A_busy = 0.0
        self.A_star = 0.0
        self.A_star_inner = 0.0
        self.eta = 0
        self.balk_patience = 0
        self.balk_room = 0
        self.events: Optional[list[EventRecord]] = [] if record else None

    # ── Lecture de l'état ─────────────────────────────────────

    def workload(self, t: float) -> float:
        w = self.w_ref - (t - self.t_ref)
        return w if w > 0.0 else 0.0

    @property
    def empty_at(self) -> float:
        """Instant où W atteint 0 si aucune admission n'intervient."""
        return self.t_ref + self.w_ref

    def queue_length(self) -> int:
        return len(self.present)

    # ── Fins de service ───────────────────────────────────────

    def _complete_until(self, t: float, w: float) -> None:
        """Retire les clients partis à t au plus tard (fins de service d'abord)."""
        present, events = self.present, self.events
        if self.lcfs:
            while present and present[-1] >= w:
                level = present.pop()
                if events is not None:
                    events.append(EventRecord(self.t_ref + (self.w_ref - level), _DONE,
                                              level, 0.0, len(present) + 1))
        else:
            while present and present[0] <= t:
                d = present.popleft()
                if events is not None:
                    events.append(EventRecord(d, _DONE, self.workload(d), 0.0, len(present) + 1))
        if w == 0.0 and present:
            present.clear()

    def _log_empty(self) -> None:
        if self.events is not None and self.w_ref > 0.0:
            self.events.append(EventRecord(self.empty_at, _EMPTY, 0.0, 0.0, 0))

    # ── Arrivée acceptée ──────────────────────────────────────

    def offer(self, t: float, s: float, y: float) -> str:
        """Traite une arrivée (après amincissement) ; retourne le type d'événement."""
        d = t - self.t_ref
        w = self.w_ref - d
        idle = -w
        if w <= 0.0:
            w = 0.0
        self._complete_until(t, w)
        l_pre = len(self.present)
        events = self.events

        if l_pre >= self.capacity:
            self.balk_room += 1
            if events is not None:
                events.append(EventRecord(t, _BALK_R, w, 0.0, l_pre, y))
            return _BALK_R
        if y < w:
            self.balk_patience += 1
            if events is not None:
                events.append(EventRecord(t, _BALK_P, w, 0.0, l_pre, y))
            return _BALK_P

        # ── Admission : intégrale exacte du segment [t_ref, t] ──
        if idle > 0.0:
            busy_part = self.seg(self.w_ref, 0.0)
            self.A += busy_part + self.g0 * idle
            self._log_empty()
        else:
            busy_part = self.seg(self.w_ref, w)
            self.A += busy_part
        self.A_busy += busy_part
        gw = self.gf(w)
        self.A_star += gw
        if w > 0.0:
            self.A_star_inner += gw
        self.eta += 1
        if events is not None:
            events.append(EventRecord(t, _JOIN, w, s, l_pre, y))
        self.t_ref = t
        self.w_ref = w + s
        if self.lcfs:
            self.present.append(w)
        else:
            self.present.append(t + self.w_ref)
        return _JOIN

    # ── Clôtures ──────────────────────────────────────────────

    def integral_to(self, t: float) -> float:
        """A + ∫_{t_ref}^{t} g∘W, sans modifier l'état."""
        d = t - self.t_ref
        if d >= self.w_ref:
            return self.A + self.seg(self.w_ref, 0.0) + self.g0 * (d - self.w_ref)
        return self.A + self.seg(self.w_ref, self.w_ref - d)

    def close(self, t: float, kind: Optional[str] = None) -> None:
        """Journalise les fins de service jusqu'à t, puis l'événement final."""
        w = 0.0 if kind == _EMPTY else self.workload(t)
        self._complete_until(t, w)
        if self.events is not None:
            if w == 0.0 and self.w_ref > 0.0 and kind != _EMPTY:
                self.events.append(EventRecord(self.empty_at, _EMPTY, 0.0, 0.0, 0))
            if kind is not None:
                self.events.append(EventRecord(t, kind, w, 0.0, len(self.present)))

    def path(self, end_time: float, end_reason: str, cap: bool, spec: QueueSpec) -> WorkloadPath:
        return WorkloadPath(
            x=self.x, events=self.events or [], end_time=end_time, end_reason=end_reason,
            cap_exceeded=cap, room=spec.discipline.room, discipline=spec.discipline.kind,
        )

    def sample(self, replication_id: int, horizon_kind: str, duration: float, A: float,
               end_reason: str, cap: bool, cycle_index: Optional[int] = None) -> FunctionalSample:
        return FunctionalSample(
            replication_id=replication_id, horizon_kind=horizon_kind, x=self.x,
            duration=duration, A=A, A_star=self.A_star, eta_star=self.eta,
            balk_patience=self.balk_patience, balk_room=self.balk_room,
            cycle_index=cycle_index, end_reason=end_reason, cap_exceeded=cap,
        )


# =============================================================================
# Outils
# =============================================================================

def initial_workload(spec: QueueSpec, streams: ReplicationStreams) -> float:
    """x selon l'état initial (x ~ G tiré sur la voie auxiliary)."""
    init = spec.init
    if init.kind == "deterministic":
        return float(init.x)
    if init.kind == "random":
        u = streams.auxiliary.generator.random()
        return float(spec.joint.service.ppf(np.array([max(u, np.finfo(float).tiny)]))[0])
    return 0.0


def first_multiple(b: float, kappa: float) -> int:
    """Plus petit n ≥ 1 tel que nκ ≥ b."""
    n = max(1, math.ceil(b / kappa))
    if n * kappa < b:
        n += 1
    return n


def _regeneration(b: float, kappa: float, t_next: float, accepted: bool) -> Optional[int]:
    """
    n si W(nκ) = 0 pour le premier nκ ≥ b de l'intervalle d'inactivité
    [b, t_next), ou [b, t_next] si le candidat en t_next est refusé.
    """
    n = first_multiple(b, kappa)
    xi = n * kappa
    if xi < t_next or (xi == t_next and not accepted):
        return n
    return None


def _cap_hit(cands: CandidateStream, t: float, caps: SimCaps) -> bool:
    return cands.produced > caps.max_events or t > caps.max_time


# =============================================================================
# Pilotes
# =============================================================================

def run_busy_period(spec: QueueSpec, g: CostFunction, streams: ReplicationStreams,
                    caps: Optional[SimCaps] = None, record: bool = False,
                    validate: bool = True) -> tuple[WorkloadPath, FunctionalSample]:
    """Période d'activité depuis W(0) = x jusqu'au premier zéro τ."""
    if validate:
        validate_spec(spec, "busy-period", g)
    caps = caps or SimCaps.from_settings()
    x = initial_workload(spec, streams)
    eng = QueueEngine(spec, g, x, record)
    cands = CandidateStream(streams, spec.rate, spec.joint)

    while True:
        tau = eng.t_ref + eng.w_ref
        cand = cands.next()
        if cand is None or cand[0] >= tau:
            eng.close(tau, _EMPTY)
            sample = eng.sample(streams.replication_id, "busy-period", tau,
                                eng.A + eng.seg(eng.w_ref, 0.0), "tau-hit", False)
            return eng.path(tau, "tau-hit", False, spec), sample
        t = cand[0]
        if _cap_hit(cands, t, caps):
            logger.warning("rep %d : plafond atteint à t=%.6g (%d candidats)",
                           streams.replication_id, t, cands.produced)
            eng.close(t)
            sample = eng.sample(streams.replication_id, "busy-period", t,
                                eng.integral_to(t), "horizon", True)
            return eng.path(t, "horizon", True, spec), sample
        if cand[1]:
            eng.offer(t, cand[2], cand[3])


def run_cycle(spec: QueueSpec, g: CostFunction, streams: ReplicationStreams,
              caps: Optional[SimCaps] = None, record: bool = False,
              validate: bool = True) -> tuple[WorkloadPath, FunctionalSample]:
    """Cycle régénératif depuis une file vide jusqu'à ξ = nκ (n ≥ 1)."""
    if validate:
        validate_spec(spec, "cycle", g)
    caps = caps or SimCaps.from_settings()
    kappa = spec.rate.kappa
    eng = QueueEngine(spec, g, 0.0, record)
    cands = CandidateStream(streams, spec.rate, spec.joint)

    while True:
        b = eng.t_ref + eng.w_ref
        cand = cands.next()
        t_next, accepted = (math.inf, False) if cand is None else (cand[0], cand[1])
        if t_next >= b:
            n = _regeneration(b, kappa, t_next, accepted)
            if n is not None:
                xi = n * kappa
                A = eng.A + eng.seg(eng.w_ref, 0.0) + eng.g0 * (xi - b)
                eng.close(xi, _CYCLE)
                sample = eng.sample(streams.replication_id, "cycle", xi, A, "cycle-end", False, n)
                return eng.path(xi, "cycle-end", False, spec), sample
        if _cap_hit(cands, t_next, caps):
            logger.warning("rep %d : cycle non terminé à t=%.6g (instabilité probable)",
                           streams.replication_id, t_next)
            eng.close(t_next)
            sample = eng.sample(streams.replication_id, "cycle", t_next,
                                eng.integral_to(t_next), "horizon", True)
            return eng.path(t_next, "horizon", True, spec), sample
        if accepted:
            eng.offer(t_next, cand[2], cand[3])


def run_horizon(spec: QueueSpec, T: float, g: CostFunction, streams: ReplicationStreams,
                caps: Optional[SimCaps] = None, record: bool = False,
                validate: bool = True) -> tuple[WorkloadPath, HorizonAverage]:
    """Moyenne temporelle de g∘W sur [0, T] et état en T."""
    if T <= 0:
        raise SimulationError(f"horizon T={T} ≤ 0", "invalid-horizon")
    if validate:
        validate_spec(spec, "horizon", g)
    caps = caps or SimCaps.from_settings()
    eng = QueueEngine(spec, g, initial_workload(spec, streams), record)
    cands = CandidateStream(streams, spec.rate, spec.joint)
    cap = False
    end = T
    while True:
        cand = cands.next()
        if cand is None or cand[0] > T:
            break
        if cands.produced > caps.max_events:
            cap, end = True, cand[0]
            logger.warning("rep %d : plafond d'événements atteint à t=%.6g",
                           streams.replication_id, end)
            break
        if cand[1]:
            eng.offer(cand[0], cand[2], cand[3])
    integral = eng.integral_to(end)
    eng.close(end)
    result = HorizonAverage(
        replication_id=streams.replication_id, horizon=end, time_average=integral / end,
        integral=integral, end_workload=eng.workload(end), end_queue_length=eng.queue_length(),
        A_star=eng.A_star, eta_star=eng.eta, balk_patience=eng.balk_patience,
        balk_room=eng.balk_room, cap_exceeded=cap,
    )
    return eng.path(end, "horizon", cap, spec), result


def run_until_long_idle(spec: QueueSpec, g: CostFunction, streams: ReplicationStreams,
                        caps: Optional[SimCaps] = None,
                        validate: bool = True) -> LongIdleDecomposition:
    """
    Simule depuis une file vide jusqu'à la première période d'inactivité
    de longueur > κ ; relève au passage le cycle ξ du même chemin.
    """
    if validate:
        validate_spec(spec, "cycle", g)
    caps = caps or SimCaps.from_settings()
    kappa = spec.rate.kappa
    eng = QueueEngine(spec, g, 0.0, False)
    cands = CandidateStream(streams, spec.rate, spec.joint)
    rid = streams.replication_id

    idle_lengths: list[float] = []
    busy_lengths: list[float] = []
    busy_integrals: list[float] = []
    busy_star: list[float] = []
    busy_start = None
    mark_busy = mark_star = 0.0
    cycle: Optional[FunctionalSample] = None

    def close_busy(b: float) -> None:
        busy_lengths.append(b - busy_start)
        busy_integrals.append(eng.A_busy + eng.seg(eng.w_ref, 0.0) - mark_busy)
        busy_star.append(eng.A_star_inner - mark_star)

    while True:
        b = eng.t_ref + eng.w_ref
        cand = cands.next()
        t_next, accepted = (math.inf, False) if cand is None else (cand[0], cand[1])
        idle_now = t_next >= b
        if idle_now and cycle is None:
            n = _regeneration(b, kappa, t_next, accepted)
            if n is not None:
                xi = n * kappa
                cycle = eng.sample(rid, "cycle", xi,
                                   eng.A + eng.seg(eng.w_ref, 0.0) + eng.g0 * (xi - b),
                                   "cycle-end", False, n)
        if idle_now and t_next - b > kappa:
            if busy_start is not None:
                close_busy(b)
            iota = len(idle_lengths) + 1
            zeta = first_multiple(b, kappa) * kappa
            return LongIdleDecomposition(
                replication_id=rid, idle_lengths=idle_lengths, busy_lengths=busy_lengths,
                busy_integrals=busy_integrals, busy_integrals_star=busy_star,
                long_idle_start=b, iota=iota, zeta=zeta,
                A_bar=iota * kappa * eng.g0 + math.fsum(busy_integrals),
                A_bar_star=iota * eng.g0 + math.fsum(busy_star),
                A_to_zeta=eng.A + eng.seg(eng.w_ref, 0.0) + eng.g0 * (zeta - b),
                cycle=cycle,
            )
        if _cap_hit(cands, t_next, caps):
            logger.warning("rep %d : pas d'inactivité > κ avant t=%.6g", rid, t_next)
            return LongIdleDecomposition(
                replication_id=rid, idle_lengths=idle_lengths, busy_lengths=busy_lengths,
                busy_integrals=busy_integrals, busy_integrals_star=busy_star,
                long_idle_start=b, iota=len(idle_lengths) + 1, zeta=math.inf,
                A_bar=math.inf, A_bar_star=math.inf, A_to_zeta=eng.integral_to(t_next),
                cycle=cycle, end_reason="horizon", cap_exceeded=True,
            )
        if accepted:
            if idle_now:
                # Fin de I^i (≤ κ) et ouverture de B^i
                if busy_start is not None:
                    close_busy(b)
                idle_lengths.append(t_next - b)
                busy_start = t_next
                mark_busy = eng.A_busy + eng.seg(eng.w_ref, 0.0)
                mark_star = eng.A_star_inner
            eng.offer(t_next, cand[2], cand[3])


# =============================================================================
# Audits et diagnostics
# =============================================================================

def replay_decisions(path: WorkloadPath, spec: QueueSpec) -> list[int]:
    """
    Rejoue les arrivées d'une trajectoire enregistrée contre sa spec et
    retourne les indices (dans path.arrivals()) dont la décision diffère.
    """
    eng = QueueEngine(spec, CostFunction.one(), path.x, False)
    mismatches = []
    for i, e in enumerate(path.arrivals()):
        w_pre = eng.workload(e.time)
        kind = eng.offer(e.time, e.jump, e.patience)
        if kind != e.kind or w_pre != e.w_pre:
            mismatches.append(i)
    return mismatches


TRACE_COLUMNS = ("time", "kind", "W_pre", "jump", "L_pre")


def trace_csv(path: WorkloadPath) -> str:
    """Journal d'événements au format CSV (une ligne par événement)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for e in path.events:
        writer.writerow((repr(e.time), e.kind, repr(e.w_pre), repr(e.jump), e.l_pre))
    return buf.getvalue()


def one_step_drift(spec: QueueSpec, x: float, reps: int, seed: int,
                   caps: Optional[SimCaps] = None) -> dict:
    """
    Estimation Monte Carlo de E[W(1;x)] − x + 1 pour λ constant, avec la
    borne λ_h·E[S]·(1 − H(x − 1)).
    """
    start = spec.model_copy(update={"init": spec.init.at(x)})
    g = CostFunction.one()
    values = np.empty(reps)
    for rep in range(reps):
        _, res = run_horizon(start, 1.0, g, ReplicationStreams(seed, rep), caps, validate=rep == 0)
        values[rep] = res.end_workload - x + 1.0
    joint = spec.joint
    bound = spec.rate.lambda_h * joint.service.mean() * float(1.0 - joint.patience_cdf(x - 1.0))
    se = float(values.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    estimate = float(values.mean())
    return {
        "x": x, "estimate": estimate, "standard_error": se, "bound": bound,
        "reps": reps, "ok": estimate <= bound + 3.0 * se,
    }
