# -*- coding: utf-8 -*-
"""
Modèles de résultats — structures échangées entre les services
(simulator, coupling, stats, bounds, experiments) et sérialisées en
JSON/CSV dans le répertoire de sortie d'une exécution.

Les enregistrements d'événements sont des dataclasses à slots : il s'en
crée un par événement quand la trace est demandée. Tout le reste est
Pydantic, sérialisable tel quel dans summary.json et manifest.json.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Literal, Optional

from pydantic import BaseModel, Field


# =============================================================================
# Événements et trajectoires
# =============================================================================

class EventKind(str, Enum):
    JOIN = "join"
    BALK_PATIENCE = "balk-patience"
    BALK_ROOM = "balk-room"
    COMPLETION = "service-completion"
    EMPTY_HIT = "empty-hit"
    CYCLE_END = "cycle-end"


@dataclass(frozen=True, slots=True)
class EventRecord:
    """
    Un événement de la trajectoire.

    w_pre = W(t−), l_pre = L(t−) ; jump = S pour un client qui rejoint,
    0 sinon. patience = Y pour les arrivées (join/balk), +∞ ailleurs.
    """
    time: float
    kind: str
    w_pre: float
    jump: float = 0.0
    l_pre: int = 0
    patience: float = math.inf


EndReason = Literal["tau-hit", "cycle-end", "long-idle", "horizon"]


@dataclass(slots=True)
class WorkloadPath:
    """
    Trajectoire affine par morceaux de la charge de travail.

    Entre deux événements, W décroît à vitesse 1, plancher 0 :
    W(t) = max(W(t_i) − (t − t_i), 0).
    """
    x: float
    events: list[EventRecord] = field(default_factory=list)
    end_time: float = 0.0
    end_reason: str = "tau-hit"
    cap_exceeded: bool = False
    room: Optional[int] = None
    discipline: str = "fcfs"

    def joins(self) -> list[EventRecord]:
        return [e for e in self.events if e.kind == EventKind.JOIN.value]

    def arrivals(self) -> list[EventRecord]:
        kinds = (EventKind.JOIN.value, EventKind.BALK_PATIENCE.value, EventKind.BALK_ROOM.value)
        return [e for e in self.events if e.kind in kinds]

    def workload_at(self, t: float) -> float:
        """W(t) reconstruit à partir des arrivées (continuité à droite)."""
        w, t_ref = self.x, 0.0
        for e in self.events:
            if e.time > t:
                break
            if e.kind == EventKind.JOIN.value:
                w = max(w - (e.time - t_ref), 0.0) + e.jump
                t_ref = e.time
        return max(w - (t - t_ref), 0.0)


# =============================================================================
# Fonctionnelles par réplication
# =============================================================================

class FunctionalSample(BaseModel):
    """
    Fonctionnelles d'une réplication.

    duration = τ (busy-period), ξ (cycle) ou T (horizon) ; A = ∫ g∘W dt ;
    A_star = Σ_{joins} g(W(t−)) ; eta_star = nombre de clients admis.
    """
    replication_id: int = 0
    horizon_kind: Literal["busy-period", "cycle", "horizon"] = "busy-period"
    x: float = 0.0
    duration: float = 0.0
    A: float = 0.0
    A_star: float = 0.0
    eta_star: int = 0
    balk_patience: int = 0
    balk_room: int = 0
    cycle_index: Optional[int] = None          # n tel que ξ = nκ
    end_reason: str = "tau-hit"
    cap_exceeded: bool = False

    def same_values(self, other: "FunctionalSample") -> bool:
        """Égalité bit à bit des fonctionnelles (hors identifiant)."""
        keys = ("duration", "A", "A_star", "eta_star", "balk_patience", "balk_room")
        return all(getattr(self, k) == getattr(other, k) for k in keys)


class HorizonAverage(BaseModel):
    """Moyenne temporelle de g∘W sur [0, T] et état final."""
    replication_id: int = 0
    horizon: float
    time_average: float
    integral: float
    end_workload: float
    end_queue_length: int
    A_star: float = 0.0
    eta_star: int = 0
    balk_patience: int = 0
    balk_room: int = 0
    cap_exceeded: bool = False


class LongIdleDecomposition(BaseModel):
    """
    Décomposition jusqu'à la première période d'inactivité plus longue que κ.

    iota = indice (à partir de 1) de cette période ; zeta = premier multiple
    de κ qu'elle contient ; A_bar = ι·κ·g(0) + Σ_{i<ι} ∫_{B^i} g∘W dt et
    A_bar_star = ι·g(0) + Σ_{i<ι} Σ_{joins ∈ B^i} g(W(t−)).
    """
    replication_id: int = 0
    idle_lengths: list[float] = Field(default_factory=list)     # I^i, i < ι
    busy_lengths: list[float] = Field(default_factory=list)     # B^i, i < ι
    busy_integrals: list[float] = Field(default_factory=list)
    busy_integrals_star: list[float] = Field(default_factory=list)
    long_idle_start: float = 0.0                                # début de I^ι (|I^ι| > κ)
    iota: int = 1
    zeta: float = 0.0
    A_bar: float = 0.0
    A_bar_star: float = 0.0
    A_to_zeta: float = 0.0
    cycle: Optional[FunctionalSample] = None
    end_reason: str = "long-idle"
    cap_exceeded: bool = False


# =============================================================================
# Couplages
# =============================================================================

PathwiseFlag = Literal["holds", "violated", "not-applicable"]


class CoupledPairSample(BaseModel):
    """Paire (λ, λ_h) simulée sur le même flux de candidats et de marques."""
    replication_id: int
    sample_lo: FunctionalSample
    sample_hi: FunctionalSample
    pathwise_dominance_ok: PathwiseFlag = "not-applicable"
    violations: int = 0
    first_violation_time: Optional[float] = None
    shared_marks_ok: bool = True
    label: str = "verified"


class RoomLadderSample(BaseModel):
    """Échelle de salles d'attente k partageant arrivées et marques."""
    replication_id: int
    ks: list[Optional[int]]
    samples: list[FunctionalSample]
    window: float
    K_of_u: int
    candidates_in_window: int
    convergence_ok: bool = True


# =============================================================================
# Statistiques
# =============================================================================

class DominanceVerdict(BaseModel):
    """Test unilatéral X ≤_st Z : « consistent » ou « rejected », jamais « prouvé »."""
    statistic: float
    critical_value: float
    alpha: float
    verdict: Literal["consistent", "rejected"]
    n_lower: int
    n_upper: int
    p_value: Optional[float] = None
    method: str = "smirnov-asymptotic"
    label: str = ""


class MomentEstimate(BaseModel):
    order: int
    estimate: float
    standard_error: float
    confidence: float = 0.95
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    n: int = 0
    running: list[tuple[int, float]] = Field(default_factory=list)
    relative_change: Optional[float] = None
    note: str = ""


class RatioEstimate(BaseModel):
    estimate: float
    standard_error: float
    method: str
    n_numerator: int
    n_denominator: int
    paired: bool


# =============================================================================
# Bornes
# =============================================================================

class StabilityReport(BaseModel):
    lambda_h: float
    mean_service: float
    rho_h: float
    p_inf: float
    rho_eff: float
    verdict: Literal["stable", "boundary", "unstable"]
    product_form: bool = True
    note: str = ""


class BoundResult(BaseModel):
    """Colonnes de la borne de décomposition géométrique (+ variantes Monte Carlo)."""
    u: list[float]
    J: list[float]
    J_star: Optional[list[float]] = None
    index_bound_cdf: Optional[list[float]] = None
    index_bound_star_cdf: Optional[list[float]] = None
    tail_variant_cdf: Optional[list[float]] = None
    p: float
    shift: float
    n_max: int
    residual: float
    lattice_width: float
    tolerance: float
    rounding: str = "up"


class TailReport(BaseModel):
    target: Literal["cycle", "joins", "busy-period"]
    quantiles: list[float]
    u: list[float]
    survival: list[float]
    reference: list[float]
    ratio: list[float]
    bound: float
    rho_h: float
    label: str = "trend check"


# =============================================================================
# Manifeste d'exécution
# =============================================================================

class OutputEntry(BaseModel):
    path: str
    sha256: str
    bytes: int


class RunManifest(BaseModel):
    """Tout ce qu'il faut pour rejouer une exécution à l'identique."""
    subcommand: str
    config_hash: str
    seed: int
    version: str
    started_at: str
    wall_clock_seconds: float
    threads: int = 1
    outputs: list[OutputEntry] = Field(default_factory=list)
    cap_incidents: list[int] = Field(default_factory=list)
    errored_replications: list[int] = Field(default_factory=list)
    config: dict = Field(default_factory=dict)
