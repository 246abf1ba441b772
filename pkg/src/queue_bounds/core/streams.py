# -*- coding: utf-8 -*-
"""
Flux aléatoires adressables par réplication et arrivées par amincissement.

Chaque triplet (seed, replication_id, lane) — plus un indice de bras pour
les lots indépendants — alimente un générateur Philox (à compteur, donc
sans coordination entre threads) via une SeedSequence dont la clé de
dérivation est (replication_id, arm, lane). Même triplet ⇒ même suite de
variables, quel que soit l'ordonnancement.

Voies :
    arrivals   — écarts exponentiels des candidats au taux λ_h
    acceptance — uniformes d'acceptation λ(t)/λ_h
    marks      — couples (S, Y) attachés à CHAQUE candidat, accepté ou non
    auxiliary  — tirages annexes (x ~ G, indices géométriques, bootstrap)

Les marques étant indexées par l'ordre des candidats, deux files de même
λ_h tirées sur les mêmes voies voient exactement les mêmes (S, Y) pour les
arrivées qu'elles partagent : c'est le couplage par amincissement.
"""

import enum
import logging
import math
from typing import Optional

import numpy as np

from .errors import StreamError
from .model import JointLaw, RateFunction

logger = logging.getLogger("queue_bounds.streams")

DEFAULT_BLOCK = 256


class Lane(enum.IntEnum):
    ARRIVALS = 0
    ACCEPTANCE = 1
    MARKS = 2
    AUXILIARY = 3

    @property
    def label(self) -> str:
        return self.name.lower()


class RandomStream:
    """
    Sous-flux indépendant d'une réplication.

    Attributes:
        seed: graine maîtresse 64 bits
        replication_id: identifiant de réplication
        lane: voie (Lane)
        arm: indice de bras (0 pour les bras couplés)
    """

    __slots__ = ("seed", "replication_id", "lane", "arm", "generator")

    def __init__(self, seed: int, replication_id: int, lane: Lane, arm: int = 0):
        if seed < 0 or replication_id < 0:
            raise StreamError("seed et replication_id doivent être ≥ 0", "invalid-seed")
        self.seed = int(seed)
        self.replication_id = int(replication_id)
        self.lane = Lane(lane)
        self.arm = int(arm)
        seq = np.random.SeedSequence(entropy=self.seed,
                                     spawn_key=(self.replication_id, self.arm, int(self.lane)))
        self.generator = np.random.Generator(np.random.Philox(seq))

    def __repr__(self) -> str:
        return (f"RandomStream(seed={self.seed}, rep={self.replication_id}, "
                f"lane={self.lane.label}, arm={self.arm})")


class ReplicationStreams:
    """Les quatre voies d'une réplication, créées à la demande."""

    def __init__(self, seed: int, replication_id: int, arm: int = 0):
        self.seed = int(seed)
        self.replication_id = int(replication_id)
        self.arm = int(arm)
        self._lanes: dict[Lane, RandomStream] = {}

    def lane(self, lane: Lane) -> RandomStream:
        stream = self._lanes.get(lane)
        if stream is None:
            stream = RandomStream(self.seed, self.replication_id, lane, self.arm)
            self._lanes[lane] = stream
        return stream

    @property
    def arrivals(self) -> RandomStream:
        return self.lane(Lane.ARRIVALS)

    @property
    def acceptance(self) -> RandomStream:
        return self.lane(Lane.ACCEPTANCE)

    @property
    def marks(self) -> RandomStream:
        return self.lane(Lane.MARKS)

    @property
    def auxiliary(self) -> RandomStream:
        return self.lane(Lane.AUXILIARY)

    def fresh(self) -> "ReplicationStreams":
        """Mêmes adresses, suites remises à zéro (rejouer un bras couplé)."""
        return ReplicationStreams(self.seed, self.replication_id, self.arm)


# =============================================================================
# Candidats au taux λ_h, amincis au taux λ(·)
# =============================================================================

class CandidateStream:
    """
    Suite des candidats (T_i, accepté_i, S_i, Y_i) d'une réplication.

    Les candidats forment un Poisson homogène de taux λ_h ; le candidat i
    est accepté si U_i < λ(T_i)/λ_h. Les tirages se font par blocs
    vectorisés, la consommation de chaque voie ne dépend que du nombre de
    candidats produits.
    """

    def __init__(self, streams: ReplicationStreams, rate: RateFunction,
                 joint: Optional[JointLaw] = None, t0: float = 0.0, block: int = DEFAULT_BLOCK):
        self.rate = rate
        self.joint = joint
        self.lambda_h = float(rate.lambda_h)
        self.block = int(block)
        self._arr = streams.arrivals.generator
        self._acc = streams.acceptance.generator
        self._marks = streams.marks.generator
        self._t = float(t0)
        self._times: list[float] = []
        self._accept: list[bool] = []
        self._s: list[float] = []
        self._y: list[float] = []
        self._i = 0
        self.produced = 0

    @property
    def exhausted(self) -> bool:
        """Aucun candidat possible (λ_h = 0)."""
        return self.lambda_h <= 0.0

    def _refill(self) -> None:
        n = self.block
        gaps = self._arr.standard_exponential(n) / self.lambda_h
        times = np.cumsum(np.concatenate(([self._t], gaps)))[1:]
        u = self._acc.random(n)
        ratio = self.rate.evaluate(times) / self.lambda_h
        self._times = times.tolist()
        self._accept = (u < ratio).tolist()
        if self.joint is not None:
            s, y = self.joint.sample_block(self._marks, n)
            self._s, self._y = s.tolist(), y.tolist()
        else:
            self._s = self._y = [math.nan] * n
        self._t = self._times[-1]
        self._i = 0

    def next(self) -> Optional[tuple[float, bool, float, float]]:
        """Candidat suivant, ou None si λ_h = 0."""
        if self.exhausted:
            return None
        if self._i >= len(self._times):
            self._refill()
        i = self._i
        self._i += 1
        self.produced += 1
        return self._times[i], self._accept[i], self._s[i], self._y[i]

    def candidates_until(self, horizon: float) -> list[tuple[float, bool, float, float]]:
        """Tous les candidats ≤ horizon (le suivant est perdu)."""
        out = []
        while True:
            cand = self.next()
            if cand is None or cand[0] > horizon:
                return out
            out.append(cand)


def next_arrival(streams: ReplicationStreams, rate: RateFunction,
                 t_now: float, horizon: float) -> Optional[float]:
    """
    Premier instant d'arrivée acceptée dans (t_now, horizon], ou None.

    Tire les candidats un par un : les voies ne consomment que ce qui est
    examiné, des appels successifs sur les mêmes flux poursuivent la suite.
    λ_h = 0 est dégénéré : None immédiatement.
    """
    if t_now < 0 or horizon <= t_now:
        raise StreamError(f"fenêtre invalide ({t_now}, {horizon}]", "invalid-window")
    if rate.lambda_h <= 0:
        logger.debug("λ_h = 0 : aucune arrivée")
        return None
    cands = CandidateStream(streams, rate, None, t0=t_now, block=1)
    while True:
        t, accepted, _, _ = cands.next()
        if t > horizon:
            return None
        if accepted:
            return t


def sample_joint(stream: RandomStream, joint: JointLaw) -> tuple[float, float]:
    """Un tirage (S, Y) de Ψ sur la voie marks."""
    if stream.lane != Lane.MARKS:
        raise StreamError(f"sample_joint exige la voie marks, reçu {stream.lane.label}", "wrong-lane")
    s, y = joint.sample_block(stream.generator, 1)
    return float(s[0]), float(y[0])


def count_arrivals(streams: ReplicationStreams, rate: RateFunction, horizon: float) -> tuple[int, int]:
    """(candidats, acceptés) sur [0, horizon] — rejoue les voies depuis le début."""
    if rate.lambda_h <= 0:
        return 0, 0
    cands = CandidateStream(streams.fresh(), rate, None).candidates_until(horizon)
    return len(cands), sum(1 for c in cands if c[1])
