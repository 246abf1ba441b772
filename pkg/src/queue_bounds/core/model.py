# -*- coding: utf-8 -*-
"""
Modèle déclaratif — taux d'arrivée, loi jointe (service, patience),
fonction de coût et description complète d'une file.

Tous les objets sont des modèles Pydantic gelés : une fois validés, ils
sont partagés sans copie entre réplications concurrentes.

Usage :
    from .model import RateFunction, Marginal, JointLaw, CostFunction, QueueSpec
    rate = RateFunction(kind="sinusoid", lambda_h=0.6, kappa=1.0, base=0.4, amplitude=0.2)
    spec = QueueSpec(rate=rate, joint=JointLaw.product_exp(1.0, 1.0),
                     init=Init(kind="empty"))
    validate_spec(spec, run_kind="cycle")

Les évaluateurs scalaires (compile()) servent la boucle d'événements ;
les évaluateurs vectoriels (evaluate, cdf, ppf) servent les tirages en
bloc et les tests.
"""

import bisect
import json
import math
from typing import Callable, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import integrate, special, stats

from .errors import ModelError, SimulationError, SpecError, SpecViolation


# ─────────────────────────────────────────────────────────────
# Constantes
# ─────────────────────────────────────────────────────────────

TWO_PI = 2.0 * math.pi
GRID_POINTS_PER_PERIOD = 10_000
RATE_TOLERANCE = 1e-9          # Tolérance relative sur 0 ≤ λ(t) ≤ λ_h
QUAD_EPSABS = 1e-9             # Tolérance absolue par segment (quadrature)
_TINY = np.finfo(float).tiny   # Remplace u = 0 pour garantir S > 0

RunKind = Literal["busy-period", "cycle", "horizon"]


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# =============================================================================
# RateFunction: intensité λ(·) bornée par λ_h
# =============================================================================

class RateFunction(_Frozen):
    """
    Intensité d'arrivée λ(t) ∈ [0, λ_h], éventuellement périodique (κ).

    - constant           : λ(t) = level
    - sinusoid           : λ(t) = base + amplitude·sin(2πt/κ + phase), κ obligatoire
    - piecewise-constant : levels[i] sur [breakpoints[i], breakpoints[i+1]),
                           le dernier morceau court jusqu'à κ (périodique) ou ∞
    """
    kind: Literal["constant", "sinusoid", "piecewise-constant"]
    lambda_h: float = Field(ge=0.0)
    kappa: Optional[float] = Field(default=None, gt=0.0)
    level: float = 0.0
    base: float = 0.0
    amplitude: float = 0.0
    phase: float = 0.0
    breakpoints: tuple[float, ...] = ()
    levels: tuple[float, ...] = ()

    @model_validator(mode="after")
    def _check_shape(self):
        if self.kind == "sinusoid" and self.kappa is None:
            raise ValueError("sinusoid: kappa (période) obligatoire")
        if self.kind == "piecewise-constant":
            if not self.breakpoints or len(self.breakpoints) != len(self.levels):
                raise ValueError("piecewise-constant: breakpoints et levels de même longueur non nulle")
            if self.breakpoints[0] != 0.0:
                raise ValueError("piecewise-constant: le premier breakpoint doit valoir 0")
            if any(b <= a for a, b in zip(self.breakpoints, self.breakpoints[1:])):
                raise ValueError("piecewise-constant: breakpoints strictement croissants")
        return self

    # ── Constructeurs courants ────────────────────────────────

    @classmethod
    def constant(cls, level: float, lambda_h: Optional[float] = None,
                 kappa: Optional[float] = None) -> "RateFunction":
        return cls(kind="constant", level=level,
                   lambda_h=level if lambda_h is None else lambda_h, kappa=kappa)

    @classmethod
    def sinusoid(cls, base: float, amplitude: float, lambda_h: float,
                 kappa: float = 1.0, phase: float = 0.0) -> "RateFunction":
        return cls(kind="sinusoid", base=base, amplitude=amplitude,
                   lambda_h=lambda_h, kappa=kappa, phase=phase)

    @property
    def periodic(self) -> bool:
        return self.kappa is not None

    def compile(self) -> Callable[[float], float]:
        """Évaluateur scalaire sans contrôle (boucle chaude)."""
        if self.kind == "constant":
            level = self.level
            return lambda t: level
        if self.kind == "sinusoid":
            base, amp, phase, omega = self.base, self.amplitude, self.phase, TWO_PI / self.kappa
            return lambda t: base + amp * math.sin(omega * t + phase)
        breaks, levels, kappa = list(self.breakpoints), list(self.levels), self.kappa

        def piecewise(t: float) -> float:
            if kappa is not None:
                t = math.fmod(t, kappa)
            return levels[bisect.bisect_right(breaks, t) - 1]
        return piecewise

    def evaluate(self, t) -> np.ndarray:
        """Évaluation vectorielle de λ sur un tableau de temps ≥ 0."""
        ts = np.asarray(t, dtype=float)
        if np.any(ts < 0):
            raise ModelError("temps négatif passé à λ(·)", "negative-time")
        if self.kind == "constant":
            return np.full_like(ts, self.level)
        if self.kind == "sinusoid":
            return self.base + self.amplitude * np.sin(TWO_PI * ts / self.kappa + self.phase)
        tm = np.fmod(ts, self.kappa) if self.kappa is not None else ts
        idx = np.searchsorted(np.asarray(self.breakpoints), tm, side="right") - 1
        return np.asarray(self.levels)[idx]

    def analytic_max(self) -> float:
        if self.kind == "constant":
            return self.level
        if self.kind == "sinusoid":
            return self.base + abs(self.amplitude)
        return max(self.levels)

    def analytic_min(self) -> float:
        if self.kind == "constant":
            return self.level
        if self.kind == "sinusoid":
            return self.base - abs(self.amplitude)
        return min(self.levels)

    def integral(self, t0: float, t1: float) -> float:
        """∫_{t0}^{t1} λ(t) dt (nombre moyen d'arrivées acceptées)."""
        if self.kind == "constant":
            return self.level * (t1 - t0)
        if self.kind == "sinusoid":
            omega = TWO_PI / self.kappa
            return self.base * (t1 - t0) - self.amplitude / omega * (
                math.cos(omega * t1 + self.phase) - math.cos(omega * t0 + self.phase))
        value, _ = integrate.quad(self.compile(), t0, t1, limit=500)
        return value


def eval_rate(rate: RateFunction, t: float) -> float:
    """λ(t) pour t ≥ 0 ; lève ModelError("negative-time") sinon."""
    if t < 0:
        raise ModelError(f"temps négatif: {t}", "negative-time")
    return rate.compile()(t)


# =============================================================================
# Marginal: loi univariée de S (service) ou Y (patience)
# =============================================================================

class Marginal(_Frozen):
    """
    Loi paramétrique, éventuellement avec un atome en +∞.

    Avec un atome de poids w, H(y) = (1 − w)·F(y) est une sous-distribution
    et lim(1 − H) = w. Le tirage par inversion place l'atome en haut de
    l'intervalle unité : u ≥ 1 − w ↦ +∞, sinon F⁻¹(u / (1 − w)).
    """
    family: Literal["exponential", "deterministic", "pareto", "uniform", "infinite"]
    rate: float = 1.0           # exponential
    value: float = 1.0          # deterministic
    alpha: float = 1.5          # pareto (indice de queue)
    x_m: float = 1.0            # pareto (échelle)
    low: float = 0.0            # uniform
    high: float = 1.0           # uniform
    atom_at_infinity: float = Field(default=0.0, ge=0.0, le=1.0)

    # ── Constructeurs ─────────────────────────────────────────

    @classmethod
    def exponential(cls, rate: float, atom_at_infinity: float = 0.0) -> "Marginal":
        return cls(family="exponential", rate=rate, atom_at_infinity=atom_at_infinity)

    @classmethod
    def deterministic(cls, value: float, atom_at_infinity: float = 0.0) -> "Marginal":
        return cls(family="deterministic", value=value, atom_at_infinity=atom_at_infinity)

    @classmethod
    def pareto(cls, alpha: float, x_m: float = 1.0) -> "Marginal":
        return cls(family="pareto", alpha=alpha, x_m=x_m)

    @classmethod
    def uniform(cls, low: float, high: float) -> "Marginal":
        return cls(family="uniform", low=low, high=high)

    @classmethod
    def infinite(cls) -> "Marginal":
        return cls(family="infinite", atom_at_infinity=1.0)

    # ── Lois scipy ────────────────────────────────────────────

    def _law(self):
        """Loi scipy gelée de la partie finie (None si déterministe/infinie)."""
        if self.family == "exponential":
            return stats.expon(scale=1.0 / self.rate)
        if self.family == "pareto":
            return stats.pareto(b=self.alpha, scale=self.x_m)
        if self.family == "uniform":
            return stats.uniform(loc=self.low, scale=self.high - self.low)
        return None

    @property
    def survival_limit(self) -> float:
        """lim_{y→∞} (1 − F(y)) = poids de l'atome en +∞."""
        return 1.0 if self.family == "infinite" else self.atom_at_infinity

    def is_valid_support(self) -> bool:
        """Support contenu dans (0, ∞]."""
        if self.family == "exponential":
            return self.rate > 0
        if self.family == "deterministic":
            return self.value > 0
        if self.family == "pareto":
            return self.alpha > 0 and self.x_m > 0
        if self.family == "uniform":
            return 0 <= self.low < self.high
        return True

    def cdf(self, y) -> np.ndarray:
        ys = np.asarray(y, dtype=float)
        if self.family == "infinite":
            return np.zeros_like(ys)
        if self.family == "deterministic":
            base = (ys >= self.value).astype(float)
        else:
            base = self._law().cdf(ys)
        return (1.0 - self.atom_at_infinity) * base

    def sf(self, y) -> np.ndarray:
        return 1.0 - self.cdf(y)

    def ppf(self, u) -> np.ndarray:
        """Inverse généralisée, atome en +∞ compris."""
        us = np.asarray(u, dtype=float)
        out = np.full(us.shape, np.inf)
        if self.family == "infinite":
            return out
        w = self.atom_at_infinity
        finite = us < 1.0 - w
        scaled = us[finite] / (1.0 - w)
        if self.family == "deterministic":
            out[finite] = self.value
        else:
            out[finite] = self._law().ppf(scaled)
        return out

    def mean(self) -> float:
        return self.moment(1)

    def moment(self, m: int) -> float:
        """E[X^m] (∞ si l'atome est non nul ou si le moment diverge)."""
        if self.survival_limit > 0:
            return math.inf
        if self.family == "deterministic":
            return float(self.value) ** m
        if self.family == "pareto" and m >= self.alpha:
            return math.inf
        return float(self._law().moment(m))


# =============================================================================
# JointLaw: loi jointe Ψ de (S, Y)
# =============================================================================

class JointLaw(_Frozen):
    """
    Loi bivariée Ψ de (service S, patience Y) sur (0,∞)×(0,∞].

    - product           : S ⟂ Y
    - comonotone        : même uniforme pour S et Y, ou Y = φ(S) = phi_scale·S^phi_power
    - gaussian-copula   : copule gaussienne de corrélation `correlation`
    - infinite-patience : Y ≡ +∞ (tous les clients rejoignent la file)

    Chaque tirage consomme exactement deux uniformes de la voie `marks`,
    quel que soit le type : l'alignement des marques entre bras couplés
    ne dépend donc pas de Ψ.
    """
    kind: Literal["product", "comonotone", "gaussian-copula", "infinite-patience"]
    service: Marginal
    patience: Optional[Marginal] = None
    correlation: float = 0.0
    phi_scale: Optional[float] = None
    phi_power: float = 1.0

    @model_validator(mode="after")
    def _check_shape(self):
        if self.kind in ("product", "gaussian-copula") and self.patience is None:
            raise ValueError(f"{self.kind}: loi de patience obligatoire")
        if self.kind == "comonotone" and self.patience is None and self.phi_scale is None:
            raise ValueError("comonotone: patience ou phi_scale obligatoire")
        if self.kind == "gaussian-copula" and not -1.0 < self.correlation < 1.0:
            raise ValueError("gaussian-copula: correlation dans (-1, 1)")
        return self

    # ── Constructeurs ─────────────────────────────────────────

    @classmethod
    def product_exp(cls, service_rate: float = 1.0, patience_rate: float = 1.0) -> "JointLaw":
        return cls(kind="product", service=Marginal.exponential(service_rate),
                   patience=Marginal.exponential(patience_rate))

    @classmethod
    def infinite_patience(cls, service: Marginal) -> "JointLaw":
        return cls(kind="infinite-patience", service=service)

    def all_join(self) -> "JointLaw":
        """Variante Ψ_∞ : même G, patience infinie."""
        return JointLaw.infinite_patience(self.service)

    # ── Propriétés ────────────────────────────────────────────

    @property
    def product_form(self) -> bool:
        return self.kind in ("product", "infinite-patience")

    @property
    def survival_limit(self) -> float:
        """p_∞ = lim(1 − H)."""
        if self.kind == "infinite-patience":
            return 1.0
        if self.patience is None:
            return 0.0   # Y = φ(S) fini
        return self.patience.survival_limit

    def patience_cdf(self, y) -> np.ndarray:
        """H(y), sous-distribution si atome en +∞."""
        ys = np.asarray(y, dtype=float)
        if self.kind == "infinite-patience":
            return np.zeros_like(ys)
        if self.patience is not None:
            return self.patience.cdf(ys)
        inv = np.power(np.maximum(ys, 0.0) / self.phi_scale, 1.0 / self.phi_power)
        return self.service.cdf(inv)

    # ── Tirage ────────────────────────────────────────────────

    def sample_block(self, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
        """n tirages iid de Ψ → (S, Y), Y pouvant valoir +∞."""
        u = rng.random((n, 2))
        u[u == 0.0] = _TINY
        us, uy = u[:, 0], u[:, 1]
        s = self.service.ppf(us)
        if self.kind == "infinite-patience":
            y = np.full(n, np.inf)
        elif self.kind == "product":
            y = self.patience.ppf(uy)
        elif self.kind == "comonotone":
            if self.phi_scale is not None:
                y = self.phi_scale * np.power(s, self.phi_power)
            else:
                y = self.patience.ppf(us)
        else:
            rho = self.correlation
            z = rho * special.ndtri(us) + math.sqrt(1.0 - rho * rho) * special.ndtri(uy)
            uc = np.clip(special.ndtr(z), _TINY, np.nextafter(1.0, 0.0))
            y = self.patience.ppf(uc)
        return s, y


# =============================================================================
# CostFunction: g ≥ 0 semi-continue inférieurement
# =============================================================================

class CostFunction(_Frozen):
    """
    Fonction de coût g appliquée à la charge de travail.

    - constant           : g(w) = c
    - power              : g(w) = scale·w^p
    - exp-decay          : g(w) = e^{−αw}
    - indicator          : g(w) = 1_{(s,∞)}(w)   (rayon ouvert, donc s.c.i.)
    - piecewise-linear   : interpolation linéaire des nœuds (xs, ys),
                           prolongée par constantes

    `antiderivative=False` force la quadrature adaptative.
    """
    kind: Literal["constant", "power", "exp-decay", "indicator", "piecewise-linear"]
    c: float = 1.0
    p: float = 1.0
    scale: float = 1.0
    alpha: float = 1.0
    s: float = 0.0
    xs: tuple[float, ...] = ()
    ys: tuple[float, ...] = ()
    antiderivative: bool = True

    @model_validator(mode="after")
    def _check_shape(self):
        if self.kind == "piecewise-linear":
            if len(self.xs) < 2 or len(self.xs) != len(self.ys):
                raise ValueError("piecewise-linear: au moins deux nœuds (xs, ys)")
            if any(b <= a for a, b in zip(self.xs, self.xs[1:])) or self.xs[0] < 0:
                raise ValueError("piecewise-linear: xs ≥ 0 strictement croissants")
        if self.kind == "power" and self.p < 0:
            raise ValueError("power: exposant p ≥ 0")
        return self

    # ── Constructeurs ─────────────────────────────────────────

    @classmethod
    def one(cls) -> "CostFunction":
        return cls(kind="constant", c=1.0)

    @classmethod
    def identity(cls) -> "CostFunction":
        return cls(kind="power", p=1.0)

    @classmethod
    def exp_decay(cls, alpha: float = 1.0) -> "CostFunction":
        return cls(kind="exp-decay", alpha=alpha)

    @classmethod
    def indicator(cls, s: float) -> "CostFunction":
        return cls(kind="indicator", s=s)

    # ── Évaluation ────────────────────────────────────────────

    def compile(self) -> Callable[[float], float]:
        """g scalaire."""
        kind = self.kind
        if kind == "constant":
            c = self.c
            return lambda w: c
        if kind == "power":
            scale, p = self.scale, self.p
            return lambda w: scale * w ** p
        if kind == "exp-decay":
            a = self.alpha
            return lambda w: math.exp(-a * w)
        if kind == "indicator":
            s = self.s
            return lambda w: 1.0 if w > s else 0.0
        xs, ys = np.asarray(self.xs), np.asarray(self.ys)
        return lambda w: float(np.interp(w, xs, ys))

    def compile_antiderivative(self) -> Optional[Callable[[float], float]]:
        """Γ(w) = ∫_0^w g, ou None si la quadrature est imposée."""
        if not self.antiderivative:
            return None
        kind = self.kind
        if kind == "constant":
            c = self.c
            return lambda w: c * w
        if kind == "power":
            scale, q = self.scale, self.p + 1.0
            return lambda w: scale * w ** q / q
        if kind == "exp-decay":
            a = self.alpha
            if a == 0.0:
                return lambda w: w
            return lambda w: -math.expm1(-a * w) / a
        if kind == "indicator":
            s = self.s
            return lambda w: w - s if w > s else 0.0
        xs, ys = list(self.xs), list(self.ys)
        # Aires cumulées aux nœuds (trapèzes), prolongement constant à gauche
        cum = [ys[0] * xs[0]]
        for i in range(1, len(xs)):
            cum.append(cum[-1] + 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]))

        def prim(w: float) -> float:
            if w <= xs[0]:
                return ys[0] * w
            if w >= xs[-1]:
                return cum[-1] + ys[-1] * (w - xs[-1])
            i = bisect.bisect_right(xs, w) - 1
            gw = ys[i] + (ys[i + 1] - ys[i]) * (w - xs[i]) / (xs[i + 1] - xs[i])
            return cum[i] + 0.5 * (ys[i] + gw) * (w - xs[i])
        return prim

    def evaluate(self, w) -> np.ndarray:
        ws = np.asarray(w, dtype=float)
        if self.kind == "constant":
            return np.full_like(ws, self.c)
        if self.kind == "power":
            return self.scale * np.power(ws, self.p)
        if self.kind == "exp-decay":
            return np.exp(-self.alpha * ws)
        if self.kind == "indicator":
            return (ws > self.s).astype(float)
        return np.interp(ws, np.asarray(self.xs), np.asarray(self.ys))

    @property
    def g0(self) -> float:
        return self.compile()(0.0)

    def breakpoints(self) -> list[float]:
        """Points de non-dérivabilité, transmis à la quadrature."""
        if self.kind == "indicator":
            return [self.s]
        if self.kind == "piecewise-linear":
            return list(self.xs)
        return []

    def min_value_hint(self) -> float:
        """Minimum analytique sur [0, ∞) pour les familles à paramètres."""
        if self.kind == "constant":
            return self.c
        if self.kind == "power":
            return min(0.0, self.scale) if self.p > 0 else self.scale
        if self.kind in ("exp-decay", "indicator"):
            return 0.0
        return min(self.ys)


def make_segment_integrator(g: CostFunction) -> Callable[[float, float], float]:
    """Intégrateur de segment compilé pour la boucle chaude (sans contrôles)."""
    prim = g.compile_antiderivative()
    if prim is not None:
        return lambda w_hi, w_lo: prim(w_hi) - prim(w_lo)
    gf = g.compile()
    points = g.breakpoints()

    def quad(w_hi: float, w_lo: float) -> float:
        if w_hi <= w_lo:
            return 0.0
        inner = [p for p in points if w_lo < p < w_hi] or None
        value, _ = integrate.quad(gf, w_lo, w_hi, epsabs=QUAD_EPSABS, points=inner, limit=200)
        return value
    return quad


def segment_integral(g: CostFunction, w_hi: float, w_lo: float) -> float:
    """
    ∫ g∘W dt sur un segment de pente −1 allant de w_hi à w_lo,
    soit ∫_{w_lo}^{w_hi} g(u) du.
    """
    if w_lo < 0 or w_lo > w_hi:
        raise SimulationError(f"bornes inversées: w_hi={w_hi}, w_lo={w_lo}", "reversed-bounds")
    return make_segment_integrator(g)(w_hi, w_lo)


# =============================================================================
# Discipline, état initial, QueueSpec
# =============================================================================

class Discipline(_Frozen):
    """FCFS à salle infinie, ou LCFS-PR avec salle d'attente de taille k (None = ∞)."""
    kind: Literal["fcfs", "lcfs-pr"] = "fcfs"
    room: Optional[int] = None

    @model_validator(mode="after")
    def _check_room(self):
        if self.kind == "fcfs" and self.room is not None:
            raise ValueError("fcfs: salle d'attente illimitée uniquement")
        return self

    @classmethod
    def lcfs(cls, room: Optional[int] = None) -> "Discipline":
        return cls(kind="lcfs-pr", room=room)

    @property
    def capacity(self) -> float:
        """Nombre max de clients présents (k + 1)."""
        return math.inf if self.room is None else self.room + 1

    def label(self) -> str:
        if self.kind == "fcfs":
            return "FCFS"
        return f"LCFS-PR(k={'∞' if self.room is None else self.room})"


class Init(_Frozen):
    """État initial : charge x déterministe, x ~ G, ou file vide."""
    kind: Literal["deterministic", "random", "empty"] = "empty"
    x: Optional[float] = None

    @classmethod
    def at(cls, x: float) -> "Init":
        return cls(kind="deterministic", x=x)


class QueueSpec(_Frozen):
    """Description complète d'une file M_t/G(Ψ)/1+H(Ψ)."""
    rate: RateFunction
    joint: JointLaw
    discipline: Discipline = Discipline()
    init: Init = Init()

    def with_rate(self, rate: RateFunction) -> "QueueSpec":
        return self.model_copy(update={"rate": rate})

    def with_room(self, room: Optional[int]) -> "QueueSpec":
        return self.model_copy(update={"discipline": Discipline.lcfs(room)})

    def with_joint(self, joint: JointLaw) -> "QueueSpec":
        return self.model_copy(update={"joint": joint})

    def dominating(self) -> "QueueSpec":
        """Même file avec λ ≡ λ_h (même période éventuelle)."""
        r = self.rate
        return self.with_rate(RateFunction.constant(r.lambda_h, r.lambda_h, r.kappa))


def render_canonical(obj: BaseModel) -> str:
    """Rendu textuel canonique (JSON trié) utilisé dans les manifestes."""
    return json.dumps(obj.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


# =============================================================================
# Validation
# =============================================================================

def _rate_grid(rate: RateFunction) -> np.ndarray:
    if rate.kappa is not None:
        span = rate.kappa
    elif rate.kind == "piecewise-constant":
        span = rate.breakpoints[-1] + 1.0
    else:
        span = 1.0
    return np.linspace(0.0, span, GRID_POINTS_PER_PERIOD, endpoint=False)


def check_spec(spec: QueueSpec, run_kind: RunKind = "busy-period",
               g: Optional[CostFunction] = None) -> list[SpecViolation]:
    """Liste (éventuellement vide) des violations d'invariants."""
    out: list[SpecViolation] = []
    rate = spec.rate
    tol = RATE_TOLERANCE * max(1.0, rate.lambda_h)

    # ── Taux : grille dense + maximum analytique ──
    grid = _rate_grid(rate)
    values = rate.evaluate(grid)
    if max(float(values.max()), rate.analytic_max()) > rate.lambda_h + tol:
        out.append(SpecViolation("rate-exceeds-bound", "rate",
                                 f"max λ = {rate.analytic_max():.6g} > λ_h = {rate.lambda_h:.6g}"))
    if min(float(values.min()), rate.analytic_min()) < -tol:
        out.append(SpecViolation("negative-rate", "rate",
                                 f"min λ = {rate.analytic_min():.6g} < 0"))
    if rate.kappa is not None and rate.kind == "piecewise-constant" \
            and rate.breakpoints[-1] >= rate.kappa:
        out.append(SpecViolation("rate-not-periodic", "rate.breakpoints",
                                 "breakpoints au-delà de la période κ"))

    # ── Loi jointe ──
    if spec.joint.service.family == "infinite" or not spec.joint.service.is_valid_support() \
            or spec.joint.service.atom_at_infinity > 0:
        out.append(SpecViolation("nonpositive-service-support", "joint.service",
                                 "le service doit être un réel strictement positif"))
    if spec.joint.patience is not None and not spec.joint.patience.is_valid_support():
        out.append(SpecViolation("invalid-patience-support", "joint.patience",
                                 "patience hors de (0, ∞]"))
    if spec.joint.phi_scale is not None and (spec.joint.phi_scale <= 0 or spec.joint.phi_power <= 0):
        out.append(SpecViolation("invalid-patience-support", "joint.phi",
                                 "φ doit être croissante et positive"))

    # ── Discipline ──
    if spec.discipline.room is not None and spec.discipline.room < 0:
        out.append(SpecViolation("invalid-room", "discipline.room", "k ≥ 0"))

    # ── État initial selon le type d'exécution ──
    init = spec.init
    if init.kind == "deterministic" and (init.x is None or init.x <= 0):
        out.append(SpecViolation("invalid-init", "init.x", "x > 0 requis"))
    if run_kind == "busy-period" and init.kind == "empty":
        out.append(SpecViolation("invalid-init", "init", "période d'activité : état initial non vide requis"))
    if run_kind == "cycle":
        if rate.kappa is None:
            out.append(SpecViolation("non-periodic-rate-for-cycle-run", "rate.kappa",
                                     "un cycle régénératif exige une période κ"))
        if init.kind != "empty":
            out.append(SpecViolation("invalid-init", "init", "cycle : file vide au départ requise"))

    # ── Coût ──
    if g is not None:
        w_grid = np.concatenate([np.linspace(0.0, 100.0, 1001), np.asarray(g.breakpoints(), dtype=float)])
        if g.min_value_hint() < 0 or float(np.min(g.evaluate(w_grid))) < 0:
            out.append(SpecViolation("negative-cost", "g", "g(w) ≥ 0 requis"))
    return out


def validate_spec(spec: QueueSpec, run_kind: RunKind = "busy-period",
                  g: Optional[CostFunction] = None) -> QueueSpec:
    """Retourne la spec si tous les invariants tiennent, lève SpecError sinon."""
    violations = check_spec(spec, run_kind, g)
    if violations:
        raise SpecError(violations)
    return spec
