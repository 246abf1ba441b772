# -*- coding: utf-8 -*-
"""
Bornes : condition de stabilité, décomposition géométrique (J, J*),
bornes Monte Carlo à indice géométrique, diagnostics de queue, oracles
M/G/1 classiques et borne sur le régime stationnaire.

Conventions :
    p      = e^{−κλ_h}          probabilité de succès de ι
    ι      ~ Géométrique(p), support {1, 2, …}
    shift  = max{1, κ}

    J(u)   = Σ_{n≥1} (1 − p)^{n−1} p F^{⋆n}(u − shift)

F est la loi de A_{λ_h}(g; x, Ψ) pour x ~ G, estimée par un échantillon.
Le calcul sur réseau arrondit les valeurs VERS LE HAUT et tronque la série :
le J calculé minore le J exact (borne conservatrice).

Usage :
    report = stability_check(0.6, Marginal.exponential(1.0))
    result = decompound_cdf(EmpiricalDistribution(a_samples), 1.0, 0.6, u_grid, 1e-3)
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional, Sequence

import numpy as np
from scipy import signal

from ..config import get_settings
from .errors import BoundsError
from .model import CostFunction, Init, Marginal, QueueSpec
from .models import BoundResult, FunctionalSample, MomentEstimate, StabilityReport, TailReport
from .pool import run_replications
from .simulator import SimCaps, run_busy_period
from .stats import EmpiricalDistribution, moment_estimate
from .streams import ReplicationStreams

logger = logging.getLogger("queue_bounds.bounds")

BOUNDARY_TOLERANCE = 1e-12
SAMPLER_ARM = 7          # voies réservées aux échantillonneurs de bornes


# =============================================================================
# Stabilité
# =============================================================================

def stability_check(lambda_h: float, service: Marginal, patience: Optional[Marginal] = None,
                    product_form: bool = True, p_inf: Optional[float] = None) -> StabilityReport:
    """
    ρ_eff = λ_h·E[S]·lim(1 − H) ; stable ssi ρ_eff < 1.

    patience=None signifie patience infinie (lim(1 − H) = 1), sauf si p_inf
    est fourni directement.
    """
    mean_s = service.mean()
    if not math.isfinite(mean_s):
        raise BoundsError("E[S] infini : condition de stabilité non définie", "infinite-mean-service")
    if p_inf is None:
        p_inf = 1.0 if patience is None else patience.survival_limit
    rho_h = lambda_h * mean_s
    rho_eff = rho_h * p_inf
    if abs(rho_eff - 1.0) <= BOUNDARY_TOLERANCE:
        verdict = "boundary"
    else:
        verdict = "stable" if rho_eff < 1.0 else "unstable"
    note = "" if product_form else "condition établie pour une loi jointe à forme produit"
    return StabilityReport(lambda_h=lambda_h, mean_service=mean_s, rho_h=rho_h, p_inf=p_inf,
                           rho_eff=rho_eff, verdict=verdict, product_form=product_form, note=note)


def stability_for(spec: QueueSpec) -> StabilityReport:
    """stability_check appliqué à la file dominante de spec."""
    joint = spec.joint
    return stability_check(spec.rate.lambda_h, joint.service, None, joint.product_form,
                           joint.survival_limit)


# =============================================================================
# Échantillonneur de A_{λ_h}(g; x, Ψ), x ~ G
# =============================================================================

class BusyPeriodSampler:
    """
    Tire des périodes d'activité de la file dominante (λ ≡ λ_h) partant de
    x ~ G. Chaque appel consomme de nouveaux identifiants de réplication.
    """

    def __init__(self, spec: QueueSpec, g: CostFunction, seed: int, threads: int = 1,
                 caps: Optional[SimCaps] = None, arm: int = SAMPLER_ARM):
        self.spec = spec.dominating().model_copy(update={"init": Init(kind="random")})
        self.g = g
        self.seed = seed
        self.threads = threads
        self.caps = caps or SimCaps.from_settings()
        self.arm = arm
        self.used = 0
        self.cap_incidents = 0

    def samples(self, k: int) -> list[FunctionalSample]:
        start, self.used = self.used, self.used + k

        def task(rep: int) -> FunctionalSample:
            _, sample = run_busy_period(self.spec, self.g, ReplicationStreams(self.seed, rep, self.arm),
                                        self.caps, validate=rep == 0)
            return sample

        result = run_replications(task, range(start, start + k), self.threads)
        if result.errors:
            raise next(iter(result.errors.values()))
        out = result.ordered()
        capped = sum(1 for s in out if s.cap_exceeded)
        if capped:
            self.cap_incidents += capped
            logger.warning("%d période(s) d'activité plafonnée(s) : A compté comme +∞", capped)
        return out

    def __call__(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        out = self.samples(k)
        a = np.array([math.inf if s.cap_exceeded else s.A for s in out])
        a_star = np.array([math.inf if s.cap_exceeded else s.A_star for s in out])
        return a, a_star


# =============================================================================
# Bornes Monte Carlo à indice géométrique
# =============================================================================

@dataclass
class PropBoundSamples:
    """
    iota              ι ~ Géom(e^{−κλ_h}) sur {1, 2, …}
    index_bound       ι·κ·g(0) + Σ_{i<ι} A^i
    index_bound_star  ι·g(0)   + Σ_{i<ι} A^{i*}
    tail_variant      Σ_{i≤ι} [A^i + g(0)·max{κ, 1}]
    """
    iota: np.ndarray
    index_bound: np.ndarray
    index_bound_star: np.ndarray
    tail_variant: np.ndarray
    p: float


def sample_prop_bound(a_sampler: Callable[[int], tuple[np.ndarray, np.ndarray]], kappa: float,
                      lambda_h: float, g0: float, reps: int, seed: int = 0,
                      min_reps: int = 100) -> PropBoundSamples:
    """
    reps tirages des bornes à indice géométrique.

    a_sampler(k) retourne k couples iid (A, A*) ; ι et les sommes par blocs
    sont vectorisés (une seule demande de Σι couples).
    """
    if reps < min_reps:
        raise BoundsError(f"reps={reps} < {min_reps}", "too-few-reps")
    p = math.exp(-kappa * lambda_h)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(SAMPLER_ARM,)))
    iota = rng.geometric(p, size=reps)
    total = int(iota.sum())
    if total > get_settings().bound_max_cells:
        raise BoundsError(f"Σι = {total} tirages de A : réduire reps ou κλ_h", "too-many-draws")
    a, a_star = (np.asarray(v, dtype=float) for v in a_sampler(total))
    offsets = np.concatenate(([0], np.cumsum(iota)))[:-1]
    last = offsets + iota - 1               # dernier terme de chaque bloc
    a_prev, star_prev = a.copy(), a_star.copy()
    a_prev[last] = 0.0
    star_prev[last] = 0.0
    sum_a_prev = np.add.reduceat(a_prev, offsets)
    sum_star_prev = np.add.reduceat(star_prev, offsets)
    sum_a_all = np.add.reduceat(a, offsets)
    shift = max(kappa, 1.0)
    return PropBoundSamples(
        iota=iota,
        index_bound=iota * kappa * g0 + sum_a_prev,
        index_bound_star=iota * g0 + sum_star_prev,
        tail_variant=sum_a_all + iota * g0 * shift,
        p=p,
    )


# =============================================================================
# Décomposition géométrique sur réseau
# =============================================================================

def geometric_terms(p: float, tol: float) -> tuple[int, float]:
    """n_max tel que le poids résiduel (1 − p)^{n_max} ≤ tol/2, et ce poids."""
    q = 1.0 - p
    if q <= 0.0:
        return 1, 0.0
    n_max = max(1, math.ceil(math.log(tol / 2.0) / math.log(q)))
    return n_max, q ** n_max


def decompound_cdf(F_hat: EmpiricalDistribution, kappa: float, lambda_h: float,
                   u_grid: Sequence[float], tol: Optional[float] = None) -> BoundResult:
    """
    J(u) sur u_grid par convolutions itérées de la loi empirique arrondie
    vers le haut sur un réseau de pas h.
    """
    settings = get_settings()
    tol = settings.bound_tolerance if tol is None else tol
    if F_hat.n == 0:
        raise BoundsError("échantillon vide : F non identifiable", "degenerate-empty-sample")
    if not 0.0 < tol < 1.0:
        raise BoundsError(f"tol={tol} hors de (0, 1)", "invalid-tolerance")
    values = F_hat.values
    if not np.all(np.isfinite(values)):
        logger.warning("%d valeur(s) infinie(s) dans F̂ : masse perdue pour J",
                       int(np.sum(~np.isfinite(values))))

    u = np.asarray(u_grid, dtype=float)
    p = math.exp(-kappa * lambda_h)
    shift = max(1.0, kappa)
    n_max, residual = geometric_terms(p, tol)
    span = max(float(u.max()) - shift, 0.0) if u.size else 0.0

    scale = float(np.mean(values[np.isfinite(values)])) if np.any(np.isfinite(values)) else 1.0
    scale = scale if scale > 0.0 else 1.0
    h = tol * scale / (2.0 * n_max)
    max_cells = settings.bound_max_cells
    if span / h + 1 > max_cells:
        h = span / (max_cells - 1)
        logger.warning("réseau limité à %d cellules : pas h=%.3g (erreur de réseau > tol/2)",
                       max_cells, h)
    cells = int(math.floor(span / h)) + 1

    # Loi de base : arrondi vers le haut, masse hors fenêtre ignorée
    idx = np.ceil(values[np.isfinite(values)] / h)
    idx = idx[idx < cells].astype(np.int64)
    base = np.bincount(idx, minlength=cells).astype(float) / F_hat.n

    J_cells = np.zeros(cells)
    conv = base.copy()
    weight = p
    n_used = 0
    for n in range(1, n_max + 1):
        J_cells += weight * np.cumsum(conv)
        n_used = n
        if n == n_max or conv.sum() <= 0.0:
            break
        conv = np.clip(signal.fftconvolve(conv, base)[:cells], 0.0, None)
        weight *= 1.0 - p
    if n_used < n_max:
        logger.debug("convolutions arrêtées à n=%d (masse sortie de la fenêtre)", n_used)

    J = np.zeros_like(u)
    inside = u >= shift
    j = np.minimum(np.floor((u[inside] - shift) / h).astype(np.int64), cells - 1)
    J[inside] = J_cells[j]
    J = np.clip(J, 0.0, 1.0)

    return BoundResult(u=u.tolist(), J=J.tolist(), p=p, shift=shift, n_max=n_max,
                       residual=residual, lattice_width=h, tolerance=tol)


def compound_geometric_mc(F_hat: EmpiricalDistribution, kappa: float, lambda_h: float,
                          draws: int, seed: int = 0) -> np.ndarray:
    """shift + Σ_{i≤ι} X_i, X_i rééchantillonnés dans F̂, ι ~ Géom(p) sur {1, 2, …}."""
    if F_hat.n == 0:
        raise BoundsError("échantillon vide", "degenerate-empty-sample")
    p = math.exp(-kappa * lambda_h)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(SAMPLER_ARM, 1)))
    iota = rng.geometric(p, size=draws)
    x = F_hat.values[rng.integers(0, F_hat.n, size=int(iota.sum()))]
    offsets = np.concatenate(([0], np.cumsum(iota)))[:-1]
    return max(1.0, kappa) + np.add.reduceat(x, offsets)


def empirical_bound_cdf(samples: np.ndarray, u_grid: Sequence[float]) -> list[float]:
    """Colonne CDF d'une borne Monte Carlo, sur la grille u."""
    return EmpiricalDistribution(samples).ecdf(np.asarray(u_grid, dtype=float)).tolist()


# =============================================================================
# Diagnostics de queue (tendance, pas une limite)
# =============================================================================

TailTarget = Literal["cycle", "joins", "busy-period"]


def tail_constant(kappa: float, lambda_h: float, rho_h: float) -> float:
    """(1 − e^{−κλ_h}) / ((1 − ρ_h) e^{−κλ_h})."""
    p = math.exp(-kappa * lambda_h)
    return (1.0 - p) / ((1.0 - rho_h) * p)


def tail_ratio(samples, service: Marginal, rho_h: float, kappa: float, lambda_h: float,
               g0: float, quantiles: Sequence[float] = (0.99, 0.999),
               target: TailTarget = "cycle") -> TailReport:
    """
    Rapport P̂{X > u} / référence aux quantiles empiriques demandés.

    cycle        : référence 1 − G[(u − g(0)·max{κ,1})(1 − ρ_h)]
    joins        : idem, argument divisé par λ_h
    busy-period  : file M/G/1, référence 1 − G[u(1 − ρ_h)], borne (1 − ρ_h)^{−1}
    """
    if rho_h >= 1.0:
        raise BoundsError(f"ρ_h={rho_h} ≥ 1", "unstable-input")
    x = np.asarray(samples, dtype=float)
    n = x.size
    qs = np.asarray(quantiles, dtype=float)
    if n == 0 or np.any(qs > 1.0 - 1.0 / max(n, 1)):
        raise BoundsError(f"quantiles {list(quantiles)} au-delà d'un échantillon de {n} valeurs",
                          "quantile-beyond-sample")
    dist = EmpiricalDistribution(x)
    u = np.quantile(x, qs)
    survival = dist.survival(u)

    if target == "busy-period":
        arg = u * (1.0 - rho_h)
        bound = 1.0 / (1.0 - rho_h)
    else:
        arg = (u - g0 * max(kappa, 1.0)) * (1.0 - rho_h)
        if target == "joins":
            arg = arg / lambda_h
        bound = tail_constant(kappa, lambda_h, rho_h)
    reference = service.sf(np.maximum(arg, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(reference > 0.0, survival / reference, math.inf)
    return TailReport(target=target, quantiles=qs.tolist(), u=u.tolist(),
                      survival=survival.tolist(), reference=reference.tolist(),
                      ratio=ratio.tolist(), bound=bound, rho_h=rho_h)


# =============================================================================
# Oracles M/G/1
# =============================================================================

def mg1_oracles(lambda_h: float, service: Marginal, x: float = 1.0) -> dict:
    """Valeurs classiques de la file M/G/1 (patience infinie) pour recoupement."""
    mean_s = service.mean()
    rho = lambda_h * mean_s
    if not math.isfinite(mean_s) or rho >= 1.0:
        raise BoundsError(f"ρ={rho} ≥ 1 ou E[S] infini", "unstable-input")
    second = service.moment(2)
    return {
        "rho": rho,
        "mean_busy_from_x": x / (1.0 - rho),
        "pk_mean_workload": lambda_h * second / (2.0 * (1.0 - rho)),
        "busy_count_mean": 1.0 / (1.0 - rho),
        "mean_busy_period": mean_s / (1.0 - rho),
    }


# =============================================================================
# Moments de η*
# =============================================================================

def bound_conditions(spec: QueueSpec, m: int) -> dict:
    """Hypothèses de finitude du moment d'ordre m de η*."""
    stable = stability_for(spec).verdict == "stable"
    service_moment = m < 2 or math.isfinite(spec.joint.service.moment(m))
    return {"product_form": spec.joint.product_form, "stable": stable,
            "service_moment": service_moment,
            "applies": spec.joint.product_form and stable and service_moment}


def eta_moment_report(cycle_samples, m: int, spec: Optional[QueueSpec] = None,
                      confidence: float = 0.95, seed: int = 0) -> MomentEstimate:
    """E(η*)^m avec erreur type bootstrap, annoté des hypothèses de finitude."""
    values = [s.eta_star if isinstance(s, FunctionalSample) else s for s in cycle_samples]
    est = moment_estimate(np.asarray(values, dtype=float), m, confidence, seed=seed)
    if spec is None:
        return est
    cond = bound_conditions(spec, m)
    marks = ", ".join(f"{k} {'✓' if v else '✗'}" for k, v in cond.items() if k != "applies")
    note = f"moment fini garanti ({marks})" if cond["applies"] else f"hypothèses non réunies ({marks})"
    if est.note:
        note = f"{note} ; {est.note}"
    return est.model_copy(update={"note": note})


# =============================================================================
# Régime stationnaire
# =============================================================================

def stationary_mg1_functional(busy: list[FunctionalSample], lambda_h: float) -> float:
    """E g[W_{λ_h}(∞)] = E A / (1/λ_h + E τ), périodes démarrées par x ~ G."""
    a = np.array([s.A for s in busy])
    tau = np.array([s.duration for s in busy])
    return float(a.mean() / (1.0 / lambda_h + tau.mean()))


def steady_state_bound(spec: QueueSpec, g: CostFunction, busy: list[FunctionalSample]) -> dict:
    """
    e^{λ_h κ}/(1 − e^{−λ_ℓ κ}) · (1 + 1/ρ_h) · E g[W_{λ_h}(∞)],
    pour λ périodique, λ ≥ λ_ℓ > 0 et g(0) = 0.
    """
    rate = spec.rate
    lam_low = rate.analytic_min()
    if rate.kappa is None or lam_low <= 0.0 or g.g0 != 0.0:
        raise BoundsError("borne stationnaire : λ périodique, λ_ℓ > 0 et g(0) = 0 requis",
                          "steady-state-hypotheses")
    if not busy:
        raise BoundsError("aucune période d'activité", "degenerate-empty-sample")
    kappa, lam_h = rate.kappa, rate.lambda_h
    rho_h = lam_h * spec.joint.service.mean()
    reference = stationary_mg1_functional(busy, lam_h)
    factor = math.exp(lam_h * kappa) / (1.0 - math.exp(-lam_low * kappa)) * (1.0 + 1.0 / rho_h)
    return {"lambda_low": lam_low, "rho_h": rho_h, "factor": factor,
            "reference": reference, "bound": factor * reference}


def all_join_spec(spec: QueueSpec) -> QueueSpec:
    """Même file où tous les clients rejoignent (Y ≡ ∞, même G)."""
    return spec.with_joint(spec.joint.all_join())
