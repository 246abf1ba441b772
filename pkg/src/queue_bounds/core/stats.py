# -*- coding: utf-8 -*-
"""
Statistiques : distributions empiriques, test unilatéral de dominance
stochastique, moments et ratios avec incertitude.

Conventions :
    X ≤_st Z  ⟺  F_X(u) ≥ F_Z(u) pour tout u.
    D⁺ = sup_u (F̂_upper(u) − F̂_lower(u)), évalué aux points de l'échantillon
    poolé ; « rejected » ssi D⁺ dépasse la valeur critique de Smirnov
    unilatérale √(−ln α / 2 · (n + m)/(nm)).

Un verdict est « consistent » ou « rejected », jamais « prouvé ».
Toutes les fonctions sont pures sur des tableaux immuables.
"""

import csv
import io
import logging
import math
from typing import Iterable, Optional

import numpy as np
from scipy import stats as sps

from ..config import get_settings
from .errors import StatsError
from .models import DominanceVerdict, MomentEstimate, RatioEstimate

logger = logging.getLogger("queue_bounds.stats")

RUNNING_START = 100


# =============================================================================
# Distribution empirique
# =============================================================================

class EmpiricalDistribution:
    """Échantillon trié ; ecdf(u) = #{x ≤ u}/n, continue à droite."""

    __slots__ = ("values",)

    def __init__(self, samples: Iterable[float]):
        values = np.sort(np.asarray(list(samples) if not isinstance(samples, np.ndarray)
                                    else samples, dtype=float))
        values.setflags(write=False)
        self.values = values

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n

    def ecdf(self, u):
        if self.n == 0:
            raise StatsError("distribution empirique vide", "empty-arm")
        counts = np.searchsorted(self.values, np.asarray(u, dtype=float), side="right")
        return counts / self.n

    def survival(self, u):
        return 1.0 - self.ecdf(u)

    def quantile(self, q):
        return np.quantile(self.values, q)

    @property
    def lower_support(self) -> float:
        return float(self.values[0]) if self.n else math.nan


def ecdf_eval(dist: EmpiricalDistribution, u):
    """Valeur en escalier (continue à droite) de la fonction de répartition empirique."""
    out = dist.ecdf(u)
    return float(out) if np.ndim(out) == 0 else out


def _as_array(samples, name: str) -> np.ndarray:
    arr = np.asarray(samples, dtype=float).ravel()
    if arr.size == 0:
        raise StatsError(f"bras {name} vide", "empty-arm")
    return arr


# =============================================================================
# Dominance stochastique
# =============================================================================

def smirnov_statistic(lower: np.ndarray, upper: np.ndarray) -> float:
    """D⁺ = max (F̂_upper − F̂_lower) sur l'échantillon poolé."""
    lo, up = np.sort(lower), np.sort(upper)
    pooled = np.concatenate((lo, up))
    f_lo = np.searchsorted(lo, pooled, side="right") / lo.size
    f_up = np.searchsorted(up, pooled, side="right") / up.size
    return float(np.max(f_up - f_lo))


def smirnov_critical(alpha: float, n: int, m: int) -> float:
    return math.sqrt(-math.log(alpha) / 2.0 * (n + m) / (n * m))


def test_st_dominance(lower, upper, alpha: Optional[float] = None,
                      permutation: bool = False, label: str = "",
                      seed: int = 0) -> DominanceVerdict:
    """
    Teste H0 : lower ≤_st upper.

    Args:
        lower: échantillon de X (supposé stochastiquement plus petit)
        upper: échantillon de Z
        alpha: niveau, dans (0, 0.5) ; Settings.stats_alpha par défaut
        permutation: test par permutation au lieu de la valeur critique
                     asymptotique, pour les bras sous le seuil
                     Settings.stats_permutation_below
    """
    settings = get_settings()
    alpha = settings.stats_alpha if alpha is None else alpha
    if not 0.0 < alpha < 0.5:
        raise StatsError(f"alpha={alpha} hors de (0, 0.5)", "invalid-alpha")
    lo, up = _as_array(lower, "lower"), _as_array(upper, "upper")
    n, m = lo.size, up.size
    stat = smirnov_statistic(lo, up)

    if permutation and default_permutation(n, m):
        res = sps.permutation_test(
            (lo, up), lambda a, b: smirnov_statistic(a, b),
            permutation_type="independent", alternative="greater", vectorized=False,
            n_resamples=settings.stats_bootstrap_resamples, random_state=np.random.default_rng(seed),
        )
        crit = float(np.quantile(res.null_distribution, 1.0 - alpha))
        p_value = float(res.pvalue)
        verdict = "rejected" if p_value < alpha else "consistent"
        method = "permutation"
    else:
        crit = smirnov_critical(alpha, n, m)
        # F = upper, G = lower : alternative F > G quelque part
        p_value = float(sps.ks_2samp(up, lo, alternative="greater").pvalue)
        verdict = "rejected" if stat > crit else "consistent"
        method = "smirnov-asymptotic"

    if verdict == "rejected":
        logger.warning("dominance rejetée %s: D⁺=%.4f > %.4f (n=%d, m=%d, α=%g)",
                       label, stat, crit, n, m, alpha)
    else:
        logger.debug("dominance cohérente %s: D⁺=%.4f ≤ %.4f", label, stat, crit)
    return DominanceVerdict(
        statistic=stat, critical_value=crit, alpha=alpha, verdict=verdict,
        n_lower=n, n_upper=m, p_value=p_value, method=method, label=label,
    )


# Le test n'est pas une fonction de test pytest
test_st_dominance.__test__ = False


def test_against_cdf(lower, u_grid, cdf, alpha: Optional[float] = None,
                     label: str = "") -> DominanceVerdict:
    """
    Variante à un échantillon : H0 F_lower ≥ F sur la grille, F connue
    (colonne calculée, ex. J). D⁺ = max_u (F(u) − F̂_lower(u)), valeur
    critique √(−ln α / (2n)).
    """
    alpha = get_settings().stats_alpha if alpha is None else alpha
    if not 0.0 < alpha < 0.5:
        raise StatsError(f"alpha={alpha} hors de (0, 0.5)", "invalid-alpha")
    lo = _as_array(lower, "lower")
    u = np.asarray(u_grid, dtype=float)
    if u.size == 0:
        raise StatsError("grille vide", "empty-arm")
    f_lo = EmpiricalDistribution(lo).ecdf(u)
    stat = float(np.max(np.asarray(cdf, dtype=float) - f_lo))
    crit = math.sqrt(-math.log(alpha) / (2.0 * lo.size))
    verdict = "rejected" if stat > crit else "consistent"
    if verdict == "rejected":
        logger.warning("dominance rejetée %s: D⁺=%.4f > %.4f (n=%d)", label, stat, crit, lo.size)
    return DominanceVerdict(statistic=stat, critical_value=crit, alpha=alpha, verdict=verdict,
                            n_lower=int(lo.size), n_upper=int(u.size), method="smirnov-one-sample",
                            label=label)


test_against_cdf.__test__ = False


def default_permutation(n: int, m: int) -> bool:
    """Permutation pour les petits bras (seuil Settings.stats_permutation_below)."""
    return min(n, m) < get_settings().stats_permutation_below


# =============================================================================
# Moments
# =============================================================================

def _running(values: np.ndarray) -> list[tuple[int, float]]:
    """Moyennes sur des préfixes doublés, jusqu'à n inclus."""
    n = values.size
    sizes, k = [], min(RUNNING_START, n)
    while k < n:
        sizes.append(k)
        k *= 2
    sizes.append(n)
    csum = np.cumsum(values)
    return [(s, float(csum[s - 1] / s)) for s in sizes]


def moment_estimate(samples, m: int, confidence: float = 0.95,
                    resamples: Optional[int] = None, seed: int = 0) -> MomentEstimate:
    """
    E[X^m] par la moyenne empirique des puissances, erreur type par
    bootstrap ; `running` = estimations sur préfixes doublés.
    """
    if m < 1:
        raise StatsError(f"ordre m={m} < 1", "invalid-order")
    x = _as_array(samples, "samples")
    powers = x if m == 1 else np.power(x, m)
    estimate = float(np.mean(powers))
    running = _running(powers)
    rel = None
    if len(running) >= 2 and running[-2][1] != 0.0:
        rel = abs(running[-1][1] - running[-2][1]) / abs(running[-2][1])

    if powers.size < 2 or np.all(powers == powers[0]):
        se, lo, hi = 0.0, estimate, estimate
    else:
        res = sps.bootstrap(
            (powers,), np.mean, n_resamples=resamples or get_settings().stats_bootstrap_resamples,
            confidence_level=confidence, method="percentile", batch=50,
            random_state=np.random.default_rng(seed),
        )
        se = float(res.standard_error)
        lo, hi = float(res.confidence_interval.low), float(res.confidence_interval.high)

    note = ""
    if not math.isfinite(estimate):
        note = "moment infini dans l'échantillon"
    elif rel is not None and rel > 0.05:
        note = f"estimations instables sur le dernier doublement ({rel:.1%})"
    return MomentEstimate(order=m, estimate=estimate, standard_error=se, confidence=confidence,
                          ci_low=lo, ci_high=hi, n=int(x.size), running=running,
                          relative_change=rel, note=note)


# =============================================================================
# Ratios (estimateur régénératif)
# =============================================================================

def ratio_estimate(numerator, denominator, paired: bool = True,
                   resamples: Optional[int] = None, seed: int = 0) -> RatioEstimate:
    """
    Ratio des moyennes E[num]/E[den] (jamais moyenne des ratios).

    Apparié : bootstrap sur les indices de réplication. Sinon : méthode delta
    pour deux échantillons indépendants.
    """
    num, den = _as_array(numerator, "numerator"), _as_array(denominator, "denominator")
    if paired and num.size != den.size:
        raise StatsError(f"bras appariés de tailles {num.size} ≠ {den.size}", "length-mismatch")
    m_num, m_den = float(np.mean(num)), float(np.mean(den))
    if m_den == 0.0:
        raise StatsError("moyenne du dénominateur nulle", "zero-denominator-mean")
    estimate = m_num / m_den

    constant = np.all(num == num[0]) and np.all(den == den[0])
    if constant or min(num.size, den.size) < 2:
        se, method = 0.0, "exact"
    elif paired:
        res = sps.bootstrap(
            (num, den), lambda a, b, axis=-1: np.mean(a, axis=axis) / np.mean(b, axis=axis),
            paired=True, vectorized=True, method="percentile", batch=50,
            n_resamples=resamples or get_settings().stats_bootstrap_resamples,
            random_state=np.random.default_rng(seed),
        )
        se, method = float(res.standard_error), "bootstrap-paired"
    else:
        var = (np.var(num, ddof=1) / num.size) / m_den ** 2 \
            + (m_num ** 2) * (np.var(den, ddof=1) / den.size) / m_den ** 4
        se, method = float(math.sqrt(var)), "delta"
    return RatioEstimate(estimate=estimate, standard_error=se, method=method,
                         n_numerator=int(num.size), n_denominator=int(den.size), paired=paired)


def mean_with_se(samples) -> tuple[float, float]:
    x = _as_array(samples, "samples")
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return float(np.mean(x)), se


# =============================================================================
# Export
# =============================================================================

ECDF_COLUMNS = ("arm", "u", "F_hat")


def ecdf_grid(arms: dict[str, Iterable[float]], points: int = 201) -> list[tuple[str, float, float]]:
    """F̂ de chaque bras sur une grille commune (quantiles de l'échantillon poolé)."""
    dists = {name: EmpiricalDistribution(v) for name, v in arms.items()}
    parts = [d.values for d in dists.values() if d.n]
    if not parts:
        return []
    pooled = np.concatenate(parts)
    grid = np.unique(np.quantile(pooled, np.linspace(0.0, 1.0, points)))
    rows = []
    for name, d in dists.items():
        if d.n:
            rows.extend((name, float(u), float(f)) for u, f in zip(grid, d.ecdf(grid)))
    return rows


def ecdf_csv(arms: dict[str, Iterable[float]], points: int = 201) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ECDF_COLUMNS)
    for name, u, f in ecdf_grid(arms, points):
        writer.writerow((name, repr(u), repr(f)))
    return buf.getvalue()
