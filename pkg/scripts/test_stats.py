#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests statistiques : ECDF, test de dominance unilatéral, moments,
ratios, export CSV.
"""

import numpy as np

import testkit  # noqa: F401  # ajoute src/ au path
from queue_bounds.core.errors import StatsError
from queue_bounds.core.stats import (
    ECDF_COLUMNS, EmpiricalDistribution, ecdf_csv, ecdf_eval, mean_with_se,
    moment_estimate, ratio_estimate, smirnov_critical, test_against_cdf, test_st_dominance,
)


def _expect_code(code, fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except StatsError as e:
        assert e.code == code, e.code
    else:
        raise AssertionError(f"StatsError({code}) attendue")


def _normal(n, seed=0):
    return np.random.default_rng(seed).normal(size=n)


# ─────────────────────────────────────────────────────────────
# ECDF
# ─────────────────────────────────────────────────────────────

def test_ecdf_right_continuous():
    d = EmpiricalDistribution([3.0, 1.0, 2.0, 2.0])
    assert ecdf_eval(d, 2.0) == 0.75
    assert ecdf_eval(d, 1.999) == 0.25
    assert ecdf_eval(d, 0.0) == 0.0 and ecdf_eval(d, 10.0) == 1.0
    assert d.lower_support == 1.0
    assert list(d.ecdf([1.0, 3.0])) == [0.25, 1.0]


def test_empty_arm():
    _expect_code("empty-arm", EmpiricalDistribution([]).ecdf, 0.0)
    _expect_code("empty-arm", test_st_dominance, [], [1.0, 2.0])


# ─────────────────────────────────────────────────────────────
# Dominance
# ─────────────────────────────────────────────────────────────

def test_smirnov_critical_value():
    assert abs(smirnov_critical(0.01, 100, 100) - 0.21460) < 1e-5


def test_shifted_down_is_consistent():
    upper = _normal(300)
    v = test_st_dominance(upper - 1.0, upper, alpha=0.01)
    assert v.verdict == "consistent"
    assert v.statistic <= 0.0
    assert v.n_lower == v.n_upper == 300


def test_shifted_up_is_rejected():
    upper = _normal(300)
    v = test_st_dominance(upper + 1.0, upper, alpha=0.01, label="shift")
    assert v.verdict == "rejected"
    assert v.statistic > v.critical_value
    assert v.p_value < 0.01 and v.label == "shift"


def test_permutation_variant():
    upper = _normal(200, seed=1)
    v = test_st_dominance(upper + 1.0, upper, alpha=0.01, permutation=True, seed=3)
    assert v.method == "permutation"
    assert v.verdict == "rejected"
    same = test_st_dominance(upper - 1.0, upper, alpha=0.01, permutation=True, seed=3)
    assert same.verdict == "consistent"


def test_permutation_only_below_threshold():
    upper = _normal(600, seed=4)
    v = test_st_dominance(upper - 1.0, upper, alpha=0.01, permutation=True)
    assert v.method == "smirnov-asymptotic"


def test_alpha_range():
    _expect_code("invalid-alpha", test_st_dominance, [1.0], [2.0], alpha=0.5)
    _expect_code("invalid-alpha", test_st_dominance, [1.0], [2.0], alpha=0.0)
    _expect_code("invalid-alpha", test_against_cdf, [1.0], [1.0], [0.5], alpha=0.7)


def test_one_sample_against_known_cdf():
    lower = np.random.default_rng(4).uniform(size=1000)
    grid = np.linspace(0.0, 1.0, 51)
    below = test_against_cdf(lower, grid, np.clip(grid - 0.2, 0.0, 1.0))
    assert below.verdict == "consistent" and below.method == "smirnov-one-sample"
    above = test_against_cdf(lower, grid, np.clip(grid + 0.3, 0.0, 1.0))
    assert above.verdict == "rejected"


# ─────────────────────────────────────────────────────────────
# Moments et ratios
# ─────────────────────────────────────────────────────────────

def test_moment_of_constant_sample():
    m = moment_estimate([2.0] * 10, 2)
    assert m.estimate == 4.0 and m.standard_error == 0.0
    assert m.ci_low == m.ci_high == 4.0
    assert m.running == [(10, 4.0)] and m.relative_change is None


def test_moment_order():
    _expect_code("invalid-order", moment_estimate, [1.0, 2.0], 0)


def test_moment_running_prefixes():
    x = np.random.default_rng(5).exponential(size=1000)
    m = moment_estimate(x, 1, resamples=200)
    assert [s for s, _ in m.running] == [100, 200, 400, 800, 1000]
    assert abs(m.estimate - 1.0) < 5 * m.standard_error
    assert m.ci_low < m.estimate < m.ci_high


def test_exact_ratio():
    r = ratio_estimate([2.0, 2.0, 2.0], [1.0, 1.0, 1.0])
    assert r.estimate == 2.0 and r.standard_error == 0.0 and r.method == "exact"


def test_ratio_errors():
    _expect_code("length-mismatch", ratio_estimate, [1.0, 2.0], [1.0])
    _expect_code("zero-denominator-mean", ratio_estimate, [1.0, 2.0], [0.0, 0.0])


def test_unpaired_ratio_uses_delta_method():
    rng = np.random.default_rng(6)
    r = ratio_estimate(rng.exponential(2.0, 400), rng.exponential(1.0, 300), paired=False)
    assert r.method == "delta" and not r.paired
    assert r.standard_error > 0.0


def test_mean_with_se():
    mean, se = mean_with_se([1.0, 2.0, 3.0])
    assert mean == 2.0
    assert abs(se - 0.57735) < 1e-5
    assert mean_with_se([4.0]) == (4.0, 0.0)


def test_ecdf_csv():
    lines = ecdf_csv({"a": [1.0, 2.0], "b": [3.0]}, points=3).splitlines()
    assert lines[0] == ",".join(ECDF_COLUMNS)
    assert lines[1:4] == ["a,1.0,0.5", "a,2.0,1.0", "a,3.0,1.0"]
    assert lines[4:] == ["b,1.0,0.0", "b,2.0,0.0", "b,3.0,1.0"]
    assert ecdf_csv({"a": []}).splitlines() == [",".join(ECDF_COLUMNS)]


if __name__ == "__main__":
    testkit.run_tests(globals(), "Tests statistiques")
