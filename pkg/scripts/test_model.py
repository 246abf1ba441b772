#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests du modèle déclaratif : taux, lois marginales et jointes, coût,
validation des spécifications.
"""

import math

import numpy as np
from pydantic import ValidationError

import testkit  # noqa: F401  # ajoute src/ au path
from queue_bounds.core.errors import ModelError, SimulationError, SpecError
from queue_bounds.core.model import (
    CostFunction, Discipline, Init, JointLaw, Marginal, QueueSpec, RateFunction,
    check_spec, eval_rate, render_canonical, segment_integral, validate_spec,
)

SINUSOID = RateFunction.sinusoid(base=0.4, amplitude=0.2, lambda_h=0.6, kappa=1.0)


def _codes(spec, run_kind="busy-period", g=None):
    return {v.code for v in check_spec(spec, run_kind, g)}


# ─────────────────────────────────────────────────────────────
# Taux
# ─────────────────────────────────────────────────────────────

def test_constant_rate():
    rate = RateFunction.constant(0.5)
    assert rate.lambda_h == 0.5
    assert np.all(rate.evaluate([0.0, 1.0, 7.5]) == 0.5)
    assert rate.integral(0.0, 4.0) == 2.0


def test_sinusoid_integral_over_period():
    assert abs(SINUSOID.integral(0.0, 1.0) - 0.4) < 1e-12
    assert abs(SINUSOID.analytic_max() - 0.6) < 1e-12
    assert abs(SINUSOID.analytic_min() - 0.2) < 1e-12


def test_negative_time_rejected():
    try:
        eval_rate(SINUSOID, -1.0)
    except ModelError as e:
        assert e.code == "negative-time"
    else:
        raise AssertionError("ModelError attendue")


def test_sinusoid_requires_period():
    try:
        RateFunction(kind="sinusoid", lambda_h=1.0, base=0.5, amplitude=0.5)
    except ValidationError:
        return
    raise AssertionError("ValidationError attendue")


# ─────────────────────────────────────────────────────────────
# Lois
# ─────────────────────────────────────────────────────────────

def test_marginal_atom_at_infinity():
    y = Marginal.exponential(1.0, atom_at_infinity=0.4)
    assert y.survival_limit == 0.4
    assert abs(float(y.cdf(1e6)) - 0.6) < 1e-12
    q = y.ppf(np.array([0.7, 0.5]))
    assert math.isinf(q[0]) and math.isfinite(q[1])
    assert math.isinf(y.mean())


def test_pareto_moments():
    s = Marginal.pareto(1.5, 2.0 / 3.0)
    assert abs(s.mean() - 2.0) < 1e-9
    assert math.isinf(s.moment(2))


def test_joint_survival_limit():
    assert JointLaw.product_exp().survival_limit == 0.0
    assert JointLaw.infinite_patience(Marginal.exponential(1.0)).survival_limit == 1.0
    half = JointLaw(kind="product", service=Marginal.exponential(1.0),
                    patience=Marginal.exponential(1.0, atom_at_infinity=0.5))
    assert half.survival_limit == 0.5
    assert half.all_join().kind == "infinite-patience"
    assert half.all_join().service == half.service


def test_sample_block_shapes():
    rng = np.random.default_rng(0)
    s, y = JointLaw.product_exp().sample_block(rng, 100)
    assert s.shape == (100,) and y.shape == (100,)
    assert np.all(s > 0) and np.all(y > 0)
    _, y_inf = JointLaw.infinite_patience(Marginal.exponential(1.0)).sample_block(rng, 10)
    assert np.all(np.isinf(y_inf))


# ─────────────────────────────────────────────────────────────
# Coût
# ─────────────────────────────────────────────────────────────

def test_cost_antiderivative():
    assert segment_integral(CostFunction.identity(), 3.0, 0.0) == 4.5
    assert segment_integral(CostFunction.one(), 3.0, 1.0) == 2.0
    assert CostFunction.identity().g0 == 0.0
    assert CostFunction.exp_decay().g0 == 1.0


def test_cost_quadrature_matches_antiderivative():
    g = CostFunction(kind="exp-decay", alpha=0.5, antiderivative=False)
    exact = (1.0 - math.exp(-1.0)) / 0.5
    assert abs(segment_integral(g, 2.0, 0.0) - exact) < 1e-8


def test_reversed_bounds():
    try:
        segment_integral(CostFunction.one(), 1.0, 2.0)
    except SimulationError as e:
        assert e.code == "reversed-bounds"
    else:
        raise AssertionError("SimulationError attendue")


# ─────────────────────────────────────────────────────────────
# Validation
# ─────────────────────────────────────────────────────────────

def test_rate_exceeds_bound():
    spec = QueueSpec(rate=RateFunction.constant(1.0, lambda_h=0.5), joint=JointLaw.product_exp(),
                     init=Init.at(1.0))
    assert "rate-exceeds-bound" in _codes(spec)


def test_cycle_needs_period_and_empty_start():
    spec = QueueSpec(rate=RateFunction.constant(0.5), joint=JointLaw.product_exp(), init=Init.at(1.0))
    codes = _codes(spec, "cycle")
    assert "non-periodic-rate-for-cycle-run" in codes
    assert "invalid-init" in codes
    assert _codes(QueueSpec(rate=SINUSOID, joint=JointLaw.product_exp()), "cycle") == set()


def test_busy_period_needs_workload():
    spec = QueueSpec(rate=SINUSOID, joint=JointLaw.product_exp())
    try:
        validate_spec(spec, "busy-period")
    except SpecError as e:
        assert e.codes == ["invalid-init"]
        assert e.to_dict()["status"] == "error"
    else:
        raise AssertionError("SpecError attendue")


def test_negative_cost():
    spec = QueueSpec(rate=SINUSOID, joint=JointLaw.product_exp(), init=Init.at(1.0))
    assert "negative-cost" in _codes(spec, g=CostFunction(kind="constant", c=-1.0))


def test_fcfs_has_unlimited_room():
    try:
        Discipline(kind="fcfs", room=3)
    except ValidationError:
        pass
    else:
        raise AssertionError("ValidationError attendue")
    assert Discipline.lcfs(2).capacity == 3
    assert math.isinf(Discipline.lcfs(None).capacity)


def test_dominating_keeps_period():
    spec = QueueSpec(rate=SINUSOID, joint=JointLaw.product_exp(), init=Init.at(1.0))
    dom = spec.dominating()
    assert dom.rate.kind == "constant"
    assert dom.rate.level == 0.6 and dom.rate.lambda_h == 0.6 and dom.rate.kappa == 1.0
    assert dom.joint == spec.joint and dom.init == spec.init


def test_render_canonical_stable():
    a = QueueSpec(rate=SINUSOID, joint=JointLaw.product_exp(), init=Init.at(1.0))
    b = QueueSpec.model_validate_json(a.model_dump_json())
    assert render_canonical(a) == render_canonical(b)


if __name__ == "__main__":
    testkit.run_tests(globals(), "Tests du modèle (taux, lois, coût, validation)")
