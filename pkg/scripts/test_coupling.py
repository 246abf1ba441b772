#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests des couplages : λ ≤ λ_h sur aléa partagé, échelle de salles
LCFS-PR, lots appariés.
"""

import testkit  # noqa: F401  # ajoute src/ au path
from queue_bounds.core.coupling import (
    PAIRED_COLUMNS, BatchConfig, paired_csv, paired_functional_batch,
    run_coupled_rates, run_room_ladder,
)
from queue_bounds.core.errors import SimulationError
from queue_bounds.core.model import (
    CostFunction, Init, JointLaw, Marginal, QueueSpec, RateFunction,
)
from queue_bounds.core.stats import test_st_dominance
from queue_bounds.core.streams import ReplicationStreams

SINUSOID = RateFunction.sinusoid(base=0.4, amplitude=0.2, lambda_h=0.6, kappa=1.0)
PATIENT = QueueSpec(rate=SINUSOID, joint=JointLaw.infinite_patience(Marginal.exponential(1.0)),
                    init=Init.at(1.0))
IMPATIENT = QueueSpec(rate=SINUSOID, joint=JointLaw.product_exp(), init=Init.at(1.0))


def _expect_code(code, fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except SimulationError as e:
        assert e.code == code, e.code
    else:
        raise AssertionError(f"SimulationError({code}) attendue")


# ─────────────────────────────────────────────────────────────
# Couplage des taux
# ─────────────────────────────────────────────────────────────

def test_equal_rates_give_identical_arms():
    spec = PATIENT.with_rate(RateFunction.constant(0.6))
    for rep in range(10):
        pair = run_coupled_rates(spec, CostFunction.identity(), ReplicationStreams(1, rep))
        assert pair.sample_lo.same_values(pair.sample_hi)
        assert pair.shared_marks_ok
        assert pair.pathwise_dominance_ok == "holds"


def test_pathwise_dominance_with_infinite_patience():
    for rep in range(50):
        pair = run_coupled_rates(PATIENT, CostFunction.one(), ReplicationStreams(2, rep))
        assert pair.violations == 0, (rep, pair.first_violation_time)
        assert pair.sample_lo.A <= pair.sample_hi.A + 1e-9
        assert pair.shared_marks_ok


def test_finite_patience_not_checked():
    pair = run_coupled_rates(IMPATIENT, CostFunction.one(), ReplicationStreams(2, 0))
    assert pair.pathwise_dominance_ok == "not-applicable"


def test_window_mode_covers_horizon():
    pair = run_coupled_rates(PATIENT, CostFunction.one(), ReplicationStreams(3, 0), window=20.0)
    assert pair.sample_lo.duration == 20.0 and pair.sample_hi.duration == 20.0
    assert pair.violations == 0


def test_mismatched_bound_rejected():
    _expect_code("coupling-mismatch", run_coupled_rates, PATIENT, CostFunction.one(),
                 ReplicationStreams(0, 0), rate_hi=RateFunction.constant(0.8))


# ─────────────────────────────────────────────────────────────
# Échelle de salles
# ─────────────────────────────────────────────────────────────

def test_ladder_must_end_with_infinity():
    streams = ReplicationStreams(0, 0)
    _expect_code("invalid-ladder", run_room_ladder, IMPATIENT, [0, 1], CostFunction.one(), 5.0, streams)
    _expect_code("invalid-ladder", run_room_ladder, IMPATIENT, [2, 1, None], CostFunction.one(), 5.0,
                 streams)


def test_ladder_converges_above_k_of_u():
    for rep in range(30):
        ladder = run_room_ladder(IMPATIENT, [0, 1, 2, 4, 8, None], CostFunction.one(), 5.0,
                                 ReplicationStreams(4, rep))
        assert ladder.convergence_ok
        assert ladder.K_of_u <= ladder.candidates_in_window
        assert len(ladder.samples) == 6


def test_ladder_without_arrivals():
    spec = IMPATIENT.with_rate(RateFunction.constant(0.0, 0.0))
    ladder = run_room_ladder(spec, [0, None], CostFunction.one(), 5.0, ReplicationStreams(0, 0))
    assert ladder.K_of_u == 0 and ladder.candidates_in_window == 0
    assert ladder.samples[0].same_values(ladder.samples[1])


# ─────────────────────────────────────────────────────────────
# Lots appariés
# ─────────────────────────────────────────────────────────────

def test_rooms_batch_room_zero():
    spec = IMPATIENT.with_rate(RateFunction.constant(0.6))
    batch = paired_functional_batch("rooms", BatchConfig(spec=spec, g=CostFunction.one()), 100, seed=5)
    assert batch.arm_names == ["k=0", "k=inf"]
    assert all(s.duration == 1.0 for s in batch.arms["k=0"])
    assert len(batch.arms["k=inf"]) == 100 and batch.errored_ids == []


def test_more_room_never_lowers_the_functional():
    spec = IMPATIENT.with_rate(RateFunction.constant(0.6))
    cfg = BatchConfig(spec=spec, g=CostFunction.identity(), ladder=[0, 1, 2, None])
    batch = paired_functional_batch("rooms", cfg, 400, seed=11)
    assert batch.arm_names == ["k=0", "k=1", "k=2", "k=inf"]
    for lower, upper in zip(batch.arm_names, batch.arm_names[1:]):
        for attr in ("A", "duration"):
            v = test_st_dominance(batch.values(lower, attr), batch.values(upper, attr), alpha=0.01)
            assert v.verdict == "consistent", (lower, upper, attr, v.statistic, v.critical_value)
        assert batch.values(lower).mean() <= batch.values(upper).mean() + 0.05


def test_rates_batch_independent_arms():
    cfg = BatchConfig(spec=PATIENT, g=CostFunction.one())
    batch = paired_functional_batch("rates", cfg, 100, seed=6, coupled=False)
    assert not batch.coupled and batch.pairs == []
    assert batch.values("lo").shape == (100,)


def test_batch_needs_enough_reps():
    _expect_code("too-few-reps", paired_functional_batch, "rates",
                 BatchConfig(spec=PATIENT, g=CostFunction.one()), 10, 0)


def test_paired_csv_layout():
    batch = paired_functional_batch("rates", BatchConfig(spec=PATIENT, g=CostFunction.one()), 100,
                                    seed=7, threads=2)
    lines = paired_csv(batch).splitlines()
    assert lines[0] == ",".join(PAIRED_COLUMNS)
    assert len(lines) == 1 + 2 * 100
    assert lines[1].startswith("0,lo,") and lines[1].endswith(",holds")


if __name__ == "__main__":
    testkit.run_tests(globals(), "Tests des couplages")
