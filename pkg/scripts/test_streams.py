#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests des flux adressables et de l'amincissement : reproductibilité par
(seed, réplication, voie), marques partagées entre taux, cas λ_h = 0.
"""

import math

import numpy as np

import testkit  # noqa: F401  # ajoute src/ au path
from queue_bounds.core.errors import StreamError
from queue_bounds.core.model import JointLaw, Marginal, RateFunction
from queue_bounds.core.pool import run_replications
from queue_bounds.core.streams import (
    CandidateStream, Lane, ReplicationStreams, count_arrivals, next_arrival, sample_joint,
)
from queue_bounds.core.stats import mean_with_se

SINUSOID = RateFunction.sinusoid(base=0.5, amplitude=0.5, lambda_h=1.0, kappa=1.0)


def _first(streams, rate, joint=None, k=20):
    cands = CandidateStream(streams, rate, joint)
    return [cands.next() for _ in range(k)]


def test_same_address_same_draws():
    a = _first(ReplicationStreams(7, 3), SINUSOID, JointLaw.product_exp())
    b = _first(ReplicationStreams(7, 3), SINUSOID, JointLaw.product_exp())
    assert a == b


def test_other_replication_other_draws():
    a = _first(ReplicationStreams(7, 3), SINUSOID)
    b = _first(ReplicationStreams(7, 4), SINUSOID)
    assert [c[0] for c in a] != [c[0] for c in b]


def test_arm_index_separates_streams():
    a = _first(ReplicationStreams(7, 3, arm=0), SINUSOID)
    b = _first(ReplicationStreams(7, 3, arm=1), SINUSOID)
    assert [c[0] for c in a] != [c[0] for c in b]


def test_fresh_replays_from_start():
    streams = ReplicationStreams(11, 0)
    a = _first(streams, SINUSOID)
    b = _first(streams.fresh(), SINUSOID)
    assert a == b


def test_marks_shared_across_rates():
    joint = JointLaw.product_exp()
    lo = _first(ReplicationStreams(5, 1), SINUSOID, joint, 300)
    hi = _first(ReplicationStreams(5, 1), RateFunction.constant(1.0), joint, 300)
    assert [c[0] for c in lo] == [c[0] for c in hi]
    assert [(c[2], c[3]) for c in lo] == [(c[2], c[3]) for c in hi]
    assert all(c[1] for c in hi)
    # Amincissement emboîté : accepté en λ ⇒ accepté en λ_h
    assert all(h[1] for l, h in zip(lo, hi) if l[1])


def test_zero_rate():
    rate = RateFunction.constant(0.0, 0.0)
    assert CandidateStream(ReplicationStreams(0, 0), rate).next() is None
    assert count_arrivals(ReplicationStreams(0, 0), rate, 10.0) == (0, 0)
    assert next_arrival(ReplicationStreams(0, 0), rate, 0.0, 10.0) is None


def test_rate_zero_below_positive_bound_accepts_nothing():
    rate = RateFunction.constant(0.0, lambda_h=1.0)
    cands, accepted = count_arrivals(ReplicationStreams(0, 0), rate, 50.0)
    assert cands > 0 and accepted == 0


def test_next_arrival_window():
    try:
        next_arrival(ReplicationStreams(0, 0), SINUSOID, 2.0, 1.0)
    except StreamError as e:
        assert e.code == "invalid-window"
    else:
        raise AssertionError("StreamError attendue")
    t = next_arrival(ReplicationStreams(0, 0), RateFunction.constant(1.0), 0.0, 1e6)
    assert t is not None and 0.0 < t <= 1e6


def test_next_arrival_continues_the_candidate_sequence():
    rate = RateFunction.constant(0.5, 1.0)
    expected = [c[0] for c in CandidateStream(ReplicationStreams(4, 0), rate).candidates_until(200.0)
                if c[1]][:20]
    streams, t, got = ReplicationStreams(4, 0), 0.0, []
    while len(got) < len(expected):
        t = next_arrival(streams, rate, t, 1e6)
        got.append(t)
    assert len(expected) == 20
    assert got == expected


def test_sample_joint_lane():
    streams = ReplicationStreams(0, 0)
    s, y = sample_joint(streams.marks, JointLaw.product_exp())
    assert s > 0 and y > 0
    try:
        sample_joint(streams.arrivals, JointLaw.product_exp())
    except StreamError as e:
        assert e.code == "wrong-lane"
    else:
        raise AssertionError("StreamError attendue")
    assert Lane.MARKS.label == "marks"


def test_comonotone_marks_are_ordered():
    laws = (
        JointLaw(kind="comonotone", service=Marginal.exponential(1.0), patience=Marginal.exponential(2.0)),
        JointLaw(kind="comonotone", service=Marginal.exponential(1.0), phi_scale=2.0, phi_power=0.5),
    )
    for joint in laws:
        marks = ReplicationStreams(3, 0).marks
        s, y = np.array([sample_joint(marks, joint) for _ in range(200)]).T
        assert np.all(np.subtract.outer(s, s) * np.subtract.outer(y, y) >= 0.0)


def test_thinned_mean_count():
    reps = 2000
    result = run_replications(lambda r: count_arrivals(ReplicationStreams(3, r), SINUSOID, 1.0)[1],
                              range(reps))
    mean, se = mean_with_se(result.ordered())
    assert abs(mean - 0.5) <= 4.0 * se, (mean, se)


def test_candidate_gaps_are_rate_lambda_h():
    cands = CandidateStream(ReplicationStreams(9, 0), SINUSOID).candidates_until(5000.0)
    gaps = np.diff([0.0] + [c[0] for c in cands])
    assert abs(gaps.mean() - 1.0) < 5.0 / math.sqrt(gaps.size)


def test_thread_count_does_not_change_draws():
    def task(r):
        return _first(ReplicationStreams(2, r), SINUSOID, JointLaw.product_exp(), 50)
    one = run_replications(task, range(16), threads=1).ordered()
    four = run_replications(task, range(16), threads=4).ordered()
    assert one == four


if __name__ == "__main__":
    testkit.run_tests(globals(), "Tests des flux et de l'amincissement")
