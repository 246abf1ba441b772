#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests du moteur à événements : drainage déterministe, salle k = 0,
cycles régénératifs, horizon, plafonds, rejeu des décisions.
"""

import math

import testkit  # noqa: F401  # ajoute src/ au path
from queue_bounds.core.bounds import mg1_oracles
from queue_bounds.core.errors import SimulationError, SpecError
from queue_bounds.core.model import (
    CostFunction, Init, JointLaw, Marginal, QueueSpec, RateFunction,
)
from queue_bounds.core.pool import run_replications
from queue_bounds.core.simulator import (
    TRACE_COLUMNS, SimCaps, first_multiple, one_step_drift, replay_decisions,
    run_busy_period, run_cycle, run_horizon, run_until_long_idle, trace_csv,
)
from queue_bounds.core.stats import mean_with_se
from queue_bounds.core.streams import ReplicationStreams

SINUSOID = RateFunction.sinusoid(base=0.4, amplitude=0.2, lambda_h=0.6, kappa=1.0)
DRAIN = QueueSpec(rate=RateFunction.constant(0.0, 0.0),
                  joint=JointLaw.infinite_patience(Marginal.exponential(1.0)), init=Init.at(3.0))
PRODUCT = QueueSpec(rate=SINUSOID, joint=JointLaw.product_exp(), init=Init.at(1.0))


# ─────────────────────────────────────────────────────────────
# Périodes d'activité
# ─────────────────────────────────────────────────────────────

def test_deterministic_drain():
    path, s = run_busy_period(DRAIN, CostFunction.identity(), ReplicationStreams(0, 0), record=True)
    assert s.duration == 3.0
    assert abs(s.A - 4.5) <= 1e-12
    assert s.eta_star == 0 and s.A_star == 0.0
    assert path.end_reason == "tau-hit" and not s.cap_exceeded


def test_drain_constant_cost():
    _, s = run_busy_period(DRAIN, CostFunction.one(), ReplicationStreams(0, 0))
    assert s.A == 3.0


def test_workload_reconstruction():
    path, _ = run_busy_period(DRAIN, CostFunction.one(), ReplicationStreams(0, 0), record=True)
    assert path.workload_at(1.0) == 2.0 and path.workload_at(5.0) == 0.0
    path, _ = run_busy_period(PRODUCT, CostFunction.one(), ReplicationStreams(5, 0), record=True)
    for e in path.arrivals():
        assert abs(path.workload_at(e.time) - (e.w_pre + e.jump)) <= 1e-9


def test_room_zero_refuses_everyone():
    spec = PRODUCT.with_room(0)
    for rep in range(20):
        _, s = run_busy_period(spec, CostFunction.one(), ReplicationStreams(1, rep))
        assert s.duration == 1.0
        assert s.eta_star == 0
        assert s.balk_patience == 0


def test_infinite_patience_never_balks():
    spec = QueueSpec(rate=RateFunction.constant(0.5),
                     joint=JointLaw.infinite_patience(Marginal.exponential(1.0)), init=Init.at(1.0))
    for rep in range(20):
        _, s = run_busy_period(spec, CostFunction.one(), ReplicationStreams(1, rep))
        assert s.balk_patience == 0 and s.balk_room == 0
        assert s.duration >= 1.0


def test_a_star_counts_joins_for_unit_cost():
    for rep in range(20):
        _, s = run_busy_period(PRODUCT, CostFunction.one(), ReplicationStreams(4, rep))
        assert s.A_star == float(s.eta_star)
        assert abs(s.A - s.duration) < 1e-9


def test_fcfs_and_lcfs_share_the_workload():
    patient = PRODUCT.with_joint(JointLaw.infinite_patience(Marginal.exponential(1.0)))
    cyclic = patient.model_copy(update={"init": Init()})
    for rep in range(20):
        _, fcfs = run_busy_period(patient, CostFunction.identity(), ReplicationStreams(7, rep))
        _, lcfs = run_busy_period(patient.with_room(None), CostFunction.identity(),
                                  ReplicationStreams(7, rep))
        assert fcfs.same_values(lcfs)
        _, fcfs = run_cycle(cyclic, CostFunction.identity(), ReplicationStreams(7, rep))
        _, lcfs = run_cycle(cyclic.with_room(None), CostFunction.identity(), ReplicationStreams(7, rep))
        assert fcfs.same_values(lcfs) and fcfs.cycle_index == lcfs.cycle_index


def test_all_join_dominates_on_every_path():
    all_join = PRODUCT.with_joint(PRODUCT.joint.all_join())
    for rep in range(30):
        _, impatient = run_busy_period(PRODUCT, CostFunction.identity(), ReplicationStreams(9, rep))
        _, everyone = run_busy_period(all_join, CostFunction.identity(), ReplicationStreams(9, rep))
        assert everyone.duration >= impatient.duration
        assert everyone.A >= impatient.A - 1e-12
        assert everyone.eta_star >= impatient.eta_star


def test_busy_period_rejects_empty_start():
    try:
        run_busy_period(PRODUCT.model_copy(update={"init": Init()}), CostFunction.one(),
                        ReplicationStreams(0, 0))
    except SpecError as e:
        assert "invalid-init" in e.codes
    else:
        raise AssertionError("SpecError attendue")


def test_replay_decisions_match():
    for rep in range(10):
        path, _ = run_busy_period(PRODUCT, CostFunction.one(), ReplicationStreams(8, rep), record=True)
        assert replay_decisions(path, PRODUCT) == []


def test_trace_columns():
    path, _ = run_busy_period(PRODUCT, CostFunction.one(), ReplicationStreams(8, 0), record=True)
    lines = trace_csv(path).splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    assert len(lines) == len(path.events) + 1


# ─────────────────────────────────────────────────────────────
# Cycles et horizons
# ─────────────────────────────────────────────────────────────

def test_first_multiple():
    assert first_multiple(0.0, 1.0) == 1
    assert first_multiple(2.0, 1.0) == 2
    assert first_multiple(2.1, 1.0) == 3


def test_cycle_ends_on_multiple_of_period():
    spec = PRODUCT.model_copy(update={"init": Init()})
    for rep in range(20):
        _, s = run_cycle(spec, CostFunction.one(), ReplicationStreams(2, rep))
        assert s.cycle_index >= 1
        assert s.duration == s.cycle_index * 1.0
        assert abs(s.A - s.duration) < 1e-9


def test_horizon_drain():
    _, res = run_horizon(DRAIN, 5.0, CostFunction.identity(), ReplicationStreams(0, 0))
    assert res.integral == 4.5
    assert res.time_average == 0.9
    assert res.end_workload == 0.0 and res.end_queue_length == 0


def test_horizon_must_be_positive():
    try:
        run_horizon(DRAIN, 0.0, CostFunction.one(), ReplicationStreams(0, 0))
    except SimulationError as e:
        assert e.code == "invalid-horizon"
    else:
        raise AssertionError("SimulationError attendue")


def test_event_cap():
    spec = QueueSpec(rate=RateFunction.constant(2.0),
                     joint=JointLaw.infinite_patience(Marginal.exponential(1.0)), init=Init.at(1000.0))
    _, s = run_busy_period(spec, CostFunction.one(), ReplicationStreams(0, 0), SimCaps(max_events=50))
    assert s.cap_exceeded and s.end_reason == "horizon"
    assert math.isfinite(s.A)


def test_long_idle_decomposition():
    spec = PRODUCT.model_copy(update={"init": Init()})
    for rep in range(20):
        d = run_until_long_idle(spec, CostFunction.one(), ReplicationStreams(6, rep))
        assert not d.cap_exceeded
        assert d.iota == len(d.idle_lengths) + 1
        assert all(i <= 1.0 for i in d.idle_lengths)
        assert d.cycle is not None
        assert d.cycle.A <= d.A_bar + 1e-9


def test_cycle_without_arrivals():
    spec = QueueSpec(rate=RateFunction.constant(0.0, 0.0, kappa=2.0), joint=JointLaw.product_exp())
    _, s = run_cycle(spec, CostFunction.one(), ReplicationStreams(0, 0))
    assert s.duration == 2.0 and s.cycle_index == 1
    assert s.A == 2.0 and s.eta_star == 0


def _idle_time(path, xi):
    """Temps passé à W = 0 sur [0, ξ], d'après le journal (file vide en 0)."""
    idle, idle_start = 0.0, 0.0
    for e in path.events:
        if e.kind == "empty-hit":
            idle_start = e.time
        elif e.kind == "join" and idle_start is not None:
            idle += e.time - idle_start
            idle_start = None
    if idle_start is not None:
        idle += xi - idle_start
    return idle


def test_busy_indicator_partitions_cycle():
    spec = PRODUCT.model_copy(update={"init": Init()})
    busy = CostFunction.indicator(0.0)
    for rep in range(20):
        path, s = run_cycle(spec, busy, ReplicationStreams(8, rep), record=True)
        served = math.fsum(e.jump for e in path.joins())
        assert abs(s.A - served) <= 1e-9 * max(1.0, s.duration)
        assert abs(s.A + _idle_time(path, s.duration) - s.duration) <= 1e-9 * max(1.0, s.duration)


def test_long_idle_without_arrivals():
    spec = QueueSpec(rate=RateFunction.constant(0.0, 0.0, kappa=2.0), joint=JointLaw.product_exp())
    d = run_until_long_idle(spec, CostFunction.one(), ReplicationStreams(0, 0))
    assert d.iota == 1 and d.zeta == 2.0 and d.A_bar == 2.0
    assert d.idle_lengths == [] and d.busy_lengths == []


def test_long_idle_index_is_geometric():
    # écarts Exp(λ) : une inactivité dépasse κ avec probabilité e^{−κλ}
    spec = QueueSpec(rate=RateFunction.constant(0.6, kappa=1.0), joint=JointLaw.product_exp())
    iotas = [run_until_long_idle(spec, CostFunction.one(), ReplicationStreams(12, r),
                                 validate=r == 0).iota for r in range(4000)]
    mean, se = mean_with_se(iotas)
    assert abs(mean - math.exp(0.6)) <= 4.0 * se, (mean, se)


def test_horizon_matches_pollaczek_khinchine():
    spec = QueueSpec(rate=RateFunction.constant(0.5),
                     joint=JointLaw.infinite_patience(Marginal.exponential(1.0)))
    averages = [run_horizon(spec, 1e4, CostFunction.identity(), ReplicationStreams(13, r),
                            validate=r == 0)[1].time_average for r in range(20)]
    mean, se = mean_with_se(averages)
    pk = mg1_oracles(0.5, Marginal.exponential(1.0))["pk_mean_workload"]
    assert pk == 1.0
    assert abs(mean - pk) <= 4.0 * se + 0.02, (mean, se)


def test_thread_count_does_not_change_results():
    def task(r):
        return run_busy_period(PRODUCT, CostFunction.identity(), ReplicationStreams(3, r))[1].A
    one = run_replications(task, range(32), threads=1).ordered()
    four = run_replications(task, range(32), threads=4).ordered()
    assert one == four


def test_one_step_drift_bound():
    spec = QueueSpec(rate=RateFunction.constant(0.5), joint=JointLaw.product_exp(), init=Init.at(2.0))
    d = one_step_drift(spec, 5.0, 500, seed=1)
    assert d["reps"] == 500
    assert abs(d["bound"] - 0.5 * math.exp(-4.0)) < 1e-12
    assert d["ok"]


if __name__ == "__main__":
    testkit.run_tests(globals(), "Tests du moteur de simulation")
