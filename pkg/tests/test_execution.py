from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from hybridnet.catalog import ball_bounce_times, ball_control, thermostat_control
from hybridnet.execution import (
    ExecutionError,
    IntegratorOptions,
    TimePartition,
    execute,
    pushforward_execution,
    rk4_step,
    universal_system,
    verify_execution,
)
from hybridnet.morphisms import PhaseSpaceMorphism, identity
from hybridnet.phase_space import BoxSpace, HybridPhaseSpace, Interval, TaggedPoint
from hybridnet.stability import inverse_sqrt_log_map, neg_log_map
from hybridnet.systems import check_control, closed_control

BALL_OPTS = IntegratorOptions(step=1e-3, event_refine_tol=1e-9, horizon=3.0)


def test_bounce_times_and_zeno():
    e = execute(ball_control(0.5), TaggedPoint(0, [0.0, 0.5]), BALL_OPTS)
    expected = ball_bounce_times(0.5, 4)
    assert expected == [1.0, 1.5, 1.75, 1.875]
    for got, want in zip(e.jump_times[:4], expected):
        assert abs(got - want) <= 1e-5
    assert e.termination == "zeno"
    assert abs(e.zeno - 2.0) <= 1e-2


def test_thermostat_switch_times():
    e = execute(thermostat_control(), TaggedPoint(1, [0.0]), IntegratorOptions(horizon=10.0))
    for got, want in zip(e.jump_times, [1.0, 3.0, 5.0, 7.0, 9.0]):
        assert abs(got - want) <= 1e-5
    assert [j.target.node for j in e.jumps] == [0, 1, 0, 1, 0]


def test_equilibrium_is_one_constant_arc():
    space = HybridPhaseSpace.build({0: BoxSpace.reals(2)}, name="plane")
    c = closed_control(space, lambda p: np.zeros(2))
    e = execute(c, TaggedPoint(0, [1.0, 2.0]), IntegratorOptions(horizon=1.0))
    assert len(e.arcs) == 1 and not e.jumps
    assert np.all(e.arcs[0].states == [1.0, 2.0])
    assert verify_execution(e, c).passed


def test_universal_system():
    u = universal_system(TimePartition((0.0, 1.0, 2.0)))
    assert check_control(u).passed
    box0, box1 = u.ssub.total.box(0), u.ssub.total.box(1)
    assert (box0.intervals[0].lo, box0.intervals[0].hi) == (0.0, 1.0)
    assert (box1.intervals[0].lo, box1.intervals[0].hi) == (1.0, 2.0)
    e = execute(u, TaggedPoint(0, [0.0]), IntegratorOptions(horizon=2.0))
    assert len(e.arcs) == 2 and len(e.jumps) == 1
    assert abs(e.jump_times[0] - 1.0) <= 1e-9
    assert abs(e.arcs[1].t_end - 2.0) <= 1e-9


def test_partition_rejects_unsorted_times():
    with pytest.raises(ExecutionError):
        TimePartition((0.0, 2.0, 1.0))


def test_execution_verifies_and_defect_is_caught():
    c = ball_control(0.5)
    e = execute(c, TaggedPoint(0, [0.0, 0.5]), IntegratorOptions(horizon=1.9))
    assert verify_execution(e, c, tol=1e-4).passed
    # replace the arc after the first bounce by one leaving with +v instead of -r v
    a = e.arcs[1]
    t = a.times - a.t_start
    v0 = -e.arcs[0].states[-1, 1]
    states = np.column_stack([v0 * t - 0.5 * t**2, v0 - t])
    bad = dataclasses.replace(e, arcs=(e.arcs[0], dataclasses.replace(a, states=states)) + e.arcs[2:])
    rep = verify_execution(bad, c, tol=1e-4)
    assert not rep.passed
    assert any("jump" in i for i in rep.issues)


def test_outside_initial_point_is_rejected():
    with pytest.raises(ExecutionError):
        execute(ball_control(0.5), TaggedPoint(0, [-0.1, 0.0]))


def test_options_must_be_positive():
    with pytest.raises(ExecutionError):
        IntegratorOptions(step=0.0)


def _decay() -> "tuple[HybridPhaseSpace, object]":
    space = HybridPhaseSpace.build({0: BoxSpace.of(Interval.greater_than(0.0))}, name="positive")
    return space, closed_control(space, lambda p: -p.coords)


def test_push_through_identity_is_identical():
    space, c = _decay()
    e = execute(c, TaggedPoint(0, [1.0]), IntegratorOptions(horizon=2.0))
    pushed = pushforward_execution(identity(space), e)
    assert pushed.arcs_csv() == e.arcs_csv()


def test_push_decay_to_cubic_decay():
    space, c = _decay()
    line = HybridPhaseSpace.build({0: BoxSpace.reals(1)}, name="line")
    f = PhaseSpaceMorphism.build(space, line, {0: 0}, {0: inverse_sqrt_log_map()})
    cubic = closed_control(line, lambda p: -p.coords**3)
    e = execute(c, TaggedPoint(0, [1.0]), IntegratorOptions(horizon=5.0))
    assert verify_execution(pushforward_execution(f, e), cubic, tol=1e-4).passed


def test_push_decay_to_drift_is_time():
    space, c = _decay()
    line = HybridPhaseSpace.build({0: BoxSpace.reals(1)}, name="line")
    f = PhaseSpaceMorphism.build(space, line, {0: 0}, {0: neg_log_map()})
    e = execute(c, TaggedPoint(0, [1.0]), IntegratorOptions(horizon=3.0))
    pushed = pushforward_execution(f, e)
    a = pushed.arcs[0]
    assert np.max(np.abs(a.states[:, 0] - a.times)) <= 1e-9


def test_rk4_is_fourth_order_on_exponential_decay():
    # informative companion to the bounce-time order measurement
    errs = []
    steps = (0.1, 0.05, 0.025)
    for h in steps:
        y = np.array([1.0])
        for _ in range(round(1.0 / h)):
            y = rk4_step(lambda x: -x, y, h)
        errs.append(abs(y[0] - math.exp(-1.0)))
    slope = np.polyfit(np.log(steps), np.log(errs), 1)[0]
    assert slope >= 3.8
