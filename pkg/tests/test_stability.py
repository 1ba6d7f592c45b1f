from __future__ import annotations

import math

import numpy as np
import pytest

from hybridnet.morphisms import SmoothMap
from hybridnet.stability import (
    StabilityError,
    Trajectory,
    check_system_map,
    cubic_decay_system,
    decay_system,
    drift_system,
    empirical_stability,
    growth_system,
    integrate,
    inverse_sqrt_log_map,
    neg_log_map,
    stability_transport_demo,
    sup_metric,
)

EPS = (0.05, 0.1, 0.2)
GRID = [[x] for x in np.linspace(0.2, 1.6, 201)]


def test_sup_metric_of_identical_trajectories_is_zero():
    a = integrate(decay_system(), [1.0], 5.0)
    assert sup_metric(a, a) == 0.0


def test_sup_metric_of_two_decays_is_the_initial_gap():
    a = integrate(decay_system(), [1.0], 5.0)
    b = integrate(decay_system(), [2.0], 5.0)
    assert sup_metric(a, b) == pytest.approx(1.0, abs=1e-6)


def test_sup_metric_of_two_growths_is_the_final_gap():
    a = integrate(growth_system(), [0.0], 5.0)
    b = integrate(growth_system(), [0.1], 5.0)
    assert sup_metric(a, b) == pytest.approx(0.1 * math.exp(5.0), rel=1e-2)


def test_sup_metric_on_different_grids():
    a = Trajectory(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 2.0]))
    b = Trajectory(np.array([0.0, 0.5, 2.0]), np.array([0.0, 0.0, 0.0]))
    assert sup_metric(a, b) == 2.0


def test_trajectory_rejects_bad_times():
    with pytest.raises(StabilityError):
        Trajectory(np.array([0.0, 0.0]), np.array([1.0, 1.0]))


def test_escape_is_reported():
    with pytest.raises(StabilityError):
        integrate(lambda x: x**2, [1.0], 2.0)


def test_system_map_residuals():
    rep = check_system_map(inverse_sqrt_log_map(), decay_system(), cubic_decay_system(), GRID)
    assert rep.passed and rep.metrics["max_residual"] <= 1e-7
    rep = check_system_map(neg_log_map(), decay_system(), drift_system(), GRID, tol=1e-9)
    assert rep.passed and rep.metrics["max_residual"] <= 1e-9
    ident = SmoothMap.linear([[1.0]])
    rep = check_system_map(ident, decay_system(), decay_system(), GRID)
    assert rep.metrics["max_residual"] == 0.0


def test_wrong_target_is_rejected():
    rep = check_system_map(neg_log_map(), decay_system(), cubic_decay_system(), GRID)
    assert not rep.passed and rep.witnesses


def test_decay_is_stable_with_delta_equal_epsilon():
    v = empirical_stability(decay_system(), [1.0], EPS, horizon=10.0)
    assert v.stable and v.horizon_robust
    assert all(v.delta_found[e] == e for e in EPS)


def test_drift_is_stable():
    v = empirical_stability(drift_system(), [0.0], EPS, horizon=10.0)
    assert v.stable and v.horizon_robust
    assert all(v.delta_found[e] == e for e in EPS)


def test_growth_needs_a_tiny_delta_and_is_not_horizon_robust():
    v = empirical_stability(growth_system(), [0.0], EPS, horizon=10.0)
    assert v.stable and not v.horizon_robust
    assert "not horizon-robust" in v.label
    for e in EPS:
        assert v.delta_found[e] <= e * math.exp(-10.0) * (1.0 + 1e-6)
        assert v.delta_found[e] >= 0.5 * e * math.exp(-10.0)


@pytest.mark.parametrize(
    "f, target, x0",
    [(inverse_sqrt_log_map(), cubic_decay_system(), 1.0), (neg_log_map(), drift_system(), 1.0)],
    ids=["cubic", "drift"],
)
def test_stability_is_transported(f, target, x0):
    rep = stability_transport_demo(f, decay_system(), target, [x0], GRID, EPS, horizon=50.0)
    assert rep.passed, rep.issues
    assert rep.source.stable and rep.target.stable
    assert rep.image == pytest.approx([float(f(np.array([x0]))[0])])


def test_identity_map_gives_identical_verdicts():
    ident = SmoothMap.linear([[1.0]])
    rep = stability_transport_demo(ident, decay_system(), decay_system(), [1.0], GRID, EPS, horizon=20.0)
    assert rep.source.to_dict() == rep.target.to_dict()


def test_unrelated_systems_are_refused():
    with pytest.raises(StabilityError):
        stability_transport_demo(neg_log_map(), decay_system(), cubic_decay_system(), [1.0], GRID, EPS)
