"""Trajectory distances, empirical stability of a point and its transport along maps.

Stability of ``x0`` means the solution map is continuous at ``x0`` for the
sup distance between trajectories.  Suprema over all forward time cannot be
computed, so every verdict here is truncated to a horizon and says so; a
distance still growing at the horizon is flagged as not horizon-robust.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .execution import rk4_step
from .morphisms import SmoothMap
from .phase_space import BoxSpace, Interval
from .report import Report, jsonable

VectorField = Callable[[np.ndarray], np.ndarray]


class StabilityError(ValueError):
    pass


@dataclass(frozen=True)
class ContinuousSystem:
    """Single-node continuous system ``x' = vector_field(x)`` on an optional box."""

    vector_field: VectorField
    dim: int
    box: "BoxSpace | None" = None
    name: str = ""

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.vector_field(np.asarray(x, dtype=float)), dtype=float).reshape(self.dim)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), dim)

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float).reshape(-1)
        x = np.asarray(self.states, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if t.size == 0:
            raise StabilityError("trajectory has no samples")
        if x.shape[0] != t.size:
            raise StabilityError("times and states have different lengths")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise StabilityError("sample times must start at 0 and strictly increase")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", x)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def resample(self, times: np.ndarray) -> np.ndarray:
        """States at ``times`` by linear interpolation."""
        return np.column_stack([np.interp(times, self.times, self.states[:, k]) for k in range(self.dim)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"x{k}" for k in range(self.dim)])
        for t, x in zip(self.times, self.states):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in x])
        return buf.getvalue()


def integrate(
    system: "ContinuousSystem | VectorField",
    x0: Sequence[float],
    horizon: float,
    step: float = 1e-2,
    escape_bound: float = 1e12,
) -> Trajectory:
    """Fixed-step RK4 trajectory from ``x0`` over ``[0, horizon]``.

    Raises:
        StabilityError: if the state leaves ``escape_bound`` or stops being finite.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    f = system if isinstance(system, ContinuousSystem) else (lambda y: np.atleast_1d(np.asarray(system(y), dtype=float)))
    n = max(1, int(np.ceil(horizon / step - 1e-9)))
    times = np.linspace(0.0, horizon, n + 1)
    states = np.empty((n + 1, x.size))
    states[0] = x
    for k in range(n):
        x = rk4_step(f, x, times[k + 1] - times[k])
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > escape_bound:
            raise StabilityError(
                f"trajectory from {np.asarray(x0).tolist()} escapes before t={times[k + 1]:.6g}"
            )
        states[k + 1] = x
    return Trajectory(times, states)


def _distances(a: Trajectory, b: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    horizon = min(a.horizon, b.horizon)
    if a.times.size == b.times.size and np.array_equal(a.times, b.times):
        t = a.times
        xa, xb = a.states, b.states
    else:
        t = np.union1d(a.times[a.times <= horizon], b.times[b.times <= horizon])
        xa, xb = a.resample(t), b.resample(t)
    return t, np.linalg.norm(xa - xb, axis=1)


def sup_metric(a: Trajectory, b: Trajectory) -> float:
    """Largest Euclidean distance between two trajectories up to their common horizon.

    Trajectories on different time grids are compared on the union of their
    grids by linear interpolation.
    """
    if a.dim != b.dim:
        raise StabilityError("trajectories have different dimensions")
    return float(np.max(_distances(a, b)[1]))


def push_trajectory(f: SmoothMap, a: Trajectory) -> Trajectory:
    return Trajectory(a.times, np.array([np.atleast_1d(f(x)) for x in a.states]))


def lipschitz_bound(f: SmoothMap, points: Sequence[Sequence[float]]) -> float:
    """Largest sampled spectral norm of the Jacobian of ``f``."""
    return max(float(np.linalg.norm(f.differential(p)[0], 2)) for p in points)


def check_system_map(
    f: SmoothMap,
    source: "ContinuousSystem | VectorField",
    target: "ContinuousSystem | VectorField",
    grid: Sequence[Sequence[float]],
    tol: float = 1e-7,
) -> Report:
    """Residual of ``Df(x) . X(x) = Y(f(x))`` over ``grid``."""
    rep = Report("system_map")
    worst = 0.0
    for x in grid:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lhs = f.differential(x)[0] @ np.atleast_1d(np.asarray(source(x), dtype=float))
        rhs = np.atleast_1d(np.asarray(target(np.atleast_1d(f(x))), dtype=float))
        r = float(np.max(np.abs(lhs - rhs)))
        if not np.isfinite(r):
            r = np.inf
        worst = max(worst, r)
        if r > tol:
            rep.fail("map does not relate the vector fields", point=x, residual=r, pushed=lhs, target=rhs)
    rep.metrics.update(max_residual=worst, points=len(grid), tol=tol)
    return rep


@dataclass(frozen=True)
class SearchOptions:
    step: float = 1e-2
    halvings: int = 60  # how far below epsilon to look for a working delta
    refinements: int = 30  # bisection steps once a working delta is bracketed
    directions: int = 4  # extra random unit directions in dimension > 1
    escape_bound: float = 1e12
    growth_window: float = 0.1  # fraction of the horizon inspected for tail growth
    slack: float = 1e-9  # relative allowance for roundoff in the distance comparison
    seed: int = 0


@dataclass
class StabilityVerdict:
    epsilon_grid: list[float]
    delta_found: dict[float, "float | None"]
    stable: bool
    horizon: float
    horizon_robust: bool
    x0: list[float]
    growing: dict[float, bool] = field(default_factory=dict)
    sup_at_delta: dict[float, "float | None"] = field(default_factory=dict)

    @property
    def label(self) -> str:
        if not self.stable:
            return f"unstable up to horizon {self.horizon:g}"
        if not self.horizon_robust:
            return f"stable up to horizon {self.horizon:g}; stability not horizon-robust"
        return f"stable up to horizon {self.horizon:g}"

    def table_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon", "delta", "sup_distance", "growing_at_horizon"])
        for e in self.epsilon_grid:
            d = self.delta_found[e]
            s = self.sup_at_delta.get(e)
            w.writerow([repr(float(e)), "" if d is None else repr(float(d)), "" if s is None else repr(float(s)), int(self.growing.get(e, False))])
        return buf.getvalue()

    def to_dict(self) -> dict[str, Any]:
        return {
            "x0": self.x0,
            "horizon": self.horizon,
            "stable": self.stable,
            "horizon_robust": self.horizon_robust,
            "label": self.label,
            "table": [
                {
                    "epsilon": e,
                    "delta": self.delta_found[e],
                    "sup_distance": self.sup_at_delta.get(e),
                    "growing_at_horizon": self.growing.get(e, False),
                }
                for e in self.epsilon_grid
            ],
        }


def _ring(x0: np.ndarray, opts: SearchOptions) -> list[np.ndarray]:
    """Unit perturbation directions: both signs of each axis plus random ones."""
    n = x0.size
    dirs = [s * e for e in np.eye(n) for s in (1.0, -1.0)]
    if n > 1 and opts.directions:
        rng = np.random.default_rng(opts.seed)
        for v in rng.standard_normal((opts.directions, n)):
            dirs.append(v / np.linalg.norm(v))
    return dirs


def empirical_stability(
    system: "ContinuousSystem | VectorField",
    x0: Sequence[float],
    eps_grid: Sequence[float] = (0.05, 0.1, 0.2),
    horizon: float = 10.0,
    opts: SearchOptions = SearchOptions(),
) -> StabilityVerdict:
    """Search, for each ``epsilon``, a ``delta`` keeping a ring of perturbed starts within ``epsilon``.

    A ``delta`` passes when every start at distance ``delta`` in the ring
    directions stays within ``epsilon`` of the reference trajectory up to the
    horizon.  ``delta = epsilon`` is tried first, then halved until it passes
    and refined by bisection.  Starts outside the system's box are skipped.

    Raises:
        StabilityError: if a probe trajectory escapes before the horizon.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    box = system.box if isinstance(system, ContinuousSystem) else None
    dirs = _ring(x0, opts)
    run = lambda x: integrate(system, x, horizon, opts.step, opts.escape_bound)  # noqa: E731
    ref = run(x0)
    # probe the widest ring before searching so escapes are reported up front
    widest = max(eps_grid)
    for u in dirs:
        start = x0 + widest * u
        if box is None or box.contains(start):
            run(start)

    def worst(delta: float) -> tuple[float, np.ndarray]:
        sup, curve = 0.0, np.zeros_like(ref.times)
        for u in dirs:
            start = x0 + delta * u
            if box is not None and not box.contains(start):
                continue
            _, d = _distances(ref, run(start))
            if d.max() > sup:
                sup, curve = float(d.max()), d
        return sup, curve

    found: dict[float, "float | None"] = {}
    sups: dict[float, "float | None"] = {}
    growing: dict[float, bool] = {}
    for eps in eps_grid:
        ok = lambda s: s <= eps * (1.0 + opts.slack)  # noqa: E731
        delta, (sup, curve) = eps, worst(eps)
        passed = ok(sup)
        k = 0
        while not passed and k < opts.halvings:
            delta *= 0.5
            sup, curve = worst(delta)
            passed = ok(sup)
            k += 1
        if not passed:
            found[eps], sups[eps], growing[eps] = None, None, True
            continue
        if k:
            lo, hi = delta, 2.0 * delta
            best = (sup, curve)
            for _ in range(opts.refinements):
                mid = 0.5 * (lo + hi)
                s, c = worst(mid)
                if ok(s):
                    lo, best = mid, (s, c)
                else:
                    hi = mid
            delta, (sup, curve) = lo, best
        found[eps], sups[eps] = delta, sup
        cut = np.searchsorted(ref.times, (1.0 - opts.growth_window) * horizon)
        earlier = float(np.max(curve[: max(cut, 1)]))
        growing[eps] = bool(curve[-1] > earlier * (1.0 + 1e-6) + 1e-15)
    stable = all(found[e] is not None for e in eps_grid)
    robust = stable and not any(growing.values())
    return StabilityVerdict(list(eps_grid), found, stable, horizon, robust, x0.tolist(), growing, sups)


@dataclass
class TransportReport(Report):
    source: "StabilityVerdict | None" = None
    target: "StabilityVerdict | None" = None
    image: list[float] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        d = super().to_dict()
        d.update(
            source=jsonable(self.source.to_dict()) if self.source else None,
            target=jsonable(self.target.to_dict()) if self.target else None,
            image=jsonable(self.image),
        )
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def check_open_at(f: SmoothMap, x0: Sequence[float], radius: float = 1e-2, samples: int = 8, rank_tol: float = 1e-8) -> Report:
    """Full-rank Jacobian of ``f`` on a small neighbourhood of ``x0``.

    Topological openness cannot be decided; this spot check is its
    computable shadow.
    """
    rep = Report("openness")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    offsets = np.linspace(-radius, radius, samples)
    for k in range(x0.size):
        for o in offsets:
            p = x0.copy()
            p[k] += o
            J = f.differential(p)[0]
            s = np.linalg.svd(J, compute_uv=False)
            if s.size < f.out_dim or s.min() <= rank_tol:
                rep.fail("Jacobian is not of full rank", point=p, singular_values=s)
    return rep


def stability_transport_demo(
    f: SmoothMap,
    source: ContinuousSystem,
    target: ContinuousSystem,
    x0: Sequence[float],
    grid: Sequence[Sequence[float]],
    eps_grid: Sequence[float] = (0.05, 0.1, 0.2),
    horizon: float = 50.0,
    opts: SearchOptions = SearchOptions(),
    tol: float = 1e-7,
) -> TransportReport:
    """Stability of ``x0`` next to stability of ``f(x0)`` for a map of systems.

    Raises:
        StabilityError: if ``f`` does not relate the two vector fields on ``grid``.
    """
    rel = check_system_map(f, source, target, grid, tol)
    if not rel.passed:
        raise StabilityError("map does not relate the systems: " + "; ".join(rel.issues[:3]))
    rep = TransportReport("stability_transport")
    rep.metrics["relatedness_residual"] = rel.metrics["max_residual"]
    op = check_open_at(f, x0)
    if not op.passed:
        rep.merge(op, "openness: ")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    ref = integrate(source, x0, horizon, opts.step, opts.escape_bound)
    rep.metrics["source_trajectory_bound"] = float(np.max(np.linalg.norm(ref.states, axis=1)))
    rep.source = empirical_stability(source, x0, eps_grid, horizon, opts)
    rep.image = np.atleast_1d(f(x0)).tolist()
    rep.target = empirical_stability(target, rep.image, eps_grid, horizon, opts)
    if rep.source.stable and not rep.target.stable:
        rep.fail("source point is stable but its image is not")
    rep.metrics.update(source_stable=rep.source.stable, target_stable=rep.target.stable)
    return rep


def inverse_sqrt_log_map() -> SmoothMap:
    """``f(x) = (1 - 2 log x)^(-1/2)`` on ``0 < x < e^(1/2)``, relating ``x' = -x`` to ``y' = -y^3``."""
    return SmoothMap(
        lambda x: (1.0 - 2.0 * np.log(x)) ** -0.5,
        1,
        1,
        lambda x: np.array([[((1.0 - 2.0 * np.log(x[0])) ** -1.5) / x[0]]]),
    )


def neg_log_map() -> SmoothMap:
    """``f(x) = -log x`` on ``x > 0``, relating ``x' = -x`` to ``y' = 1``."""
    return SmoothMap(lambda x: -np.log(x), 1, 1, lambda x: np.array([[-1.0 / x[0]]]))


def decay_system() -> ContinuousSystem:
    return ContinuousSystem(lambda x: -x, 1, BoxSpace.of(Interval.greater_than(0.0)), "decay")


def cubic_decay_system() -> ContinuousSystem:
    return ContinuousSystem(lambda y: -(y**3), 1, None, "cubic decay")


def drift_system() -> ContinuousSystem:
    return ContinuousSystem(lambda y: np.ones_like(y), 1, None, "drift")


def growth_system() -> ContinuousSystem:
    return ContinuousSystem(lambda x: x, 1, None, "growth")


__all__ = [
    "ContinuousSystem",
    "SearchOptions",
    "StabilityError",
    "StabilityVerdict",
    "Trajectory",
    "TransportReport",
    "check_open_at",
    "check_system_map",
    "cubic_decay_system",
    "decay_system",
    "drift_system",
    "empirical_stability",
    "growth_system",
    "integrate",
    "inverse_sqrt_log_map",
    "lipschitz_bound",
    "neg_log_map",
    "push_trajectory",
    "stability_transport_demo",
    "sup_metric",
]
