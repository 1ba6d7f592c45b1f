"""Executions of closed deterministic hybrid systems.

The flow is integrated with fixed-step classical Runge-Kutta, iterates are
clamped into the node box, and an arc ends at the first time a step reaches a
point where an event function is non-positive and the jump map moves the
point.  That time is localized by bisection on Runge-Kutta sub-steps from the
start of the step.  Runs are deterministic: equal inputs give bit-identical
executions.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .morphisms import PhaseSpaceMorphism, apply, is_closed
from .phase_space import (
    BoxSpace,
    EdgeId,
    HybridPhaseSpace,
    Interval,
    JumpRelation,
    NodeId,
    TaggedPoint,
    lambda_lookup,
)
from .report import Report
from .systems import DeterministicControl, check_control, check_idempotent, closed_control

HORIZON = "horizon"
MAX_JUMPS = "max_jumps"
ZENO = "zeno"
LEFT_DOMAIN = "left_domain"


class ExecutionError(ValueError):
    pass


@dataclass(frozen=True)
class TimePartition:
    """Strictly increasing transition times; the last one may be infinite."""

    times: tuple[float, ...]

    def __post_init__(self) -> None:
        ts = tuple(float(t) for t in self.times)
        object.__setattr__(self, "times", ts)
        if not ts or not math.isfinite(ts[0]):
            raise ExecutionError("a time partition needs a finite first time")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ExecutionError(f"time partition is not strictly increasing: {ts}")
        if any(math.isinf(t) for t in ts[:-1]):
            raise ExecutionError("only the last time of a partition may be infinite")


@dataclass(frozen=True)
class IntegratorOptions:
    step: float = 1e-3
    event_refine_tol: float = 1e-9
    max_jumps: int = 1000
    min_dwell: float = 1e-4
    horizon: float = 10.0

    def __post_init__(self) -> None:
        for name in ("step", "event_refine_tol", "max_jumps", "min_dwell", "horizon"):
            if not getattr(self, name) > 0:
                raise ExecutionError(f"integrator option {name} must be positive")


@dataclass(frozen=True)
class Arc:
    node: NodeId
    t_start: float
    t_end: float
    times: np.ndarray
    states: np.ndarray  # one row per sample time

    def start(self) -> TaggedPoint:
        return TaggedPoint(self.node, self.states[0])

    def end(self) -> TaggedPoint:
        return TaggedPoint(self.node, self.states[-1])

    def at(self, t: float) -> np.ndarray:
        """Linear interpolation of the recorded samples."""
        if self.states.shape[1] == 0:
            return np.zeros(0)
        return np.array([np.interp(t, self.times, self.states[:, k]) for k in range(self.states.shape[1])])


@dataclass(frozen=True)
class JumpRecord:
    t: float
    source: TaggedPoint
    target: TaggedPoint
    edge: "EdgeId | None"


@dataclass(frozen=True)
class Execution:
    """Alternating arcs and jumps; a jump before the first arc is possible."""

    arcs: tuple[Arc, ...]
    jumps: tuple[JumpRecord, ...]
    termination: str
    zeno: "float | None" = None
    initial_jump: bool = False

    @property
    def partition(self) -> TimePartition:
        ts = [self.arcs[0].t_start] + [a.t_end for a in self.arcs]
        return TimePartition(tuple(_strict(ts)))

    @property
    def jump_times(self) -> list[float]:
        return [j.t for j in self.jumps]

    def final(self) -> TaggedPoint:
        return self.arcs[-1].end()

    def locate(self, t: float) -> "tuple[int, np.ndarray] | None":
        """Arc index and interpolated state at time ``t`` (latest arc wins at jumps)."""
        for k in range(len(self.arcs) - 1, -1, -1):
            a = self.arcs[k]
            if a.t_start <= t <= a.t_end:
                return k, a.at(t)
        return None

    def arcs_csv(self) -> str:
        dim = max((a.states.shape[1] for a in self.arcs), default=0)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["arc_index", "node", "t"] + [f"coord_{k}" for k in range(dim)])
        for i, a in enumerate(self.arcs):
            for t, y in zip(a.times, a.states):
                row = [i, _node_str(a.node), repr(float(t))] + [repr(float(v)) for v in y]
                w.writerow(row + [""] * (dim - len(y)))
        return buf.getvalue()

    def jumps_csv(self) -> str:
        dim = max([len(j.source.coords) for j in self.jumps] + [len(j.target.coords) for j in self.jumps] + [0])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["t", "from_node"]
            + [f"from_{k}" for k in range(dim)]
            + ["to_node"]
            + [f"to_{k}" for k in range(dim)]
            + ["edge"]
        )
        for j in self.jumps:
            src = [repr(float(v)) for v in j.source.coords]
            tgt = [repr(float(v)) for v in j.target.coords]
            w.writerow(
                [repr(float(j.t)), _node_str(j.source.node)]
                + src
                + [""] * (dim - len(src))
                + [_node_str(j.target.node)]
                + tgt
                + [""] * (dim - len(tgt))
                + [_node_str(j.edge)]
            )
        return buf.getvalue()

    def write_csv(self, out_dir: "str | Path", stem: str = "execution") -> tuple[Path, Path]:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        pa, pj = d / f"{stem}_arcs.csv", d / f"{stem}_jumps.csv"
        pa.write_text(self.arcs_csv())
        pj.write_text(self.jumps_csv())
        return pa, pj

    def summary(self) -> dict:
        return {
            "arcs": len(self.arcs),
            "jumps": len(self.jumps),
            "jump_times": self.jump_times,
            "termination": self.termination,
            "zeno_estimate": self.zeno,
            "final": self.final().to_dict(),
        }


def _strict(ts: list[float]) -> list[float]:
    out = [ts[0]]
    for t in ts[1:]:
        if t > out[-1]:
            out.append(t)
    return out


def _node_str(node: object) -> str:
    if node is None:
        return ""
    if isinstance(node, tuple):
        return "(" + ",".join(_node_str(n) for n in node) + ")"
    return str(node)


def rk4_step(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def zeno_estimate(jump_times: Sequence[float]) -> "float | None":
    """Geometric extrapolation of the accumulation time from the last three gaps."""
    if len(jump_times) < 4:
        return None
    g1, _, g3 = np.diff(np.asarray(jump_times[-4:], dtype=float))
    if g1 <= 0 or g3 <= 0:
        return float(jump_times[-1])
    q = math.sqrt(g3 / g1)
    if q >= 1:
        return None
    return float(jump_times[-1] + g3 * q / (1.0 - q))


def execute(
    c: DeterministicControl,
    x0: TaggedPoint,
    opts: "IntegratorOptions | None" = None,
    check: bool = True,
    check_samples: int = 8,
) -> Execution:
    """Unique execution from ``x0``.

    Raises:
        ExecutionError: for open systems, points outside the space, or controls
            failing the control or idempotency checks.
    """
    opts = opts or IntegratorOptions()
    if not is_closed(c.ssub):
        raise ExecutionError("executions are defined for closed systems")
    space = c.ssub.total
    box = space.box(x0.node)
    bad = box.violation(x0.coords)
    if bad is not None:
        raise ExecutionError(f"initial point {x0!r} outside node box {box} (coordinate {bad[0]} = {bad[1]!r})")
    if check:
        rep = check_control(c, samples=check_samples)
        if not rep.passed:
            raise ExecutionError("control check failed: " + "; ".join(rep.issues[:3]))
        ok, rep = check_idempotent(c, samples=check_samples, tol=1e-12)
        if not ok:
            raise ExecutionError("jump map is not idempotent: " + "; ".join(rep.issues[:3]))

    t = 0.0
    x = x0
    jumps: list[JumpRecord] = []
    arcs: list[Arc] = []
    initial_jump = False
    q = c.rho(x)
    if not q.close_to(x, 0.0):
        jumps.append(JumpRecord(t, x, q, lambda_lookup(space, x, q, 1e-9)))
        x = q
        initial_jump = True

    short_dwells = 0
    zeno = None
    termination = HORIZON
    while True:
        node = x.node
        nbox = space.box(node)

        def f(y: np.ndarray, node: NodeId = node) -> np.ndarray:
            return c.X(TaggedPoint(node, y))

        def triggered(y: np.ndarray, node: NodeId = node) -> bool:
            p = TaggedPoint(node, y)
            ev = c.event_value(p)
            if ev is not None and ev > 0:
                return False
            return not c.rho(p).close_to(p, 0.0)

        t_start = t
        y = np.array(x.coords, dtype=float)
        times = [t]
        states = [y.copy()]
        ended = None
        while ended is None:
            remaining = opts.horizon - t
            if remaining <= 0:
                ended = HORIZON
                break
            dt = min(opts.step, remaining)
            raw = rk4_step(f, y, dt)
            y_new = nbox.clamp(raw) if nbox.dim else raw
            if triggered(y_new):
                s = _bisect(lambda s: triggered(_sub(f, nbox, y, s)), dt, opts.event_refine_tol)
                t = t + s
                y = _sub(f, nbox, y, s)
                times.append(t)
                states.append(y.copy())
                ended = "jump"
            elif not np.array_equal(raw, y_new):
                s = _bisect(lambda s: not np.array_equal(*_sub2(f, nbox, y, s)), dt, opts.event_refine_tol)
                t = t + s
                y = _sub(f, nbox, y, s)
                times.append(t)
                states.append(y.copy())
                ended = LEFT_DOMAIN
            else:
                t = t + dt
                y = y_new
                times.append(t)
                states.append(y.copy())
        arcs.append(Arc(node, t_start, t, np.array(times), np.array(states).reshape(len(times), -1)))
        if ended != "jump":
            termination = ended
            break
        p = TaggedPoint(node, y)
        q = c.rho(p)
        jumps.append(JumpRecord(t, p, q, lambda_lookup(space, p, q, 1e-9)))
        x = q
        short_dwells = short_dwells + 1 if (t - t_start) < opts.min_dwell else 0
        if short_dwells >= 3:
            zeno = zeno_estimate([j.t for j in jumps])
            arcs.append(Arc(q.node, t, t, np.array([t]), q.coords.reshape(1, -1).copy()))
            termination = ZENO
            break
        if len(jumps) >= opts.max_jumps:
            arcs.append(Arc(q.node, t, t, np.array([t]), q.coords.reshape(1, -1).copy()))
            termination = MAX_JUMPS
            break
    return Execution(tuple(arcs), tuple(jumps), termination, zeno, initial_jump)


def _sub(f, box: BoxSpace, y: np.ndarray, s: float) -> np.ndarray:
    raw = rk4_step(f, y, s)
    return box.clamp(raw) if box.dim else raw


def _sub2(f, box: BoxSpace, y: np.ndarray, s: float) -> tuple[np.ndarray, np.ndarray]:
    raw = rk4_step(f, y, s)
    return raw, (box.clamp(raw) if box.dim else raw)


def _bisect(pred: Callable[[float], bool], hi: float, tol: float) -> float:
    """Smallest ``s`` in ``(0, hi]`` with ``pred(s)``, up to ``tol``; ``pred(hi)`` holds."""
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def universal_system(partition: TimePartition) -> DeterministicControl:
    """Clock on consecutive intervals, jumping only at right endpoints."""
    ts = partition.times
    n = max(len(ts) - 1, 1)
    nodes: dict[NodeId, BoxSpace] = {}
    for j in range(n):
        lo = ts[j]
        hi = ts[j + 1] if j + 1 < len(ts) else math.inf
        nodes[j] = BoxSpace.of(Interval(lo, hi, True, not math.isinf(hi)))
    edges = [
        (("e", j), j, j + 1, JumpRelation.finite([((ts[j + 1],), (ts[j + 1],))])) for j in range(n - 1)
    ]
    space = HybridPhaseSpace.build(nodes, edges, name="universal")

    def jump(p: TaggedPoint) -> TaggedPoint:
        j = p.node
        if j + 1 < n and p.coords[0] == ts[j + 1]:
            return TaggedPoint(j + 1, p.coords)
        return p

    events = {j: ([lambda x, b=ts[j + 1]: b - x[0]] if j + 1 < n else []) for j in range(n)}
    return closed_control(space, lambda p: np.ones(1), jump, events, name="universal")


def verify_execution(
    e: Execution, c: DeterministicControl, tol: float = 1e-4, min_interval: float = 1e-6
) -> Report:
    """Integral-curve residuals on every arc and consistency of every jump.

    Sample intervals shorter than ``min_interval`` are skipped and counted.
    """
    rep = Report("execution")
    space = c.ssub.total
    worst = 0.0
    slivers = 0
    for k, a in enumerate(e.arcs):
        if k and a.t_start != e.arcs[k - 1].t_end:
            rep.fail("arcs do not abut", arc=k, start=a.t_start, previous_end=e.arcs[k - 1].t_end)
        for (ta, ya), (tb, yb) in zip(zip(a.times, a.states), zip(a.times[1:], a.states[1:])):
            if tb - ta < min_interval:
                # event-localization slivers: a difference quotient over them is roundoff
                slivers += 1
                continue
            vx = c.X(TaggedPoint(a.node, 0.5 * (ya + yb)))
            slope = (yb - ya) / (tb - ta)
            r = float(np.max(np.abs(slope - vx), initial=0.0))
            scale = 1.0 + float(np.max(np.abs(vx), initial=0.0))
            worst = max(worst, r / scale)
            if r > tol * scale:
                rep.fail("arc is not an integral curve", arc=k, t=ta, residual=r)
    offset = 1 if e.initial_jump else 0
    if e.initial_jump and e.jumps:
        j0 = e.jumps[0]
        if not j0.target.close_to(e.arcs[0].start(), tol):
            rep.fail("initial jump does not land at the first arc", jump=0)
    for k, j in enumerate(e.jumps[offset:]):
        if k + 1 >= len(e.arcs):
            rep.fail("jump without a following arc", jump=k + offset)
            break
        before, after = e.arcs[k].end(), e.arcs[k + 1].start()
        expected = c.rho(before)
        if expected.node != after.node or not expected.close_to(after, tol):
            rep.fail("jump does not match the jump map", jump=k + offset, t=j.t, expected=expected, got=after)
        if lambda_lookup(space, before, after, tol) is None:
            rep.fail("jump is not along any edge", jump=k + offset, t=j.t)
    rep.metrics.update(
        max_relative_residual=worst, arcs=len(e.arcs), jumps=len(e.jumps), skipped_intervals=slivers, tol=tol
    )
    return rep


def pushforward_execution(f: PhaseSpaceMorphism, e: Execution) -> Execution:
    """Apply ``f`` to every sample and jump record."""

    def push(p: TaggedPoint) -> TaggedPoint:
        return apply(f, p, check=False)

    arcs = []
    for a in e.arcs:
        m = f.maps[a.node]
        states = np.array([m(y) for y in a.states]).reshape(len(a.times), -1)
        arcs.append(Arc(f.nodes(a.node), a.t_start, a.t_end, a.times.copy(), states))
    jumps = [
        JumpRecord(j.t, push(j.source), push(j.target), None if j.edge is None else f.nodes.edge(j.edge))
        for j in e.jumps
    ]
    return Execution(tuple(arcs), tuple(jumps), e.termination, e.zeno, e.initial_jump)


__all__ = [
    "Arc",
    "Execution",
    "ExecutionError",
    "IntegratorOptions",
    "JumpRecord",
    "TimePartition",
    "execute",
    "pushforward_execution",
    "rk4_step",
    "universal_system",
    "verify_execution",
    "zeno_estimate",
]
