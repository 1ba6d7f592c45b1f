"""Reproducible sample points for boxes, phase spaces and jump relations.

Interior points come from a scrambled Halton sequence; unbounded directions
are covered by a window of half-width ``window`` around the finite endpoint
(or the origin).  A share of the points is projected onto closed finite
faces so boundary behavior (h = 0 for a bouncing ball, corners of products)
is always exercised.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from .phase_space import BoxSpace, EdgeId, HybridPhaseSpace, Interval, TaggedPoint

DEFAULT_WINDOW = 3.0


def make_rng(seed: "int | np.random.Generator | None") -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(0 if seed is None else seed)


def _scale(iv: Interval, u: np.ndarray, window: float) -> np.ndarray:
    lo, hi = iv.lo, iv.hi
    if math.isinf(lo) and math.isinf(hi):
        out = -window + 2 * window * u
    elif math.isinf(hi):
        out = lo + 2 * window * u
    elif math.isinf(lo):
        out = hi - 2 * window * u
    else:
        out = lo + (hi - lo) * u
    return np.array([iv.clamp(float(v)) for v in out])


def sample_box(
    box: BoxSpace,
    n: int,
    seed: "int | np.random.Generator | None" = 0,
    window: float = DEFAULT_WINDOW,
    boundary: bool = True,
) -> list[np.ndarray]:
    """``n`` interior points plus boundary projections; a point box yields one point."""
    if box.dim == 0:
        return [np.zeros(0)]
    if n <= 0:
        return []
    rng = make_rng(seed)
    u = qmc.Halton(d=box.dim, scramble=True, seed=rng).random(n)
    cols = [_scale(iv, u[:, i], window) for i, iv in enumerate(box.intervals)]
    pts = np.column_stack(cols)
    out = [p.copy() for p in pts]
    if not boundary:
        return out
    k = max(1, n // 4)
    faces: list[tuple[int, float]] = []
    for i, iv in enumerate(box.intervals):
        if iv.lo_closed:
            faces.append((i, iv.lo))
        if iv.hi_closed and iv.hi != iv.lo:
            faces.append((i, iv.hi))
    for i, v in faces:
        for p in pts[:k]:
            q = p.copy()
            q[i] = v
            out.append(q)
    if len(faces) > 1:
        for pick in ("lo", "hi"):
            corner = [
                (i, iv.lo if pick == "lo" else iv.hi)
                for i, iv in enumerate(box.intervals)
                if (iv.lo_closed if pick == "lo" else iv.hi_closed)
            ]
            if len(corner) < 2:
                continue
            for p in pts[:k]:
                q = p.copy()
                for i, v in corner:
                    q[i] = v
                out.append(q)
    return out


def sample_points(
    hps: HybridPhaseSpace,
    n: int,
    seed: "int | np.random.Generator | None" = 0,
    window: float = DEFAULT_WINDOW,
    nodes: "Sequence | None" = None,
) -> list[TaggedPoint]:
    """Sample every node (or the given ones) in declaration order."""
    rng = make_rng(seed)
    out: list[TaggedPoint] = []
    for node in hps.nodes if nodes is None else nodes:
        for c in sample_box(hps.box(node), n, rng, window):
            out.append(TaggedPoint(node, c))
    return out


def sample_relation(
    hps: HybridPhaseSpace,
    eid: EdgeId,
    n: int,
    seed: "int | np.random.Generator | None" = 0,
    window: float = DEFAULT_WINDOW,
) -> "list[tuple[np.ndarray, np.ndarray]] | None":
    """Member pairs of an edge relation, or ``None`` if no pair can be produced.

    Predicate relations without a sampler fall back to rejection sampling
    over the two boxes; if that finds nothing the relation is unsampleable.
    """
    rng = make_rng(seed)
    rel = hps.relation[eid]
    edge = hps.graph.edge(eid)
    if rel.kind == "finite":
        return [(np.array(x), np.array(y)) for x, y in rel.pairs]
    if rel.kind == "diagonal":
        return [(c, c.copy()) for c in sample_box(hps.box(edge.src), n, rng, window)]
    if rel.sampler is not None:
        return rel.sampler(n, rng)
    xs = sample_box(hps.box(edge.src), n, rng, window)
    ys = sample_box(hps.box(edge.tgt), n, rng, window)
    found = [(x, y) for x in xs for y in ys if rel.contains(x, y)]
    if not found:
        return None
    if len(found) > n:
        idx = rng.choice(len(found), size=n, replace=False)
        found = [found[i] for i in sorted(idx)]
    return found
