"""Hybrid phase spaces: reflexive multigraphs with box state spaces and jump relations.

A phase space assigns an axis-aligned box (possibly unbounded, each endpoint
open or closed) to every node and a jump relation to every edge.  Every node
carries a unit edge whose relation is the diagonal.  Points of the underlying
space are node-tagged coordinate vectors.

Products are formed node-by-node and edge-by-edge; product node and edge ids
are pairs ``(s, t)`` and ``(gamma, gamma')``.  Iterated products nest to the
left, so the product of ``[a, b, c]`` has nodes ``((s, t), u)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable, Hashable, Iterable, Sequence

import numpy as np

from .report import Report

if TYPE_CHECKING:  # pragma: no cover
    from .morphisms import PhaseSpaceMorphism

NodeId = Hashable
EdgeId = Hashable

RelationTest = Callable[[np.ndarray, np.ndarray, float], bool]
RelationSampler = Callable[[int, np.random.Generator], "list[tuple[np.ndarray, np.ndarray]] | None"]


class PhaseSpaceError(ValueError):
    pass


class UnknownNodeError(PhaseSpaceError, KeyError):
    pass


class DimensionError(PhaseSpaceError):
    pass


# --------------------------------------------------------------------------- boxes


@dataclass(frozen=True)
class Interval:
    """A real interval; infinite endpoints are always open."""

    lo: float = -math.inf
    hi: float = math.inf
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise PhaseSpaceError(f"empty interval: lower {self.lo} > upper {self.hi}")
        if math.isinf(self.lo) and self.lo_closed:
            object.__setattr__(self, "lo_closed", False)
        if math.isinf(self.hi) and self.hi_closed:
            object.__setattr__(self, "hi_closed", False)

    @classmethod
    def closed(cls, lo: float, hi: float) -> "Interval":
        return cls(lo, hi, True, True)

    @classmethod
    def at_least(cls, lo: float) -> "Interval":
        return cls(lo, math.inf, True, False)

    @classmethod
    def greater_than(cls, lo: float) -> "Interval":
        return cls(lo, math.inf, False, False)

    @property
    def bounded(self) -> bool:
        return not (math.isinf(self.lo) or math.isinf(self.hi))

    def contains(self, v: float, tol: float = 0.0) -> bool:
        if math.isnan(v):
            return False
        if self.lo_closed:
            if v < self.lo - tol:
                return False
        elif not v > self.lo - tol:
            return False
        if self.hi_closed:
            if v > self.hi + tol:
                return False
        elif not v < self.hi + tol:
            return False
        return True

    def clamp(self, v: float) -> float:
        if v < self.lo or (v == self.lo and not self.lo_closed):
            return self.lo if self.lo_closed else float(np.nextafter(self.lo, math.inf))
        if v > self.hi or (v == self.hi and not self.hi_closed):
            return self.hi if self.hi_closed else float(np.nextafter(self.hi, -math.inf))
        return v

    def __str__(self) -> str:
        if self.lo == -math.inf and self.hi == math.inf:
            return "R"
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{_fmt(self.lo)}, {_fmt(self.hi)}{right}"


def _fmt(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return repr(float(v))


@dataclass(frozen=True)
class BoxSpace:
    """Product of intervals; dimension 0 is a single point."""

    intervals: tuple[Interval, ...] = ()

    @classmethod
    def of(cls, *intervals: Interval) -> "BoxSpace":
        return cls(tuple(intervals))

    @classmethod
    def reals(cls, dim: int) -> "BoxSpace":
        return cls(tuple(Interval() for _ in range(dim)))

    @classmethod
    def point(cls) -> "BoxSpace":
        return cls(())

    @property
    def dim(self) -> int:
        return len(self.intervals)

    def __mul__(self, other: "BoxSpace") -> "BoxSpace":
        return BoxSpace(self.intervals + other.intervals)

    def contains(self, coords: Sequence[float], tol: float = 0.0) -> bool:
        return self.violation(coords, tol) is None

    def violation(self, coords: Sequence[float], tol: float = 0.0) -> "tuple[int, float] | None":
        """First offending ``(index, value)`` or ``None``; a length mismatch reports index -1."""
        if len(coords) != self.dim:
            return (-1, float(len(coords)))
        for i, (iv, v) in enumerate(zip(self.intervals, coords)):
            if not iv.contains(float(v), tol):
                return (i, float(v))
        return None

    def clamp(self, coords: np.ndarray) -> np.ndarray:
        return np.array([iv.clamp(float(v)) for iv, v in zip(self.intervals, coords)], dtype=float)

    def __str__(self) -> str:
        if not self.intervals:
            return "point"
        return " x ".join(str(iv) for iv in self.intervals)


# --------------------------------------------------------------------------- relations

_OPS: dict[str, Callable[[float, float], bool]] = {
    ">=": lambda v, tol: v >= -tol,
    ">": lambda v, tol: v > -tol if tol > 0 else v > 0,
    "<=": lambda v, tol: v <= tol,
    "<": lambda v, tol: v < tol if tol > 0 else v < 0,
    "==": lambda v, tol: abs(v) <= tol,
}


@dataclass(frozen=True)
class JumpRelation:
    """Admissible (before, after) pairs along an edge.

    ``test(x, y, tol)`` decides membership; with ``tol > 0`` inequalities are
    relaxed by ``tol`` and equalities hold when ``|lhs - rhs| <= tol``.
    """

    kind: str
    test: RelationTest
    sampler: "RelationSampler | None" = None
    pairs: tuple[tuple[tuple[float, ...], tuple[float, ...]], ...] = ()
    description: str = ""

    def contains(self, x: Sequence[float], y: Sequence[float], tol: float = 0.0) -> bool:
        return bool(self.test(np.asarray(x, dtype=float), np.asarray(y, dtype=float), tol))

    @classmethod
    def diagonal(cls) -> "JumpRelation":
        def test(x: np.ndarray, y: np.ndarray, tol: float) -> bool:
            if x.shape != y.shape:
                return False
            return bool(np.all(np.abs(x - y) <= tol))

        return cls("diagonal", test, description="diagonal")

    @classmethod
    def finite(cls, pairs: Iterable[tuple[Sequence[float], Sequence[float]]]) -> "JumpRelation":
        stored = tuple((tuple(map(float, x)), tuple(map(float, y))) for x, y in pairs)
        arrays = [(np.array(x), np.array(y)) for x, y in stored]

        def test(x: np.ndarray, y: np.ndarray, tol: float) -> bool:
            for px, py in arrays:
                if px.shape == x.shape and py.shape == y.shape:
                    if np.all(np.abs(px - x) <= tol) and np.all(np.abs(py - y) <= tol):
                        return True
            return False

        def sampler(n: int, rng: np.random.Generator) -> list[tuple[np.ndarray, np.ndarray]]:
            return [(px.copy(), py.copy()) for px, py in arrays]

        return cls("finite", test, sampler, stored, description=f"finite({len(stored)})")

    @classmethod
    def where(
        cls,
        *constraints: tuple[Callable[[np.ndarray, np.ndarray], float], str],
        sampler: "RelationSampler | None" = None,
        description: str = "",
    ) -> "JumpRelation":
        """Conjunction of comparisons ``fn(x, y) <op> 0``."""
        for _, op in constraints:
            if op not in _OPS:
                raise PhaseSpaceError(f"unknown comparison {op!r}")

        def test(x: np.ndarray, y: np.ndarray, tol: float) -> bool:
            for fn, op in constraints:
                v = float(fn(x, y))
                if math.isnan(v) or not _OPS[op](v, tol):
                    return False
            return True

        return cls("predicate", test, sampler, description=description or "predicate")

    @classmethod
    def predicate(
        cls, test: RelationTest, sampler: "RelationSampler | None" = None, description: str = ""
    ) -> "JumpRelation":
        return cls("predicate", test, sampler, description=description or "predicate")

    @classmethod
    def anything(cls, sampler: "RelationSampler | None" = None) -> "JumpRelation":
        return cls("predicate", lambda x, y, tol: True, sampler, description="full")


# --------------------------------------------------------------------------- graphs & points


@dataclass(frozen=True)
class Edge:
    id: EdgeId
    src: NodeId
    tgt: NodeId


@dataclass(frozen=True)
class SourceGraph:
    nodes: tuple[NodeId, ...]
    edges: tuple[Edge, ...]
    unit_edge: dict[NodeId, EdgeId] = field(hash=False)

    def edge(self, eid: EdgeId) -> Edge:
        return self._edge_index()[eid]

    def _edge_index(self) -> dict[EdgeId, Edge]:
        idx = self.__dict__.get("_eidx")
        if idx is None:
            idx = {e.id: e for e in self.edges}
            object.__setattr__(self, "_eidx", idx)
        return idx

    def between(self, src: NodeId, tgt: NodeId) -> list[EdgeId]:
        """Edges from ``src`` to ``tgt``: unit edge first, then declaration order."""
        idx = self.__dict__.get("_pair")
        if idx is None:
            idx = {}
            for e in self.edges:
                idx.setdefault((e.src, e.tgt), []).append(e.id)
            for n, u in self.unit_edge.items():
                lst = idx.get((n, n), [])
                if u in lst:
                    lst.remove(u)
                    lst.insert(0, u)
            object.__setattr__(self, "_pair", idx)
        return idx.get((src, tgt), [])


@dataclass(frozen=True, eq=False)
class TaggedPoint:
    """A point of the underlying space: the node tag plus coordinates."""

    node: NodeId
    coords: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.coords, dtype=float).reshape(-1)
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TaggedPoint):
            return NotImplemented
        return self.node == other.node and np.array_equal(self.coords, other.coords)

    def __hash__(self) -> int:
        return hash((self.node, self.coords.tobytes()))

    def close_to(self, other: "TaggedPoint", tol: float) -> bool:
        return (
            self.node == other.node
            and self.coords.shape == other.coords.shape
            and bool(np.all(np.abs(self.coords - other.coords) <= tol))
        )

    def __repr__(self) -> str:
        return f"TaggedPoint({self.node!r}, {self.coords.tolist()})"

    def to_dict(self) -> dict[str, Any]:
        return {"node": repr(self.node), "coords": self.coords.tolist()}


@dataclass(frozen=True, eq=False)
class HybridPhaseSpace:
    graph: SourceGraph
    space: dict[NodeId, BoxSpace]
    relation: dict[EdgeId, JumpRelation]
    name: str = ""
    # (left, right) when built by ``product``
    factors: "tuple[HybridPhaseSpace, HybridPhaseSpace] | None" = None

    @classmethod
    def build(
        cls,
        nodes: "dict[NodeId, BoxSpace]",
        edges: Sequence[tuple[EdgeId, NodeId, NodeId, JumpRelation]] = (),
        name: str = "",
    ) -> "HybridPhaseSpace":
        """Declare nodes and non-unit edges; unit edges ``("id", n)`` are added."""
        units = {n: ("id", n) for n in nodes}
        all_edges = [Edge(units[n], n, n) for n in nodes]
        relation: dict[EdgeId, JumpRelation] = {units[n]: JumpRelation.diagonal() for n in nodes}
        for eid, s, t, rel in edges:
            if eid in relation:
                raise PhaseSpaceError(f"duplicate edge id {eid!r}")
            all_edges.append(Edge(eid, s, t))
            relation[eid] = rel
        graph = SourceGraph(tuple(nodes), tuple(all_edges), units)
        return cls(graph, dict(nodes), relation, name)

    @property
    def nodes(self) -> tuple[NodeId, ...]:
        return self.graph.nodes

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self.graph.edges

    def box(self, node: NodeId) -> BoxSpace:
        try:
            return self.space[node]
        except KeyError:
            raise UnknownNodeError(f"unknown node {node!r} in phase space {self.name or '<anon>'}") from None

    def dim(self, node: NodeId) -> int:
        return self.box(node).dim

    def point(self, node: NodeId, *coords: float) -> TaggedPoint:
        return TaggedPoint(node, np.array(coords, dtype=float))

    def __repr__(self) -> str:
        return f"HybridPhaseSpace({self.name or '<anon>'}: {len(self.nodes)} nodes, {len(self.edges)} edges)"


# --------------------------------------------------------------------------- operations


def validate(hps: HybridPhaseSpace) -> Report:
    """List every violated structural invariant; never raises."""
    rep = Report("phase_space")
    g = hps.graph
    if len(set(g.nodes)) != len(g.nodes):
        rep.fail("duplicate node ids")
    ids = [e.id for e in g.edges]
    if len(set(ids)) != len(ids):
        rep.fail("duplicate edge ids")
    nodes = set(g.nodes)
    for e in g.edges:
        if e.src not in nodes or e.tgt not in nodes:
            rep.fail(f"edge {e.id!r} has undeclared endpoint", edge=repr(e.id))
        if e.id not in hps.relation:
            rep.fail(f"edge {e.id!r} has no relation", edge=repr(e.id))
    for n in g.nodes:
        if n not in hps.space:
            rep.fail(f"node {n!r} has no state space", node=repr(n))
        u = g.unit_edge.get(n)
        if u is None:
            rep.fail(f"node {n!r} has no unit edge", node=repr(n))
            continue
        try:
            ue = g.edge(u)
        except KeyError:
            rep.fail(f"unit edge {u!r} of node {n!r} is not declared", node=repr(n))
            continue
        if ue.src != n or ue.tgt != n:
            rep.fail(f"unit edge {u!r} of node {n!r} is not a loop", node=repr(n))
        rel = hps.relation.get(u)
        if rel is not None and rel.kind != "diagonal":
            rep.fail(f"unit relation of node {n!r} is not diagonal", node=repr(n), kind=rel.kind)
    for e in g.edges:
        rel = hps.relation.get(e.id)
        if rel is None or rel.kind != "finite" or e.src not in hps.space or e.tgt not in hps.space:
            continue
        ds, dt = hps.space[e.src].dim, hps.space[e.tgt].dim
        for x, y in rel.pairs:
            if len(x) != ds or len(y) != dt:
                rep.fail(f"finite relation of edge {e.id!r} has a pair of wrong dimension", edge=repr(e.id))
                break
    rep.metrics.update(nodes=len(g.nodes), edges=len(g.edges))
    return rep


def contains(hps: HybridPhaseSpace, p: TaggedPoint, tol: float = 0.0) -> bool:
    return hps.box(p.node).contains(p.coords, tol)


def lambda_lookup(
    hps: HybridPhaseSpace, x: TaggedPoint, y: TaggedPoint, tol: float = 0.0
) -> "EdgeId | None":
    """First edge (unit edge first) whose relation contains the pair ``(x, y)``."""
    for eid in hps.graph.between(x.node, y.node):
        if hps.relation[eid].contains(x.coords, y.coords, tol):
            return eid
    return None


def terminal() -> HybridPhaseSpace:
    """One node carrying a point, and its unit edge."""
    return HybridPhaseSpace.build({"*": BoxSpace.point()}, name="1")


def _product_relation(
    a: HybridPhaseSpace, b: HybridPhaseSpace, ga: Edge, gb: Edge
) -> JumpRelation:
    ra, rb = a.relation[ga.id], b.relation[gb.id]
    da_src, da_tgt = a.dim(ga.src), a.dim(ga.tgt)
    if ra.kind == "diagonal" and rb.kind == "diagonal":
        return JumpRelation.diagonal()

    def test(x: np.ndarray, y: np.ndarray, tol: float) -> bool:
        return ra.test(x[:da_src], y[:da_tgt], tol) and rb.test(x[da_src:], y[da_tgt:], tol)

    if ra.kind == "finite" and rb.kind == "finite":
        pairs = [(xa + xb, ya + yb) for xa, ya in ra.pairs for xb, yb in rb.pairs]
        return JumpRelation.finite(pairs)

    from .sampling import sample_relation

    def sampler(n: int, rng: np.random.Generator) -> "list[tuple[np.ndarray, np.ndarray]] | None":
        pa = sample_relation(a, ga.id, n, rng)
        pb = sample_relation(b, gb.id, n, rng)
        if pa is None or pb is None:
            return None
        if not pa or not pb:
            return []
        m = max(len(pa), len(pb))
        return [
            (
                np.concatenate([pa[i % len(pa)][0], pb[i % len(pb)][0]]),
                np.concatenate([pa[i % len(pa)][1], pb[i % len(pb)][1]]),
            )
            for i in range(m)
        ]

    return JumpRelation.predicate(test, sampler, description=f"({ra.description}) x ({rb.description})")


def product_space(a: HybridPhaseSpace, b: HybridPhaseSpace) -> HybridPhaseSpace:
    nodes = tuple((s, t) for s in a.nodes for t in b.nodes)
    space = {(s, t): a.space[s] * b.space[t] for s, t in nodes}
    edges = tuple(
        Edge((ea.id, eb.id), (ea.src, eb.src), (ea.tgt, eb.tgt)) for ea in a.edges for eb in b.edges
    )
    relation = {(ea.id, eb.id): _product_relation(a, b, ea, eb) for ea in a.edges for eb in b.edges}
    units = {(s, t): (a.graph.unit_edge[s], b.graph.unit_edge[t]) for s, t in nodes}
    name = f"({a.name or '?'} x {b.name or '?'})"
    return HybridPhaseSpace(SourceGraph(nodes, edges, units), space, relation, name, factors=(a, b))


def product(
    a: HybridPhaseSpace, b: HybridPhaseSpace
) -> "tuple[HybridPhaseSpace, PhaseSpaceMorphism, PhaseSpaceMorphism]":
    """Categorical product together with its two projections."""
    from .morphisms import projection

    ab = product_space(a, b)
    return ab, projection(ab, 0), projection(ab, 1)


def product_n(spaces: Sequence[HybridPhaseSpace]) -> HybridPhaseSpace:
    """Left-nested iterated product; ``[]`` gives the terminal space and ``[a]`` gives ``a``."""
    if not spaces:
        return terminal()
    out = spaces[0]
    for s in spaces[1:]:
        out = product_space(out, s)
    return out


def split_underlying(
    a: HybridPhaseSpace, b: HybridPhaseSpace, p: TaggedPoint
) -> tuple[TaggedPoint, TaggedPoint]:
    """Re-tag a point of ``a x b`` as a pair of points of ``a`` and ``b``."""
    try:
        s, t = p.node
    except (TypeError, ValueError):
        raise DimensionError(f"node {p.node!r} is not a product node") from None
    da, db = a.dim(s), b.dim(t)
    if len(p.coords) != da + db:
        raise DimensionError(f"point has {len(p.coords)} coordinates, expected {da} + {db}")
    return TaggedPoint(s, p.coords[:da]), TaggedPoint(t, p.coords[da:])


def join_underlying(
    a: HybridPhaseSpace, b: HybridPhaseSpace, pa: TaggedPoint, pb: TaggedPoint
) -> TaggedPoint:
    if len(pa.coords) != a.dim(pa.node) or len(pb.coords) != b.dim(pb.node):
        raise DimensionError("factor point has wrong dimension")
    return TaggedPoint((pa.node, pb.node), np.concatenate([pa.coords, pb.coords]))


def split_n(spaces: Sequence[HybridPhaseSpace], p: TaggedPoint) -> list[TaggedPoint]:
    """Inverse of :func:`join_n` for a point of ``product_n(spaces)``."""
    n = len(spaces)
    if n == 0:
        return []
    nodes = _unnest(p.node, n)
    out = []
    k = 0
    for sp, node in zip(spaces, nodes):
        d = sp.dim(node)
        out.append(TaggedPoint(node, p.coords[k : k + d]))
        k += d
    if k != len(p.coords):
        raise DimensionError(f"point has {len(p.coords)} coordinates, factors need {k}")
    return out


def join_n(points: Sequence[TaggedPoint]) -> TaggedPoint:
    if not points:
        return TaggedPoint("*", np.zeros(0))
    node = points[0].node
    for q in points[1:]:
        node = (node, q.node)
    return TaggedPoint(node, np.concatenate([q.coords for q in points]))


def nest(items: Sequence[Any]) -> Any:
    """Left-nest a sequence the way iterated products nest node and edge ids."""
    if not items:
        return "*"
    out = items[0]
    for it in items[1:]:
        out = (out, it)
    return out


def _unnest(node: Any, n: int) -> list[Any]:
    out = []
    for _ in range(n - 1):
        try:
            node, last = node
        except (TypeError, ValueError):
            raise DimensionError(f"node {node!r} is not an {n}-fold product node") from None
        out.append(last)
    out.append(node)
    return out[::-1]


def unnest(node: Any, n: int) -> list[Any]:
    return _unnest(node, n) if n > 0 else []
