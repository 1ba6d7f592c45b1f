"""Morphisms of hybrid phase spaces, surjective submersions and interconnections.

A morphism is a node map (with its edge map) plus one smooth map per domain
node.  Verification functions sample points and relation pairs and return a
:class:`~hybridnet.report.Report`; they never raise on a failed check.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Mapping, Sequence

import numpy as np

from .phase_space import (
    BoxSpace,
    EdgeId,
    HybridPhaseSpace,
    NodeId,
    PhaseSpaceError,
    TaggedPoint,
    product_space,
    terminal,
)
from .report import Report
from .sampling import make_rng, sample_points, sample_relation

DEFAULT_FD_STEP = 1e-5


class MorphismError(PhaseSpaceError):
    pass


class ContainmentError(MorphismError):
    pass


class MissingInverseError(MorphismError):
    pass


# --------------------------------------------------------------------------- smooth maps


@dataclass(frozen=True)
class SmoothMap:
    """A map between coordinate vectors with an optional analytic Jacobian."""

    evaluate: Callable[[np.ndarray], Any]
    in_dim: int
    out_dim: int
    jacobian: "Callable[[np.ndarray], Any] | None" = None
    fd_step: float = DEFAULT_FD_STEP

    def __call__(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(self.evaluate(x), dtype=float).reshape(-1)
        if y.shape[0] != self.out_dim:
            raise MorphismError(f"map returned {y.shape[0]} coordinates, expected {self.out_dim}")
        return y

    @property
    def jacobian_mode(self) -> str:
        return "analytic" if self.jacobian is not None else f"finite-difference(h={self.fd_step})"

    def differential(self, x: Sequence[float], box: "BoxSpace | None" = None) -> tuple[np.ndarray, bool]:
        """Jacobian at ``x`` and whether a one-sided difference was needed."""
        x = np.asarray(x, dtype=float)
        if self.jacobian is not None:
            J = np.asarray(self.jacobian(x), dtype=float).reshape(self.out_dim, self.in_dim)
            return J, False
        h = self.fd_step
        J = np.zeros((self.out_dim, self.in_dim))
        one_sided = False
        for i in range(self.in_dim):
            up, down = x.copy(), x.copy()
            up[i] += h
            down[i] -= h
            up_ok = box is None or box.intervals[i].contains(up[i])
            down_ok = box is None or box.intervals[i].contains(down[i])
            if up_ok and down_ok:
                J[:, i] = (self(up) - self(down)) / (2 * h)
            elif up_ok:
                one_sided = True
                J[:, i] = (self(up) - self(x)) / h
            elif down_ok:
                one_sided = True
                J[:, i] = (self(x) - self(down)) / h
            else:
                one_sided = True
        return J, one_sided

    @classmethod
    def linear(cls, A: Any, b: Any = None) -> "SmoothMap":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.size == 0:
            A = A.reshape(A.shape if A.ndim == 2 else (0, 0))
        b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float).reshape(-1)
        return cls(lambda x: A @ x + b, A.shape[1], A.shape[0], lambda x: A)

    @classmethod
    def identity(cls, n: int) -> "SmoothMap":
        I = np.eye(n)
        return cls(lambda x: np.array(x, dtype=float), n, n, lambda x: I)

    @classmethod
    def select(cls, n: int, indices: Sequence[int]) -> "SmoothMap":
        """Coordinate selection ``x -> x[indices]``."""
        idx = list(indices)
        S = np.zeros((len(idx), n))
        for r, c in enumerate(idx):
            S[r, c] = 1.0
        return cls(lambda x: np.asarray(x, dtype=float)[idx], n, len(idx), lambda x: S)


def compose_smooth(g: SmoothMap, f: SmoothMap) -> SmoothMap:
    if f.out_dim != g.in_dim:
        raise MorphismError(f"cannot compose: {f.out_dim} outputs into {g.in_dim} inputs")
    jac = None
    if f.jacobian is not None and g.jacobian is not None:
        jac = lambda x: g.differential(f(x))[0] @ f.differential(x)[0]  # noqa: E731
    return SmoothMap(lambda x: g(f(x)), f.in_dim, g.out_dim, jac, min(f.fd_step, g.fd_step))


def concat_smooth(f: SmoothMap, g: SmoothMap) -> SmoothMap:
    """``(x, y) -> (f x, g y)`` with block-diagonal Jacobian."""
    n = f.in_dim

    def ev(x: np.ndarray) -> np.ndarray:
        return np.concatenate([f(x[:n]), g(x[n:])])

    jac = None
    if f.jacobian is not None and g.jacobian is not None:

        def jac(x: np.ndarray) -> np.ndarray:
            J = np.zeros((f.out_dim + g.out_dim, f.in_dim + g.in_dim))
            J[: f.out_dim, :n] = f.differential(x[:n])[0]
            J[f.out_dim :, n:] = g.differential(x[n:])[0]
            return J

    return SmoothMap(ev, f.in_dim + g.in_dim, f.out_dim + g.out_dim, jac)


def stack_smooth(f: SmoothMap, g: SmoothMap) -> SmoothMap:
    """``x -> (f x, g x)``."""
    if f.in_dim != g.in_dim:
        raise MorphismError("paired maps must share their input dimension")
    jac = None
    if f.jacobian is not None and g.jacobian is not None:
        jac = lambda x: np.vstack([f.differential(x)[0], g.differential(x)[0]])  # noqa: E731
    return SmoothMap(lambda x: np.concatenate([f(x), g(x)]), f.in_dim, f.out_dim + g.out_dim, jac)


# --------------------------------------------------------------------------- node maps & morphisms


@dataclass(frozen=True)
class NodeMap:
    assignment: dict[NodeId, NodeId]
    edge_assignment: dict[EdgeId, EdgeId]

    def __call__(self, node: NodeId) -> NodeId:
        return self.assignment[node]

    def edge(self, eid: EdgeId) -> EdgeId:
        return self.edge_assignment[eid]


def infer_edge_map(
    domain: HybridPhaseSpace,
    codomain: HybridPhaseSpace,
    node_map: Mapping[NodeId, NodeId],
    explicit: "Mapping[EdgeId, EdgeId] | Callable[[EdgeId], EdgeId] | None" = None,
) -> dict[EdgeId, EdgeId]:
    """Complete an edge map: units go to units, other edges to the unique candidate.

    A non-unit edge whose endpoints land on one node with no non-unit loop
    there goes to that node's unit edge.  Ambiguous edges must be given.
    """
    out: dict[EdgeId, EdgeId] = {}
    for e in domain.edges:
        if explicit is not None:
            if callable(explicit):
                out[e.id] = explicit(e.id)
                continue
            if e.id in explicit:
                out[e.id] = explicit[e.id]
                continue
        s, t = node_map[e.src], node_map[e.tgt]
        if domain.graph.unit_edge.get(e.src) == e.id:
            out[e.id] = codomain.graph.unit_edge[s]
            continue
        cands = codomain.graph.between(s, t)
        non_unit = [c for c in cands if c != codomain.graph.unit_edge.get(s)]
        if len(non_unit) == 1:
            out[e.id] = non_unit[0]
        elif not non_unit and s == t:
            out[e.id] = codomain.graph.unit_edge[s]
        else:
            raise MorphismError(
                f"cannot infer image of edge {e.id!r}: {len(non_unit)} candidates from {s!r} to {t!r}"
            )
    return out


@dataclass(frozen=True)
class PhaseSpaceMorphism:
    domain: HybridPhaseSpace
    codomain: HybridPhaseSpace
    nodes: NodeMap
    maps: dict[NodeId, SmoothMap]
    name: str = ""

    @classmethod
    def build(
        cls,
        domain: HybridPhaseSpace,
        codomain: HybridPhaseSpace,
        node_map: "Mapping[NodeId, NodeId] | Callable[[NodeId], NodeId]",
        maps: "Mapping[NodeId, SmoothMap] | Callable[[NodeId], SmoothMap]",
        edge_map: "Mapping[EdgeId, EdgeId] | Callable[[EdgeId], EdgeId] | None" = None,
        name: str = "",
    ) -> "PhaseSpaceMorphism":
        nm = {n: (node_map(n) if callable(node_map) else node_map[n]) for n in domain.nodes}
        em = infer_edge_map(domain, codomain, nm, edge_map)
        mp = {n: (maps(n) if callable(maps) else maps[n]) for n in domain.nodes}
        return cls(domain, codomain, NodeMap(nm, em), mp, name)

    def __call__(self, p: TaggedPoint) -> TaggedPoint:
        return apply(self, p)

    def __repr__(self) -> str:
        return f"PhaseSpaceMorphism({self.name or '<anon>'}: {self.domain.name} -> {self.codomain.name})"


def same_space(a: HybridPhaseSpace, b: HybridPhaseSpace) -> bool:
    """Structural equality: nodes, edges, units and boxes agree."""
    if a is b:
        return True
    return (
        a.graph.nodes == b.graph.nodes
        and a.graph.edges == b.graph.edges
        and a.graph.unit_edge == b.graph.unit_edge
        and all(a.space[n] == b.space[n] for n in a.nodes)
    )


def apply(f: PhaseSpaceMorphism, p: TaggedPoint, check: bool = True) -> TaggedPoint:
    """Underlying map on tagged points; containment is checked on both sides."""
    box = f.domain.box(p.node)
    if check:
        bad = box.violation(p.coords)
        if bad is not None:
            i, v = bad
            what = "dimension" if i < 0 else f"coordinate {i} = {v!r}"
            raise ContainmentError(f"point {p!r} outside node box {box}: {what}")
    q = TaggedPoint(f.nodes(p.node), f.maps[p.node](p.coords))
    if check:
        cbox = f.codomain.box(q.node)
        bad = cbox.violation(q.coords, 1e-9)
        if bad is not None:
            raise ContainmentError(f"image {q!r} of {p!r} outside codomain box {cbox} (coordinate {bad[0]})")
    return q


def differential(f: PhaseSpaceMorphism, p: TaggedPoint, with_info: bool = False) -> Any:
    """Jacobian at ``p``; with ``with_info`` also return the one-sided flag."""
    J, one_sided = f.maps[p.node].differential(p.coords, f.domain.box(p.node))
    return (J, {"one_sided": one_sided, "mode": f.maps[p.node].jacobian_mode}) if with_info else J


def identity(hps: HybridPhaseSpace) -> PhaseSpaceMorphism:
    return PhaseSpaceMorphism(
        hps,
        hps,
        NodeMap({n: n for n in hps.nodes}, {e.id: e.id for e in hps.edges}),
        {n: SmoothMap.identity(hps.dim(n)) for n in hps.nodes},
        name=f"id_{hps.name}",
    )


def compose(g: PhaseSpaceMorphism, f: PhaseSpaceMorphism) -> PhaseSpaceMorphism:
    """``g o f``."""
    if not same_space(f.codomain, g.domain):
        raise MorphismError(f"cannot compose {g!r} after {f!r}: codomain and domain differ")
    nm = {n: g.nodes(f.nodes(n)) for n in f.domain.nodes}
    em = {e: g.nodes.edge(f.nodes.edge(e)) for e in f.nodes.edge_assignment}
    maps = {n: compose_smooth(g.maps[f.nodes(n)], f.maps[n]) for n in f.domain.nodes}
    return PhaseSpaceMorphism(f.domain, g.codomain, NodeMap(nm, em), maps, f"{g.name}o{f.name}")


def projection(ab: HybridPhaseSpace, k: int) -> PhaseSpaceMorphism:
    """Canonical projection of a binary product onto factor ``k`` (0 or 1)."""
    if ab.factors is None:
        raise MorphismError("projection needs a space built by product")
    a, b = ab.factors
    target = ab.factors[k]
    nm = {n: n[k] for n in ab.nodes}
    em = {e.id: e.id[k] for e in ab.edges}
    maps = {}
    for s, t in ab.nodes:
        da, db = a.dim(s), b.dim(t)
        idx = range(da) if k == 0 else range(da, da + db)
        maps[(s, t)] = SmoothMap.select(da + db, idx)
    return PhaseSpaceMorphism(ab, target, NodeMap(nm, em), maps, f"p{k}")


def pairing(
    f: PhaseSpaceMorphism, g: PhaseSpaceMorphism, codomain: "HybridPhaseSpace | None" = None
) -> PhaseSpaceMorphism:
    """The map ``x -> (f x, g x)`` into ``f.codomain x g.codomain``."""
    if not same_space(f.domain, g.domain):
        raise MorphismError("paired morphisms must share a domain")
    cod = codomain or product_space(f.codomain, g.codomain)
    nm = {n: (f.nodes(n), g.nodes(n)) for n in f.domain.nodes}
    em = {e: (f.nodes.edge(e), g.nodes.edge(e)) for e in f.nodes.edge_assignment}
    maps = {n: stack_smooth(f.maps[n], g.maps[n]) for n in f.domain.nodes}
    return PhaseSpaceMorphism(f.domain, cod, NodeMap(nm, em), maps, f"<{f.name},{g.name}>")


def product_map(
    f: PhaseSpaceMorphism,
    g: PhaseSpaceMorphism,
    domain: "HybridPhaseSpace | None" = None,
    codomain: "HybridPhaseSpace | None" = None,
) -> PhaseSpaceMorphism:
    """``f x g`` between the product spaces."""
    dom = domain or product_space(f.domain, g.domain)
    cod = codomain or product_space(f.codomain, g.codomain)
    nm = {(s, t): (f.nodes(s), g.nodes(t)) for s, t in dom.nodes}
    em = {(ea, eb): (f.nodes.edge(ea), g.nodes.edge(eb)) for ea, eb in (e.id for e in dom.edges)}
    maps = {(s, t): concat_smooth(f.maps[s], g.maps[t]) for s, t in dom.nodes}
    return PhaseSpaceMorphism(dom, cod, NodeMap(nm, em), maps, f"({f.name}x{g.name})")


def check_morphism(
    f: PhaseSpaceMorphism,
    samples_per_relation: int = 20,
    tol: float = 1e-9,
    seed: "int | np.random.Generator" = 0,
) -> Report:
    """Functoriality, box containment and relation inclusion on sampled pairs."""
    rep = Report("morphism")
    rng = make_rng(seed)
    dom, cod = f.domain, f.codomain
    structural_ok = True
    for n in dom.nodes:
        img = f.nodes.assignment.get(n)
        if img is None or img not in cod.space:
            rep.fail(f"node {n!r} has no image in the codomain", node=repr(n))
            structural_ok = False
        elif n not in f.maps:
            rep.fail(f"node {n!r} has no smooth map", node=repr(n))
            structural_ok = False
        elif f.maps[n].in_dim != dom.dim(n) or f.maps[n].out_dim != cod.dim(img):
            rep.fail(f"smooth map at node {n!r} has wrong dimensions", node=repr(n))
            structural_ok = False
    for e in dom.edges:
        img = f.nodes.edge_assignment.get(e.id)
        if img is None:
            rep.fail(f"edge {e.id!r} has no image", edge=repr(e.id))
            structural_ok = False
            continue
        try:
            ce = cod.graph.edge(img)
        except KeyError:
            rep.fail(f"edge {e.id!r} maps to unknown edge {img!r}", edge=repr(e.id))
            structural_ok = False
            continue
        if structural_ok and (ce.src != f.nodes(e.src) or ce.tgt != f.nodes(e.tgt)):
            rep.fail(f"edge {e.id!r} image does not preserve endpoints", edge=repr(e.id))
        if dom.graph.unit_edge.get(e.src) == e.id and cod.graph.unit_edge.get(ce.src) != img:
            rep.fail(f"unit edge {e.id!r} does not map to a unit edge", edge=repr(e.id))
    if not structural_ok:
        return rep
    for p in sample_points(dom, samples_per_relation, rng):
        q = TaggedPoint(f.nodes(p.node), f.maps[p.node](p.coords))
        if not cod.box(q.node).contains(q.coords, tol):
            rep.fail("image outside codomain box", point=p, image=q)
    checked = 0
    unsampleable = []
    for e in dom.edges:
        if dom.graph.unit_edge.get(e.src) == e.id:
            continue  # diagonal goes to diagonal once units go to units
        pairs = sample_relation(dom, e.id, samples_per_relation, rng)
        if pairs is None:
            unsampleable.append(repr(e.id))
            continue
        target = f.nodes.edge(e.id)
        rel = cod.relation[target]
        fs, ft = f.maps[e.src], f.maps[e.tgt]
        for x, y in pairs:
            fx, fy = fs(x), ft(y)
            checked += 1
            if not rel.contains(fx, fy, tol):
                rep.fail(
                    f"relation of edge {e.id!r} not carried into {target!r}",
                    edge=repr(e.id),
                    pair=[x, y],
                    image=[fx, fy],
                )
    rep.metrics.update(pairs_checked=checked, unsampleable=unsampleable, tol=tol)
    if unsampleable:
        rep.metrics["verdict"] = "unsampleable edges skipped"
    return rep


# --------------------------------------------------------------------------- submersions


@dataclass(frozen=True)
class HybridSSub:
    """A surjective submersion ``total -> state``: the substrate of an open system."""

    total: HybridPhaseSpace
    state: HybridPhaseSpace
    proj: PhaseSpaceMorphism
    asserted_surjective: bool = True
    name: str = ""

    def __repr__(self) -> str:
        return f"HybridSSub({self.name or '<anon>'}: {self.total.name} -> {self.state.name})"


def ssub_identity(hps: HybridPhaseSpace) -> HybridSSub:
    return HybridSSub(hps, hps, identity(hps), True, f"id_{hps.name}")


def is_closed(s: HybridSSub, samples: int = 3) -> bool:
    """Closed systems have the identity as projection (checked on a few samples)."""
    if not same_space(s.total, s.state):
        return False
    if any(s.proj.nodes(n) != n for n in s.total.nodes):
        return False
    for p in sample_points(s.total, samples, 0):
        if not np.array_equal(s.proj.maps[p.node](p.coords), p.coords):
            return False
    return True


def product_ssub(a: HybridSSub, b: HybridSSub) -> HybridSSub:
    tot = product_space(a.total, b.total)
    st = product_space(a.state, b.state)
    proj = product_map(a.proj, b.proj, tot, st)
    return HybridSSub(tot, st, proj, a.asserted_surjective and b.asserted_surjective, f"({a.name}x{b.name})")


def terminal_ssub() -> HybridSSub:
    return ssub_identity(terminal())


def check_submersion(
    s: HybridSSub,
    samples_per_node: int = 20,
    rank_tol: float = 1e-8,
    seed: "int | np.random.Generator" = 0,
) -> Report:
    rep = Report("submersion")
    if not same_space(s.proj.domain, s.total) or not same_space(s.proj.codomain, s.state):
        rep.fail("projection does not go from total to state space")
        return rep
    image = {s.proj.nodes(n) for n in s.total.nodes}
    missing = [n for n in s.state.nodes if n not in image]
    for n in missing:
        rep.fail(f"state node {n!r} is not hit", node=repr(n))
    min_sv = np.inf
    one_sided = 0
    for p in sample_points(s.total, samples_per_node, seed):
        J, info = differential(s.proj, p, with_info=True)
        one_sided += info["one_sided"]
        k = J.shape[0]
        if k == 0:
            continue
        sv = np.linalg.svd(J, compute_uv=False)
        smallest = float(sv[k - 1]) if len(sv) >= k else 0.0
        min_sv = min(min_sv, smallest)
        if smallest < rank_tol:
            rep.fail("differential is not surjective", point=p, singular_value=smallest)
    rep.metrics.update(
        node_surjective=not missing,
        min_singular_value=min_sv,
        asserted_surjective=s.asserted_surjective,
        one_sided_differences=one_sided,
    )
    return rep


@dataclass(frozen=True)
class SSubMorphism:
    """Commuting square of phase-space morphisms between two submersions.

    ``st_inverse`` is a user-supplied inverse of ``f_st``; it is required for
    interconnections and verified, never computed.
    """

    domain: HybridSSub
    codomain: HybridSSub
    f_tot: PhaseSpaceMorphism
    f_st: PhaseSpaceMorphism
    st_inverse: "PhaseSpaceMorphism | None" = None
    name: str = ""

    def __repr__(self) -> str:
        return f"SSubMorphism({self.name or '<anon>'})"


def ssub_morphism_identity(s: HybridSSub) -> SSubMorphism:
    ist = identity(s.state)
    return SSubMorphism(s, s, identity(s.total), ist, ist, f"id_{s.name}")


def compose_ssub(g: SSubMorphism, f: SSubMorphism) -> SSubMorphism:
    inv = None
    if f.st_inverse is not None and g.st_inverse is not None:
        inv = compose(f.st_inverse, g.st_inverse)
    return SSubMorphism(
        f.domain, g.codomain, compose(g.f_tot, f.f_tot), compose(g.f_st, f.f_st), inv, f"{g.name}o{f.name}"
    )


def check_ssub_morphism(
    f: SSubMorphism, samples: int = 20, tol: float = 1e-9, seed: "int | np.random.Generator" = 0
) -> Report:
    """Both component morphisms and the square ``p_b o f_tot = f_st o p_a``."""
    rep = Report("ssub_morphism")
    rng = make_rng(seed)
    rep.merge(check_morphism(f.f_tot, samples, tol, rng), "total: ")
    rep.merge(check_morphism(f.f_st, samples, tol, rng), "state: ")
    if not rep.passed:
        return rep
    worst = 0.0
    for p in sample_points(f.domain.total, samples, rng):
        lhs = apply(f.codomain.proj, apply(f.f_tot, p, False), False)
        rhs = apply(f.f_st, apply(f.domain.proj, p, False), False)
        if lhs.node != rhs.node or lhs.coords.shape != rhs.coords.shape:
            rep.fail("square does not commute on nodes", point=p, lhs=lhs, rhs=rhs)
            continue
        r = float(np.max(np.abs(lhs.coords - rhs.coords), initial=0.0))
        worst = max(worst, r)
        if r > tol:
            rep.fail("square does not commute", point=p, residual=r)
    rep.metrics["max_square_residual"] = worst
    return rep


def _node_bijection(f: PhaseSpaceMorphism) -> "dict[NodeId, NodeId] | None":
    img = f.nodes.assignment
    if len(set(img.values())) != len(img) or set(img.values()) != set(f.codomain.nodes):
        return None
    return {v: k for k, v in img.items()}


def check_iso(
    f: PhaseSpaceMorphism,
    inv: PhaseSpaceMorphism,
    samples: int = 50,
    tol: float = 1e-9,
    seed: "int | np.random.Generator" = 0,
) -> Report:
    """``inv o f`` and ``f o inv`` are identities on samples; node maps are bijective."""
    rep = Report("iso")
    rng = make_rng(seed)
    back = _node_bijection(f)
    if back is None:
        rep.fail("node map is not a bijection")
        return rep
    if any(inv.nodes(k) != v for k, v in back.items()):
        rep.fail("inverse node map is not the inverse bijection")
        return rep
    worst = 0.0
    for first, second, label in ((f, inv, "inverse o f"), (inv, f, "f o inverse")):
        for p in sample_points(first.domain, samples, rng):
            q = apply(second, apply(first, p, False), False)
            if q.node != p.node:
                rep.fail(f"{label} moves node", point=p, image=q)
                continue
            r = float(np.max(np.abs(q.coords - p.coords), initial=0.0))
            worst = max(worst, r)
            if r > tol:
                rep.fail(f"{label} is not the identity", point=p, image=q, residual=r)
    rep.metrics["max_roundtrip_residual"] = worst
    return rep


def is_interconnection(
    f: SSubMorphism,
    inverse_check_samples: int = 50,
    tol: float = 1e-9,
    seed: "int | np.random.Generator" = 0,
) -> tuple[bool, Report]:
    """Whether the state component is an isomorphism, judged against the supplied inverse."""
    if f.st_inverse is None:
        raise MissingInverseError(
            f"{f!r}: an interconnection needs an explicit inverse of its state map (st_inverse)"
        )
    rep = check_iso(f.f_st, f.st_inverse, inverse_check_samples, tol, seed)
    rep.kind = "interconnection"
    return rep.passed, rep


def invert_iso(
    f: PhaseSpaceMorphism,
    inverse_maps: "PhaseSpaceMorphism | Mapping[NodeId, SmoothMap]",
    samples: int = 30,
    tol: float = 1e-9,
    seed: "int | np.random.Generator" = 0,
) -> PhaseSpaceMorphism:
    """Assemble and verify the inverse of an isomorphism.

    Raises:
        MorphismError: if round trips fail or relations are not carried
            onto each other in both directions.
    """
    if isinstance(inverse_maps, PhaseSpaceMorphism):
        inv = inverse_maps
    else:
        back = _node_bijection(f)
        if back is None:
            raise MorphismError("node map is not a bijection")
        eback = {v: k for k, v in f.nodes.edge_assignment.items()}
        if len(eback) != len(f.codomain.edges):
            raise MorphismError("edge map is not a bijection")
        inv = PhaseSpaceMorphism(
            f.codomain,
            f.domain,
            NodeMap(back, eback),
            {n: inverse_maps[n] for n in f.codomain.nodes},
            f"{f.name}^-1",
        )
    rep = check_iso(f, inv, samples, tol, seed)
    rep.merge(check_morphism(f, samples, tol, seed), "forward: ")
    rep.merge(check_morphism(inv, samples, tol, seed), "backward: ")
    if not rep.passed:
        raise MorphismError("inverse verification failed: " + "; ".join(rep.issues[:3]))
    return inv


def product_morphism(f: SSubMorphism, g: SSubMorphism) -> SSubMorphism:
    """``f x g`` between product submersions, acting factorwise."""
    dom = product_ssub(f.domain, g.domain)
    cod = product_ssub(f.codomain, g.codomain)
    tot = product_map(f.f_tot, g.f_tot, dom.total, cod.total)
    st = product_map(f.f_st, g.f_st, dom.state, cod.state)
    inv = None
    if f.st_inverse is not None and g.st_inverse is not None:
        inv = product_map(f.st_inverse, g.st_inverse, cod.state, dom.state)
    return SSubMorphism(dom, cod, tot, st, inv, f"({f.name}x{g.name})")


__all__ = [
    "ContainmentError",
    "HybridSSub",
    "MissingInverseError",
    "MorphismError",
    "NodeMap",
    "PhaseSpaceMorphism",
    "SSubMorphism",
    "SmoothMap",
    "apply",
    "check_iso",
    "check_morphism",
    "check_ssub_morphism",
    "check_submersion",
    "compose",
    "compose_smooth",
    "compose_ssub",
    "concat_smooth",
    "differential",
    "identity",
    "infer_edge_map",
    "invert_iso",
    "is_closed",
    "is_interconnection",
    "pairing",
    "product_map",
    "product_morphism",
    "product_ssub",
    "projection",
    "same_space",
    "ssub_identity",
    "ssub_morphism_identity",
    "stack_smooth",
    "terminal_ssub",
]
