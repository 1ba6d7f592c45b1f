"""Ready-made systems: thermostat, bouncing ball, switched systems and their
decompositions into interconnected open systems.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

from .morphisms import (
    HybridSSub,
    PhaseSpaceMorphism,
    SmoothMap,
    SSubMorphism,
    apply,
    identity,
    pairing,
    product_map,
    product_ssub,
    projection,
    ssub_identity,
)
from .phase_space import BoxSpace, HybridPhaseSpace, Interval, JumpRelation, TaggedPoint, product_space
from .systems import DeterministicControl, closed_control, interconnect_control, product_control

if TYPE_CHECKING:  # pragma: no cover
    from .networks import NetworkMorphism


def _sign(j: int) -> float:
    """``(-1)^(1-j)``: +1 with the heater on (j = 1), -1 with it off."""
    return 1.0 if j == 1 else -1.0


# --------------------------------------------------------------------------- thermostat


def _copy_sampler(n: int, rng: np.random.Generator, lo: float = -3.0, hi: float = 3.0):
    xs = rng.uniform(lo, hi, size=n)
    return [(np.array([x]), np.array([x])) for x in xs]


def thermostat_space(guarded: bool = False) -> HybridPhaseSpace:
    """Nodes 0 (heater off) and 1 (heater on), temperature in R.

    Edge ``e10`` goes 0 -> 1 and ``e01`` goes 1 -> 0; both keep the
    temperature.  With ``guarded`` the edge leaving node ``s`` also requires
    ``(-1)^s * T >= 1``.
    """
    same = (lambda x, y: y[0] - x[0], "==")
    if not guarded:
        rel = JumpRelation.where(same, sampler=_copy_sampler, description="T' = T")
        edges = [("e10", 0, 1, rel), ("e01", 1, 0, rel)]
    else:
        up = JumpRelation.where(
            same,
            (lambda x, y: x[0] - 1.0, ">="),
            sampler=lambda n, rng: _copy_sampler(n, rng, 1.0, 4.0),
            description="T' = T >= 1",
        )
        down = JumpRelation.where(
            same,
            (lambda x, y: -x[0] - 1.0, ">="),
            sampler=lambda n, rng: _copy_sampler(n, rng, -4.0, -1.0),
            description="T' = T <= -1",
        )
        edges = [("e10", 0, 1, up), ("e01", 1, 0, down)]
    return HybridPhaseSpace.build({0: BoxSpace.reals(1), 1: BoxSpace.reals(1)}, edges, name="thermostat")


def thermostat_jump(p: TaggedPoint) -> TaggedPoint:
    j = p.node
    if _sign(j) * p.coords[0] >= 1.0:
        return TaggedPoint(1 - j, p.coords)
    return p


def thermostat_control(space: "HybridPhaseSpace | None" = None) -> DeterministicControl:
    """Closed thermostat: ``T' = (-1)^(1-j)``, switching at ``T = +-1``."""
    space = space or thermostat_space()
    events = {j: [lambda x, j=j: 1.0 - _sign(j) * x[0]] for j in (0, 1)}
    return closed_control(
        space, lambda p: np.array([_sign(p.node)]), thermostat_jump, events, name="thermostat"
    )


# --------------------------------------------------------------------------- bouncing ball


def _bounce_sampler(n: int, rng: np.random.Generator):
    v = rng.uniform(0.05, 3.0, size=n) * rng.choice([-1.0, 1.0], size=n)
    w = rng.uniform(0.05, 3.0, size=n) * -np.sign(v)
    return [(np.array([0.0, a]), np.array([0.0, b])) for a, b in zip(v, w)]


def ball_space() -> HybridPhaseSpace:
    """One node with height >= 0 and velocity; edge ``e`` reverses velocity on the ground."""
    rel = JumpRelation.where(
        (lambda x, y: x[0], "=="),
        (lambda x, y: y[0], "=="),
        (lambda x, y: x[1] * y[1], "<"),
        sampler=_bounce_sampler,
        description="h = h' = 0, v v' < 0",
    )
    box = BoxSpace.of(Interval.at_least(0.0), Interval())
    return HybridPhaseSpace.build({0: box}, [("e", 0, 0, rel)], name="ball")


def ball_jump(r: float) -> Callable[[TaggedPoint], TaggedPoint]:
    def mu(p: TaggedPoint) -> TaggedPoint:
        h, v = p.coords
        if h == 0.0 and v < 0.0:
            return TaggedPoint(p.node, np.array([0.0, -r * v]))
        return p

    return mu


def ball_control(r: float = 0.5, space: "HybridPhaseSpace | None" = None) -> DeterministicControl:
    """Unit gravity, restitution ``r`` in (0, 1)."""
    space = space or ball_space()
    return closed_control(
        space,
        lambda p: np.array([p.coords[1], -1.0]),
        ball_jump(r),
        {0: [lambda x: x[0]]},
        name=f"ball(r={r})",
    )


def ball_bounce_times(r: float, k: int) -> list[float]:
    """Closed form ``t_k = sum_{j<k} r^j`` for ``h(0) = 0, v(0) = 1/2``."""
    return [sum(r**j for j in range(m)) for m in range(1, k + 1)]


# --------------------------------------------------------------------------- interconnections


@dataclass(frozen=True)
class Decomposition:
    """Open systems, their product and the interconnection into it."""

    parts: tuple[DeterministicControl, ...]
    product: DeterministicControl
    interconnection: SSubMorphism
    bound: HybridSSub

    def interconnected(self) -> DeterministicControl:
        return interconnect_control(self.interconnection, self.product)


def _diagonal_interconnection(bound_space: HybridPhaseSpace, prod: HybridSSub) -> SSubMorphism:
    bound = ssub_identity(bound_space)
    i_tot = pairing(identity(bound_space), identity(bound_space), prod.total)
    i_st = PhaseSpaceMorphism(
        bound_space, prod.state, identity(bound_space).nodes, identity(bound_space).maps, "id"
    )
    inv = PhaseSpaceMorphism(
        prod.state, bound_space, identity(prod.state).nodes, identity(prod.state).maps, "id"
    )
    return SSubMorphism(bound, prod, i_tot, i_st, inv, "diag")


def _open_pair(a: HybridPhaseSpace, b: HybridPhaseSpace) -> tuple[HybridSSub, HybridSSub, HybridPhaseSpace]:
    ab = product_space(a, b)
    sa = HybridSSub(ab, a, projection(ab, 0), True, f"{ab.name}->{a.name}")
    sb = HybridSSub(ab, b, projection(ab, 1), True, f"{ab.name}->{b.name}")
    return sa, sb, ab


def discrete_modes(k: Sequence, name: str = "modes") -> HybridPhaseSpace:
    """Point nodes with one edge between every ordered pair of distinct modes."""
    edges = [((i, j), i, j, JumpRelation.finite([((), ())])) for i in k for j in k if i != j]
    return HybridPhaseSpace.build({m: BoxSpace.point() for m in k}, edges, name=name)


def thermostat_decomposition() -> Decomposition:
    """Temperature and heater switch as two open systems joined diagonally."""
    a = HybridPhaseSpace.build({"T": BoxSpace.reals(1)}, name="temp")
    b = discrete_modes((0, 1), "switch")
    sa, sb, ab = _open_pair(a, b)
    heat = DeterministicControl(
        sa,
        lambda p: np.array([_sign(p.node[1])]),
        lambda p: TaggedPoint("T", p.coords),
        {n: [] for n in ab.nodes},
        "heat",
    )

    def switch(p: TaggedPoint) -> TaggedPoint:
        j = p.node[1]
        return TaggedPoint(1 - j if _sign(j) * p.coords[0] >= 1.0 else j, np.zeros(0))

    sw = DeterministicControl(
        sb,
        lambda p: np.zeros(0),
        switch,
        {n: [lambda x, j=n[1]: 1.0 - _sign(j) * x[0]] for n in ab.nodes},
        "switch",
    )
    prod_ssub = product_ssub(sa, sb)
    prod = product_control([heat, sw], prod_ssub)
    i = _diagonal_interconnection(ab, prod_ssub)
    return Decomposition((heat, sw), prod, i, i.domain)


def ball_decomposition(r: float = 0.5) -> Decomposition:
    """Height and velocity as two open systems; the bounce lives in the velocity part."""
    a = HybridPhaseSpace.build({"h": BoxSpace.of(Interval.at_least(0.0))}, name="height")
    vrel = JumpRelation.where(
        (lambda x, y: x[0] * y[0], "<"),
        sampler=lambda n, rng: [(np.array([p[1]]), np.array([q[1]])) for p, q in _bounce_sampler(n, rng)],
        description="v v' < 0",
    )
    b = HybridPhaseSpace.build({"v": BoxSpace.reals(1)}, [("e", "v", "v", vrel)], name="velocity")
    sa, sb, ab = _open_pair(a, b)
    fall = DeterministicControl(
        sa,
        lambda p: np.array([p.coords[1]]),
        lambda p: TaggedPoint("h", p.coords[:1]),
        {n: [] for n in ab.nodes},
        "height",
    )

    def bounce(p: TaggedPoint) -> TaggedPoint:
        h, v = p.coords
        if h == 0.0 and v < 0.0:
            return TaggedPoint("v", np.array([-r * v]))
        return TaggedPoint("v", np.array([v]))

    vel = DeterministicControl(
        sb, lambda p: np.array([-1.0]), bounce, {n: [lambda x: x[0]] for n in ab.nodes}, "velocity"
    )
    prod_ssub = product_ssub(sa, sb)
    prod = product_control([fall, vel], prod_ssub)
    i = _diagonal_interconnection(ab, prod_ssub)
    return Decomposition((fall, vel), prod, i, i.domain)


# --------------------------------------------------------------------------- switched systems


def _switch_signal_state(x: np.ndarray) -> int:
    return 1 if x[0] >= 0.0 else 2


def _switched_fields() -> dict[int, Callable[[np.ndarray], np.ndarray]]:
    return {
        1: lambda x: np.array([-x[1], x[0]]),
        2: lambda x: np.array([-x[1], 4.0 * x[0]]),
    }


def switched_state_decomposition() -> Decomposition:
    """Planar system switching between two rotations on the sign of the first coordinate."""
    fields = _switched_fields()
    a = HybridPhaseSpace.build({"x": BoxSpace.reals(2)}, name="plane")
    b = discrete_modes((1, 2), "signal")
    sa, sb, ab = _open_pair(a, b)
    flow = DeterministicControl(
        sa,
        lambda p: fields[p.node[1]](p.coords),
        lambda p: TaggedPoint("x", p.coords),
        {n: [] for n in ab.nodes},
        "flow",
    )
    sig = DeterministicControl(
        sb,
        lambda p: np.zeros(0),
        lambda p: TaggedPoint(_switch_signal_state(p.coords), np.zeros(0)),
        {n: [(lambda x: x[0]) if n[1] == 1 else (lambda x: -x[0])] for n in ab.nodes},
        "signal",
    )
    prod_ssub = product_ssub(sa, sb)
    prod = product_control([flow, sig], prod_ssub)
    i = _diagonal_interconnection(ab, prod_ssub)
    return Decomposition((flow, sig), prod, i, i.domain)


def switch_signal_time(t: float) -> int:
    """Mode 1 on ``[2k, 2k+1)``, mode 2 on ``[2k+1, 2k+2)``."""
    return 1 if math.floor(t) % 2 == 0 else 2


def switched_time_decomposition() -> Decomposition:
    """Time-driven switching realized with a clock coordinate ``t' = 1``."""
    fields = _switched_fields()
    a = HybridPhaseSpace.build({"x": BoxSpace.reals(3)}, name="plane-clock")
    b = discrete_modes((1, 2), "signal")
    sa, sb, ab = _open_pair(a, b)
    flow = DeterministicControl(
        sa,
        lambda p: np.concatenate([fields[p.node[1]](p.coords[:2]), [1.0]]),
        lambda p: TaggedPoint("x", p.coords),
        {n: [] for n in ab.nodes},
        "flow",
    )
    sig = DeterministicControl(
        sb,
        lambda p: np.zeros(0),
        lambda p: TaggedPoint(switch_signal_time(p.coords[2]), np.zeros(0)),
        {
            n: [(lambda x: math.sin(math.pi * x[2])) if n[1] == 1 else (lambda x: -math.sin(math.pi * x[2]))]
            for n in ab.nodes
        },
        "signal",
    )
    prod_ssub = product_ssub(sa, sb)
    prod = product_control([flow, sig], prod_ssub)
    i = _diagonal_interconnection(ab, prod_ssub)
    return Decomposition((flow, sig), prod, i, i.domain)


# --------------------------------------------------------------------------- networked thermostats


def thermostat_flip(c: HybridPhaseSpace) -> PhaseSpaceMorphism:
    """``(T, j) -> (-T, 1 - j)``: an involution of the thermostat space."""
    edges = {("id", 0): ("id", 1), ("id", 1): ("id", 0), "e10": "e01", "e01": "e10"}
    neg = SmoothMap.linear([[-1.0]])
    return PhaseSpaceMorphism.build(c, c, lambda j: 1 - j, lambda j: neg, edges, name="flip")


def swap_factors(ab: HybridPhaseSpace, ba: HybridPhaseSpace) -> PhaseSpaceMorphism:
    """``(p, q) -> (q, p)`` between ``a x b`` and ``b x a``."""
    a, b = ab.factors
    maps = {}
    for s, t in ab.nodes:
        da, db = a.dim(s), b.dim(t)
        maps[(s, t)] = SmoothMap.select(da + db, list(range(da, da + db)) + list(range(da)))
    return PhaseSpaceMorphism.build(
        ab, ba, lambda n: (n[1], n[0]), maps, lambda e: (e[1], e[0]), name="swap"
    )


def _relabel(m: PhaseSpaceMorphism, domain: HybridPhaseSpace, codomain: HybridPhaseSpace) -> PhaseSpaceMorphism:
    return PhaseSpaceMorphism(domain, codomain, m.nodes, m.maps, m.name)


@dataclass(frozen=True)
class NetworkExample:
    morphism: "NetworkMorphism"
    w: dict
    v: dict


def _thermostat_open(entry: HybridSSub, field_fn: Callable[[float, int, float, int], float], name: str):
    def vf(p: TaggedPoint) -> np.ndarray:
        (j, jj), (x, xx) = p.node, p.coords
        return np.array([field_fn(x, j, xx, jj)])

    def jump(p: TaggedPoint) -> TaggedPoint:
        j, x = p.node[0], p.coords[0]
        return TaggedPoint(1 - j if _sign(j) * x >= 1.0 else j, p.coords[:1])

    events = {n: [lambda y, j=n[0]: 1.0 - _sign(j) * y[0]] for n in entry.total.nodes}
    return DeterministicControl(entry, vf, jump, events, name)


def networked_thermostats(
    coupling: "Callable[[float, float], float] | None" = None, defect: float = 0.0
) -> NetworkExample:
    """Two coupled thermostats as a network over one open thermostat.

    The open thermostat is ``c x c -> c`` (first factor) with field
    ``(-1)^(1-j) + f(x, x')``; the network morphism ``z`` embeds the single
    thermostat onto the antidiagonal ``(x, j) -> (x, j, -x, 1-j)``.
    ``defect`` is added to the second label's field.
    """
    from .networks import ListMorphism, Network, NetworkMorphism, SystemList, pi_product

    f = coupling or (lambda x, y: 0.3 * (y - x))
    c = thermostat_space()
    cc = product_space(c, c)
    entry = HybridSSub(cc, c, projection(cc, 0), True, "p1")
    X = SystemList((1, 2), {1: entry, 2: entry})
    Y = SystemList(("star",), {"star": entry})
    flip = thermostat_flip(c)
    idc = identity(c)
    phi1 = SSubMorphism(entry, entry, product_map(idc, flip, cc, cc), idc, None, "Phi1")
    phi2 = SSubMorphism(entry, entry, product_map(flip, idc, cc, cc), flip, None, "Phi2")
    lm = ListMorphism(X, Y, {1: "star", 2: "star"}, {1: phi1, 2: phi2})

    PY, PX = pi_product(Y), pi_product(X)
    bound_y = ssub_identity(c)
    iy = SSubMorphism(
        bound_y, PY, pairing(idc, idc, PY.total), _relabel(idc, c, PY.state), _relabel(idc, PY.state, c), "iota_Y"
    )
    bound_x = ssub_identity(cc)
    idcc = identity(cc)
    ix = SSubMorphism(
        bound_x,
        PX,
        pairing(idcc, swap_factors(cc, cc), PX.total),
        _relabel(idcc, cc, PX.state),
        _relabel(idcc, PX.state, cc),
        "iota_X",
    )
    zmap = pairing(idc, flip, cc)
    z = SSubMorphism(bound_y, bound_x, zmap, zmap, None, "z")
    nm = NetworkMorphism(Network(X, bound_x, ix, "X"), Network(Y, bound_y, iy, "Y"), lm, z)
    w = {"star": _thermostat_open(entry, lambda x, j, xx, jj: _sign(j) + f(x, xx), "w")}
    v = {
        1: _thermostat_open(entry, lambda x, j, xx, jj: _sign(j) + f(x, -xx), "v1"),
        2: _thermostat_open(entry, lambda x, j, xx, jj: _sign(j) - f(-x, xx) + defect, "v2"),
    }
    return NetworkExample(nm, w, v)


# --------------------------------------------------------------------------- random affine networks


def _invertible(rng: np.random.Generator, n: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q @ np.diag(rng.uniform(0.5, 2.0, size=n))


def _affine_open_system(entry: HybridSSub, d: int, rng: np.random.Generator, name: str) -> DeterministicControl:
    """Two-mode affine open system; mode ``k`` flips when ``a_k . x >= 1``."""
    m = entry.total.dim(entry.total.nodes[0]) - d
    mats = {k: (0.5 * rng.standard_normal((d, d)), 0.5 * rng.standard_normal((d, m)), rng.standard_normal(d)) for k in (0, 1)}
    guards = {k: rng.standard_normal(d) for k in (0, 1)}

    def vf(p: TaggedPoint) -> np.ndarray:
        M, N, c = mats[p.node[0]]
        return M @ p.coords[:d] + N @ p.coords[d:] + c

    def jump(p: TaggedPoint) -> TaggedPoint:
        k = p.node[0]
        x = p.coords[:d]
        return TaggedPoint(1 - k if guards[k] @ x >= 1.0 else k, x)

    events = {n: [lambda y, a=guards[n[0]]: 1.0 - a @ y[:d]] for n in entry.total.nodes}
    return DeterministicControl(entry, vf, jump, events, name)


def _pullback_open_system(
    w: DeterministicControl, M: np.ndarray, off: np.ndarray, P: np.ndarray, p: np.ndarray, defect: float, name: str
) -> DeterministicControl:
    """Transport ``w`` along the affine isomorphism ``(M, off)`` with state part ``(P, p)``."""
    Minv = np.linalg.inv(M)

    def pre(q: TaggedPoint) -> TaggedPoint:
        return TaggedPoint(q.node, Minv @ (q.coords - off))

    bump = np.zeros(P.shape[0])
    bump[0] = defect

    def vf(q: TaggedPoint) -> np.ndarray:
        return P @ w.X(pre(q)) + bump

    def jump(q: TaggedPoint) -> TaggedPoint:
        src = pre(q)
        r = w.rho(src)
        if r == apply(w.ssub.proj, src, check=False):
            # trivial jump: return the base point itself rather than a round trip
            return apply(w.ssub.proj, q, check=False)
        return TaggedPoint(r.node, P @ r.coords + p)

    events = {
        n: [lambda y, fn=fn: fn(Minv @ (y - off)) for fn in w.event_functions[n]] for n in w.ssub.total.nodes
    }
    return DeterministicControl(w.ssub, vf, jump, events, name)


def random_affine_instance(seed: int, defect: float = 0.0, n_x: int = 3, n_y: int = 2) -> NetworkExample:
    """Seeded network morphism between affine two-mode networks.

    Every ``v_x`` is ``w_phi(x)`` transported along ``Phi_x``, so componentwise
    relatedness holds by construction; ``defect`` perturbs the field of the
    first X label.
    """
    from .networks import ListMorphism, Network, NetworkMorphism, SystemList, pi_product
    from .phase_space import nest, unnest

    rng = np.random.default_rng(seed)
    ylab = [f"y{k}" for k in range(n_y)]
    xlab = [f"x{k}" for k in range(n_x)]
    order = list(rng.permutation(n_y))
    phi = {x: ylab[order[k]] if k < n_y else ylab[int(rng.integers(n_y))] for k, x in enumerate(xlab)}
    dims = {y: int(rng.integers(1, 3)) for y in ylab}
    inputs = {y: int(rng.integers(1, 3)) for y in ylab}
    def keep_sampler(d: int):
        def sampler(n: int, rng: np.random.Generator):
            return [(x, x.copy()) for x in rng.uniform(-3.0, 3.0, size=(n, d))]

        return sampler

    entry: dict[str, HybridSSub] = {}
    for y in ylab:
        keep = JumpRelation.where(
            (lambda a, b: float(np.max(np.abs(a - b), initial=0.0)), "=="),
            sampler=keep_sampler(dims[y]),
            description="x' = x",
        )
        A = HybridPhaseSpace.build(
            {0: BoxSpace.reals(dims[y]), 1: BoxSpace.reals(dims[y])},
            [("s01", 0, 1, keep), ("s10", 1, 0, keep)],
            name=f"A_{y}",
        )
        B = HybridPhaseSpace.build({"u": BoxSpace.reals(inputs[y])}, name=f"B_{y}")
        E = product_space(A, B)
        entry[y] = HybridSSub(E, A, projection(E, 0), True, f"E_{y}")
    Y = SystemList(tuple(ylab), entry)
    X = SystemList(tuple(xlab), {x: entry[phi[x]] for x in xlab})

    w = {y: _affine_open_system(entry[y], dims[y], rng, f"w_{y}") for y in ylab}
    comps, v, blocks = {}, {}, {}
    for i, x in enumerate(xlab):
        y = phi[x]
        d, m = dims[y], inputs[y]
        P, R = _invertible(rng, d), _invertible(rng, m)
        Q = rng.standard_normal((m, d))
        p, q = rng.standard_normal(d), rng.standard_normal(m)
        M = np.block([[P, np.zeros((d, m))], [Q, R]])
        off = np.concatenate([p, q])
        E, A = entry[y].total, entry[y].state
        tot = PhaseSpaceMorphism.build(E, E, lambda n: n, lambda n, M=M, off=off: SmoothMap.linear(M, off), name=f"Phi_{x}")
        st = PhaseSpaceMorphism.build(A, A, lambda n: n, lambda n, P=P, p=p: SmoothMap.linear(P, p), name=f"Phi_{x}")
        comps[x] = SSubMorphism(entry[y], entry[y], tot, st, None, f"Phi_{x}")
        v[x] = _pullback_open_system(w[y], M, off, P, p, defect if i == 0 else 0.0, f"v_{x}")
        blocks[x] = (P, p, Q, R, q)
    lm = ListMorphism(X, Y, phi, comps)

    PY, PX = pi_product(Y), pi_product(X)
    yoff = np.cumsum([0] + [dims[y] for y in ylab])
    xoff = np.cumsum([0] + [dims[phi[x]] for x in xlab])
    DY, DX = int(yoff[-1]), int(xoff[-1])
    ysl = {y: slice(int(yoff[k]), int(yoff[k + 1])) for k, y in enumerate(ylab)}
    xsl = {x: slice(int(xoff[k]), int(xoff[k + 1])) for k, x in enumerate(xlab)}

    # inputs seen by the Y entries: affine in the bound state
    K = {y: (rng.standard_normal((inputs[y], DY)), rng.standard_normal(inputs[y])) for y in ylab}
    iy_rows = []
    for y in ylab:
        sel = np.zeros((dims[y], DY))
        sel[:, ysl[y]] = np.eye(dims[y])
        iy_rows.append((sel, np.zeros(dims[y])))
        iy_rows.append(K[y])
    iy_mat = np.vstack([r[0] for r in iy_rows])
    iy_off = np.concatenate([r[1] for r in iy_rows])
    SY, SX = PY.state, PX.state

    def modes(node, n):
        return unnest(node, n) if n > 1 else [node]

    iy_tot = PhaseSpaceMorphism.build(
        SY, PY.total, lambda n: nest([(k, "u") for k in modes(n, n_y)]), lambda n: SmoothMap.linear(iy_mat, iy_off), name="iota_Y"
    )
    bound_y = ssub_identity(SY)
    iy = SSubMorphism(bound_y, PY, iy_tot, identity(SY), identity(SY), "iota_Y")

    Z = np.zeros((DX, DY))
    zeta = np.zeros(DX)
    for x in xlab:
        P, p = blocks[x][0], blocks[x][1]
        Z[xsl[x], ysl[phi[x]]] = P
        zeta[xsl[x]] = p
    yidx = {y: k for k, y in enumerate(ylab)}
    zmap = PhaseSpaceMorphism.build(
        SY,
        SX,
        lambda n: nest([modes(n, n_y)[yidx[phi[x]]] for x in xlab]),
        lambda n: SmoothMap.linear(Z, zeta),
        name="z",
    )
    bound_x = ssub_identity(SX)
    z = SSubMorphism(bound_y, bound_x, zmap, zmap, None, "z")

    Zp = np.linalg.pinv(Z)
    ix_rows = []
    for x in xlab:
        y = phi[x]
        P, p, Q, R, q = blocks[x]
        Ey = np.zeros((dims[y], DY))
        Ey[:, ysl[y]] = np.eye(dims[y])
        T = Q @ Ey + R @ K[y][0]
        tau = R @ K[y][1] + q
        L = T @ Zp
        sel = np.zeros((dims[y], DX))
        sel[:, xsl[x]] = np.eye(dims[y])
        ix_rows.append((sel, np.zeros(dims[y])))
        ix_rows.append((L, tau - L @ zeta))
    ix_mat = np.vstack([r[0] for r in ix_rows])
    ix_off = np.concatenate([r[1] for r in ix_rows])
    ix_tot = PhaseSpaceMorphism.build(
        SX, PX.total, lambda n: nest([(k, "u") for k in modes(n, n_x)]), lambda n: SmoothMap.linear(ix_mat, ix_off), name="iota_X"
    )
    ix = SSubMorphism(bound_x, PX, ix_tot, identity(SX), identity(SX), "iota_X")
    nm = NetworkMorphism(Network(X, bound_x, ix, "X"), Network(Y, bound_y, iy, "Y"), lm, z)
    return NetworkExample(nm, w, v)


__all__ = [
    "Decomposition",
    "random_affine_instance",
    "NetworkExample",
    "networked_thermostats",
    "swap_factors",
    "thermostat_flip",
    "ball_bounce_times",
    "ball_control",
    "ball_decomposition",
    "ball_jump",
    "ball_space",
    "discrete_modes",
    "switch_signal_time",
    "switched_state_decomposition",
    "switched_time_decomposition",
    "thermostat_control",
    "thermostat_decomposition",
    "thermostat_jump",
    "thermostat_space",
]
