"""Networks of open systems: indexed lists, their products, interconnections,
network morphisms and the relatedness they induce.

A list morphism ``(phi, Phi)`` from an X-indexed list to a Y-indexed list has
``phi: X -> Y`` and for every ``x`` a submersion morphism
``Phi[x]: entry_Y(phi(x)) -> entry_X(x)``.  Its product map goes the other
way, ``Pi(Y) -> Pi(X)``, with ``x``-th component ``Phi[x] o p_phi(x)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Mapping, Sequence

import numpy as np

from .execution import Execution, IntegratorOptions, execute, pushforward_execution
from .morphisms import (
    HybridSSub,
    NodeMap,
    PhaseSpaceMorphism,
    SmoothMap,
    SSubMorphism,
    apply,
    check_ssub_morphism,
    compose,
    differential,
    identity,
    is_interconnection,
    pairing,
    product_ssub,
    projection,
    same_space,
    ssub_morphism_identity,
    terminal_ssub,
)
from .phase_space import HybridPhaseSpace, TaggedPoint
from .report import Report, jsonable
from .sampling import make_rng, sample_points
from .systems import (
    DeterministicControl,
    check_control,
    check_relatedness,
    interconnect_control,
    product_control,
)

Label = Hashable


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class SystemList:
    labels: tuple[Label, ...]
    entries: dict[Label, HybridSSub]

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise NetworkError("labels of a system list must be unique")
        missing = [x for x in self.labels if x not in self.entries]
        if missing:
            raise NetworkError(f"labels without entries: {missing}")

    def __getitem__(self, x: Label) -> HybridSSub:
        return self.entries[x]

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class ListMorphism:
    source: SystemList  # X-indexed
    target: SystemList  # Y-indexed
    label_map: dict[Label, Label]
    components: dict[Label, SSubMorphism]


@dataclass(frozen=True)
class Network:
    systems: SystemList
    bound: HybridSSub
    iota: SSubMorphism
    name: str = ""


@dataclass(frozen=True)
class NetworkMorphism:
    source: Network  # X network
    target: Network  # Y network
    lm: ListMorphism
    z: SSubMorphism  # bound_Y -> bound_X


def pi_product(systems: SystemList) -> HybridSSub:
    """Iterated product in label order; the empty list gives the terminal submersion."""
    if not systems.labels:
        return terminal_ssub()
    out = systems[systems.labels[0]]
    for x in systems.labels[1:]:
        out = product_ssub(out, systems[x])
    return out


def nary_projection(P: HybridPhaseSpace, n: int, k: int) -> PhaseSpaceMorphism:
    """Projection of a left-nested ``n``-fold product onto factor ``k``."""
    if n == 1:
        return identity(P)
    if k == n - 1:
        return projection(P, 1)
    return compose(nary_projection(P.factors[0], n - 1, k), projection(P, 0))


def _to_terminal(src: HybridPhaseSpace, term: HybridPhaseSpace) -> PhaseSpaceMorphism:
    star = term.nodes[0]
    unit = term.graph.unit_edge[star]
    return PhaseSpaceMorphism(
        src,
        term,
        NodeMap({n: star for n in src.nodes}, {e.id: unit for e in src.edges}),
        {n: SmoothMap.linear(np.zeros((0, src.dim(n)))) for n in src.nodes},
        "!",
    )


def _tuple_into(maps: Sequence[PhaseSpaceMorphism], codomain: HybridPhaseSpace, src: HybridPhaseSpace):
    if not maps:
        return _to_terminal(src, codomain)
    out = maps[0]
    for m in maps[1:]:
        out = pairing(out, m)
    if not same_space(out.codomain, codomain):
        raise NetworkError("tupled map does not land in the expected product")
    return PhaseSpaceMorphism(out.domain, codomain, out.nodes, out.maps, out.name)


def pi_morphism(lm: ListMorphism) -> SSubMorphism:
    """The map ``Pi(Y) -> Pi(X)`` whose ``x``-th projection is ``Phi[x] o p_phi(x)``."""
    PY, PX = pi_product(lm.target), pi_product(lm.source)
    ylabels = list(lm.target.labels)
    n = len(ylabels)
    tot, st = [], []
    for x in lm.source.labels:
        k = ylabels.index(lm.label_map[x])
        phi = lm.components[x]
        tot.append(compose(phi.f_tot, nary_projection(PY.total, n, k)))
        st.append(compose(phi.f_st, nary_projection(PY.state, n, k)))
    f_tot = _tuple_into(tot, PX.total, PY.total)
    f_st = _tuple_into(st, PX.state, PY.state)
    return SSubMorphism(PY, PX, f_tot, f_st, None, "Pi")


def compose_list_morphisms(second: ListMorphism, first: ListMorphism) -> ListMorphism:
    """``second o first`` for ``first: X -> Y`` and ``second: Y -> Z``.

    Components compose contravariantly: ``Phi[x] o Psi[phi(x)]``.
    """
    from .morphisms import compose_ssub

    lab = {x: second.label_map[first.label_map[x]] for x in first.source.labels}
    comps = {
        x: compose_ssub(first.components[x], second.components[first.label_map[x]])
        for x in first.source.labels
    }
    return ListMorphism(first.source, second.target, lab, comps)


def identity_list_morphism(systems: SystemList) -> ListMorphism:
    return ListMorphism(
        systems,
        systems,
        {x: x for x in systems.labels},
        {x: ssub_morphism_identity(systems[x]) for x in systems.labels},
    )


def check_network(net: Network, samples: int = 20, tol: float = 1e-9, seed: int = 0) -> Report:
    rep = Report("network")
    P = pi_product(net.systems)
    if not same_space(net.iota.codomain.total, P.total) or not same_space(net.iota.codomain.state, P.state):
        rep.fail("interconnection does not land in the product of the list")
        return rep
    ok, irep = is_interconnection(net.iota, samples, tol, seed)
    rep.merge(irep, "interconnection: ")
    rep.merge(check_ssub_morphism(net.iota, samples, tol, seed), "square: ")
    return rep


def _sup(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b), initial=0.0))


def check_network_morphism(
    nm: NetworkMorphism,
    samples: int = 20,
    tol: float = 1e-9,
    seed: "int | np.random.Generator" = 0,
    points: "Sequence[TaggedPoint] | None" = None,
) -> Report:
    """Every component, ``z``, and the square ``iota_X o z = Pi(phi, Phi) o iota_Y``."""
    rep = Report("network_morphism")
    rng = make_rng(seed)
    for x in nm.lm.source.labels:
        rep.merge(check_ssub_morphism(nm.lm.components[x], samples, tol, rng), f"Phi[{x}]: ")
    rep.merge(check_ssub_morphism(nm.z, samples, tol, rng), "z: ")
    pi = pi_morphism(nm.lm)
    iX, iY = nm.source.iota, nm.target.iota
    worst = 0.0
    for part, pts in (
        ("total", points if points is not None else sample_points(nm.target.bound.total, samples, rng)),
        ("state", sample_points(nm.target.bound.state, samples, rng)),
    ):
        attr = "f_tot" if part == "total" else "f_st"
        for p in pts:
            lhs = apply(getattr(iX, attr), apply(getattr(nm.z, attr), p, False), False)
            rhs = apply(getattr(pi, attr), apply(getattr(iY, attr), p, False), False)
            if lhs.node != rhs.node:
                rep.fail(f"{part} square lands on different nodes", point=p, lhs=lhs, rhs=rhs)
                continue
            r = _sup(lhs.coords, rhs.coords)
            worst = max(worst, r)
            if r > tol:
                rep.fail(f"{part} square does not commute", point=p, residual=r, lhs=lhs, rhs=rhs)
    rep.metrics["max_compatibility_residual"] = worst
    return rep


@dataclass
class TheoremReport(Report):
    status: str = "unchecked"
    hypothesis: dict[str, Any] = field(default_factory=dict)
    stages: dict[str, Any] = field(default_factory=dict)
    conclusion: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d = super().to_dict()
        d.update(
            status=self.status,
            hypothesis=jsonable(self.hypothesis),
            stages=jsonable(self.stages),
            conclusion=jsonable(self.conclusion),
        )
        return d


class TheoremError(NetworkError):
    pass


def interconnected_controls(
    nm: NetworkMorphism,
    w: Mapping[Label, DeterministicControl],
    v: Mapping[Label, DeterministicControl],
) -> tuple[DeterministicControl, DeterministicControl, DeterministicControl, DeterministicControl]:
    """Product controls on ``Pi(Y)`` and ``Pi(X)`` and their interconnections ``W`` and ``V``."""
    Y, X = nm.lm.target, nm.lm.source
    PY, PX = pi_product(Y), pi_product(X)
    wp = product_control([w[y] for y in Y.labels], PY)
    vp = product_control([v[x] for x in X.labels], PX)
    W = interconnect_control(nm.target.iota, wp)
    V = interconnect_control(nm.source.iota, vp)
    return wp, vp, W, V


def verify_main_theorem(
    nm: NetworkMorphism,
    w: Mapping[Label, DeterministicControl],
    v: Mapping[Label, DeterministicControl],
    samples: int = 20,
    tol: float = 1e-8,
    hypothesis_tol: "float | None" = None,
    seed: int = 0,
    points: "Sequence[TaggedPoint] | None" = None,
) -> TheoremReport:
    """Componentwise relatedness implies relatedness of the interconnected systems.

    The hypothesis is reported per label; when it fails the conclusion is
    still computed for diagnosis but the report is marked
    ``hypothesis_violated`` and does not pass.

    Raises:
        TheoremError: if a control fails its own check.
    """
    htol = tol if hypothesis_tol is None else hypothesis_tol
    rep = TheoremReport("theorem")
    for label, c in list(w.items()) + list(v.items()):
        cr = check_control(c, samples=max(4, samples // 4), tol=1e-9, seed=seed)
        if not cr.passed:
            raise TheoremError(f"control {label!r} is invalid: " + "; ".join(cr.issues[:3]))
    hyp_ok = True
    for x in nm.lm.source.labels:
        y = nm.lm.label_map[x]
        r = check_relatedness(nm.lm.components[x], w[y], v[x], samples, htol, seed)
        rep.hypothesis[str(x)] = {
            "max_vf_residual": r.max_vf_residual,
            "max_jump_mismatch": r.max_jump_mismatch,
            "node_mismatches": r.node_mismatches,
            "passed": r.passed,
        }
        if not r.passed:
            hyp_ok = False
            rep.issues.append(f"hypothesis violated for label {x!r}")
            rep.witnesses.extend(r.witnesses[:3])
    wp, vp, W, V = interconnected_controls(nm, w, v)
    pts = list(points) if points is not None else sample_points(nm.target.bound.total, samples, seed)
    concl = check_relatedness(nm.z, W, V, points=pts, tol=tol)
    pi = pi_morphism(nm.lm)
    iY = nm.target.iota
    mid_pts = [apply(iY.f_tot, p, False) for p in pts]
    stage = check_relatedness(pi, wp, vp, points=mid_pts, tol=tol)
    inv_norm = 0.0
    for p in pts:
        b = apply(nm.source.iota.f_st, apply(nm.source.bound.proj, apply(nm.z.f_tot, p, False), False), False)
        inv_norm = max(inv_norm, float(np.linalg.norm(differential(nm.source.iota.st_inverse, b), np.inf)))
    rep.stages = {
        "product": {"max_vf_residual": stage.max_vf_residual, "max_jump_mismatch": stage.max_jump_mismatch},
        "inverse_jacobian_norm": inv_norm,
        "vf_bound": inv_norm * stage.max_vf_residual,
    }
    rep.conclusion = {
        "max_vf_residual": concl.max_vf_residual,
        "max_jump_mismatch": concl.max_jump_mismatch,
        "node_mismatches": concl.node_mismatches,
        "passed": concl.passed,
        "samples": len(pts),
    }
    rep.metrics.update(tol=tol, hypothesis_tol=htol)
    if not hyp_ok:
        rep.passed = False
        rep.status = "hypothesis_violated"
    elif not concl.passed:
        rep.passed = False
        rep.status = "conclusion_violated"
        rep.issues.extend(concl.issues[:20])
        rep.witnesses.extend(concl.witnesses[:5])
    else:
        rep.status = "related"
    return rep


@dataclass(frozen=True)
class InvarianceDemo:
    bound_y: Execution  # execution of W
    bound_x: Execution  # execution of V from z(x0)
    pushed: Execution  # W execution pushed through z
    sup_deviation: float
    switches: int
    compared: int


def invariance_demo(
    nm: NetworkMorphism,
    w: Mapping[Label, DeterministicControl],
    v: Mapping[Label, DeterministicControl],
    x0: TaggedPoint,
    opts: "IntegratorOptions | None" = None,
    skip: float = 1e-6,
) -> InvarianceDemo:
    """Execute both interconnected systems and compare ``z``-pushed samples.

    Samples within ``skip`` of a jump of either execution are not compared
    when the two sides sit on different nodes there.
    """
    opts = opts or IntegratorOptions()
    _, _, W, V = interconnected_controls(nm, w, v)
    ew = execute(W, x0, opts)
    ev = execute(V, apply(nm.z.f_tot, x0), opts)
    pushed = pushforward_execution(nm.z.f_tot, ew)
    jt = np.array(ew.jump_times + ev.jump_times)
    worst = 0.0
    compared = 0
    for a in pushed.arcs:
        for t, y in zip(a.times, a.states):
            near = bool(jt.size) and float(np.min(np.abs(jt - t))) <= skip
            match = None
            for b in reversed(ev.arcs):
                if b.t_start <= t <= b.t_end and b.node == a.node:
                    match = b
                    break
            if match is None:
                if near:
                    continue
                worst = float("inf")
                continue
            compared += 1
            worst = max(worst, _sup(match.at(t), y))
    return InvarianceDemo(ew, ev, pushed, worst, len(ew.jumps), compared)


__all__ = [
    "InvarianceDemo",
    "ListMorphism",
    "Network",
    "NetworkError",
    "NetworkMorphism",
    "SystemList",
    "TheoremError",
    "TheoremReport",
    "check_network",
    "check_network_morphism",
    "compose_list_morphisms",
    "identity_list_morphism",
    "interconnected_controls",
    "invariance_demo",
    "nary_projection",
    "pi_morphism",
    "pi_product",
    "verify_main_theorem",
]
