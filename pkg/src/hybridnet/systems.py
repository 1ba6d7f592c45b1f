"""Deterministic hybrid open systems and the maps between them.

A control on a submersion ``total -> state`` is a pair: a vector field giving
for every total point a tangent vector at its base point, and a jump map
giving for every total point a state point reachable along some edge.  Event
functions mark where jumps may happen so executions can localize them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .morphisms import (
    HybridSSub,
    SSubMorphism,
    apply,
    differential,
    is_closed,
    is_interconnection,
    product_ssub,
    same_space,
)
from .phase_space import NodeId, TaggedPoint, lambda_lookup, split_underlying
from .report import RelatednessReport, Report
from .sampling import sample_points

EventFn = Callable[[np.ndarray], float]


class SystemsError(ValueError):
    pass


@dataclass(frozen=True)
class DeterministicControl:
    """Vector field and jump map on a submersion, plus per-node event functions.

    A node missing from ``event_functions`` has no declared events; execution
    then watches ``jump_map(p) != p`` directly.
    """

    ssub: HybridSSub
    vector_field: Callable[[TaggedPoint], np.ndarray]
    jump_map: Callable[[TaggedPoint], TaggedPoint]
    event_functions: Mapping[NodeId, Sequence[EventFn]] = field(default_factory=dict)
    name: str = ""

    def X(self, p: TaggedPoint) -> np.ndarray:
        return np.asarray(self.vector_field(p), dtype=float).reshape(-1)

    def rho(self, p: TaggedPoint) -> TaggedPoint:
        return self.jump_map(p)

    def event_value(self, p: TaggedPoint) -> "float | None":
        """Smallest event function value at ``p``; ``None`` if none are declared."""
        fns = self.event_functions.get(p.node)
        if fns is None:
            return None
        if not fns:
            return np.inf
        return min(float(fn(p.coords)) for fn in fns)

    def __repr__(self) -> str:
        return f"DeterministicControl({self.name or '<anon>'} on {self.ssub!r})"


def _points(c: DeterministicControl, samples: int, seed, points) -> list[TaggedPoint]:
    if points is not None:
        return list(points)
    return sample_points(c.ssub.total, samples, seed)


def check_control(
    c: DeterministicControl,
    samples: int = 20,
    tol: float = 1e-9,
    seed: "int | np.random.Generator" = 0,
    points: "Sequence[TaggedPoint] | None" = None,
) -> Report:
    """Vector-field dimensions, jump targets along edges and event consistency."""
    rep = Report("control")
    st = c.ssub.state
    missing_events = set()
    pts = _points(c, samples, seed, points)
    jumps = 0
    for p in pts:
        base = apply(c.ssub.proj, p, check=False)
        try:
            v = c.X(p)
        except Exception as exc:  # noqa: BLE001 - a broken user callable is a finding
            rep.fail(f"vector field raised {type(exc).__name__}: {exc}", point=p)
            continue
        if v.shape[0] != st.dim(base.node):
            rep.fail("vector field has wrong dimension", point=p, got=v.shape[0], expected=st.dim(base.node))
        elif not np.all(np.isfinite(v)):
            rep.fail("vector field is not finite", point=p, value=v)
        try:
            q = c.rho(p)
        except Exception as exc:  # noqa: BLE001
            rep.fail(f"jump map raised {type(exc).__name__}: {exc}", point=p)
            continue
        if q.node not in st.space or not st.box(q.node).contains(q.coords, tol):
            rep.fail("jump target outside state space", point=p, target=q)
            continue
        if lambda_lookup(st, base, q, tol) is None:
            rep.fail("jump is not along any edge", point=p, base=base, target=q)
        if not q.close_to(base, 0.0):
            jumps += 1
            ev = c.event_value(p)
            if ev is None:
                missing_events.add(p.node)
            elif ev > tol:
                rep.fail("jump happens where no event function is active", point=p, event=ev)
    rep.metrics.update(points=len(pts), nontrivial_jumps=jumps, tol=tol)
    if missing_events:
        rep.metrics["nodes_without_events"] = sorted(map(repr, missing_events))
    return rep


def check_relatedness(
    f: SSubMorphism,
    c: DeterministicControl,
    d: DeterministicControl,
    samples: int = 20,
    tol: float = 1e-9,
    seed: "int | np.random.Generator" = 0,
    points: "Sequence[TaggedPoint] | None" = None,
) -> RelatednessReport:
    """Residuals of ``T f_st . X = Y o f_tot`` and ``f_st o rho = sigma o f_tot``."""
    rep = RelatednessReport("relatedness", tol=tol)
    for p in _points(c, samples, seed, points):
        base = apply(c.ssub.proj, p, check=False)
        q = apply(f.f_tot, p, check=False)
        lhs = differential(f.f_st, base) @ c.X(p)
        rhs = d.X(q)
        if lhs.shape != rhs.shape:
            rep.fail("vector fields have incompatible dimensions", point=p)
            continue
        r = float(np.max(np.abs(lhs - rhs), initial=0.0))
        if not np.isfinite(r):
            r = np.inf
        rep.max_vf_residual = max(rep.max_vf_residual, r)
        if r > tol:
            rep.fail("vector fields are not related", point=p, residual=r, pushed=lhs, target=rhs)
        a = apply(f.f_st, c.rho(p), check=False)
        b = d.rho(q)
        if a.node != b.node or a.coords.shape != b.coords.shape:
            rep.node_mismatches += 1
            rep.fail("jump maps land on different nodes", point=p, pushed=a, target=b)
            continue
        m = float(np.max(np.abs(a.coords - b.coords), initial=0.0))
        rep.max_jump_mismatch = max(rep.max_jump_mismatch, m)
        if m > tol:
            rep.fail("jump maps are not related", point=p, mismatch=m, pushed=a, target=b)
    return rep


def interconnect_control(
    i: SSubMorphism,
    d: DeterministicControl,
    verified: bool = False,
    samples: int = 10,
    tol: float = 1e-9,
    seed: int = 0,
) -> DeterministicControl:
    """Pull a control on the codomain back along an interconnection.

    ``X(p) = T(i_st^-1) . Y(i_tot p)`` and ``rho(p) = i_st^-1(sigma(i_tot p))``,
    using the differential of the supplied inverse.

    Raises:
        SystemsError: if ``i`` is not a verified interconnection or the
            pulled-back control fails its spot check.
    """
    if not verified:
        ok, rep = is_interconnection(i, samples, tol, seed)
        if not ok:
            raise SystemsError("not an interconnection: " + "; ".join(rep.issues[:3]))
    if not same_space(i.codomain.total, d.ssub.total):
        raise SystemsError("control does not live on the codomain of the interconnection")
    inv = i.st_inverse
    f_tot, f_st = i.f_tot, i.f_st
    proj = i.domain.proj

    def vf(p: TaggedPoint) -> np.ndarray:
        q = apply(f_tot, p, check=False)
        b = apply(f_st, apply(proj, p, check=False), check=False)
        return differential(inv, b) @ d.X(q)

    def jump(p: TaggedPoint) -> TaggedPoint:
        return apply(inv, d.rho(apply(f_tot, p, check=False)), check=False)

    events: dict[NodeId, list[EventFn]] = {}
    for n in i.domain.total.nodes:
        m = f_tot.nodes(n)
        if m not in d.event_functions:
            continue
        g = f_tot.maps[n]
        events[n] = [(lambda x, fn=fn, g=g: fn(g(x))) for fn in d.event_functions[m]]
    out = DeterministicControl(i.domain, vf, jump, events, f"{i.name}*{d.name}")
    spot = check_control(out, samples=max(2, samples // 2), tol=max(tol, 1e-9), seed=seed)
    if not spot.passed:
        raise SystemsError("pulled-back control fails its check: " + "; ".join(spot.issues[:3]))
    return out


def _product2(c: DeterministicControl, d: DeterministicControl, ssub: HybridSSub) -> DeterministicControl:
    ta, tb = c.ssub.total, d.ssub.total

    def vf(p: TaggedPoint) -> np.ndarray:
        pa, pb = split_underlying(ta, tb, p)
        return np.concatenate([c.X(pa), d.X(pb)])

    def jump(p: TaggedPoint) -> TaggedPoint:
        pa, pb = split_underlying(ta, tb, p)
        qa, qb = c.rho(pa), d.rho(pb)
        return TaggedPoint((qa.node, qb.node), np.concatenate([qa.coords, qb.coords]))

    events: dict[NodeId, list[EventFn]] = {}
    for s in ta.nodes:
        for t in tb.nodes:
            if s not in c.event_functions or t not in d.event_functions:
                continue
            k = ta.dim(s)
            fns = [(lambda x, fn=fn, k=k: fn(x[:k])) for fn in c.event_functions[s]]
            fns += [(lambda x, fn=fn, k=k: fn(x[k:])) for fn in d.event_functions[t]]
            events[(s, t)] = fns
    return DeterministicControl(ssub, vf, jump, events, f"({c.name}x{d.name})")


def product_control(
    controls: Sequence[DeterministicControl], ssub: "HybridSSub | None" = None
) -> DeterministicControl:
    """Control on the iterated product submersion, acting factorwise.

    ``ssub`` may be passed to reuse an already built product submersion.
    """
    if not controls:
        raise SystemsError("product_control needs at least one control")
    out = controls[0]
    last = len(controls) - 1
    for k, nxt in enumerate(controls[1:], start=1):
        built = ssub if (ssub is not None and k == last) else product_ssub(out.ssub, nxt.ssub)
        out = _product2(out, nxt, built)
    return out


def check_idempotent(
    c: DeterministicControl,
    samples: int = 20,
    tol: float = 0.0,
    seed: "int | np.random.Generator" = 0,
    points: "Sequence[TaggedPoint] | None" = None,
) -> tuple[bool, Report]:
    """``rho(rho(x)) = rho(x)`` on samples of a closed system.

    Raises:
        SystemsError: for open systems.
    """
    if not is_closed(c.ssub):
        raise SystemsError("idempotency is only defined for closed systems")
    rep = Report("idempotent")
    for p in _points(c, samples, seed, points):
        q = c.rho(p)
        qq = c.rho(q)
        if not qq.close_to(q, tol):
            rep.fail("jump map is not idempotent", point=p, once=q, twice=qq)
    return rep.passed, rep


def closed_control(
    space,
    vector_field: Callable[[TaggedPoint], np.ndarray],
    jump_map: "Callable[[TaggedPoint], TaggedPoint] | None" = None,
    event_functions: "Mapping[NodeId, Sequence[EventFn]] | None" = None,
    name: str = "",
) -> DeterministicControl:
    """Control of a closed system on ``space`` (identity submersion)."""
    from .morphisms import ssub_identity

    return DeterministicControl(
        ssub_identity(space),
        vector_field,
        jump_map or (lambda p: p),
        dict(event_functions or {}),
        name,
    )


__all__ = [
    "DeterministicControl",
    "SystemsError",
    "check_control",
    "check_idempotent",
    "check_relatedness",
    "closed_control",
    "interconnect_control",
    "product_control",
]
