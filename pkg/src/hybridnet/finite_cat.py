"""Exact, table-driven versions of the categorical constructions on finite sets.

Everything here is checked exhaustively with zero tolerance, so the module
doubles as an oracle for the sampled, floating-point checks elsewhere in the
package.  Atoms are opaque hashable tokens and every map is a dictionary.

Discrete-time open systems live on a surjection ``proj: total -> state``; a
dynamics is any map ``total -> state``.  Compatibility of a dynamics with the
projection is vacuous in this setting, so every such map counts.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Hashable, Iterator, Mapping, Sequence

import numpy as np

from .report import Report, jsonable

Atom = Hashable


class FiniteError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteSet:
    elements: tuple[Atom, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        if len(set(self.elements)) != len(self.elements):
            raise FiniteError("elements of a finite set must be unique")

    @classmethod
    def of(cls, *elements: Atom) -> "FiniteSet":
        return cls(tuple(elements))

    @classmethod
    def range(cls, n: int) -> "FiniteSet":
        return cls(tuple(range(n)))

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    @cached_property
    def _members(self) -> frozenset:
        return frozenset(self.elements)

    def __contains__(self, a: object) -> bool:
        return a in self._members

    def index(self, a: Atom) -> int:
        return self.elements.index(a)


def product_set(sets: Sequence[FiniteSet]) -> FiniteSet:
    """Cartesian product as flat tuples, in lexicographic order."""
    return FiniteSet(tuple(itertools.product(*[s.elements for s in sets])))


def coproduct_set(parts: Mapping[Atom, FiniteSet]) -> FiniteSet:
    """Tagged union: element ``x`` of part ``k`` becomes ``(k, x)``."""
    return FiniteSet(tuple((k, x) for k, s in parts.items() for x in s))


def injection(tag: Atom) -> Callable[[Atom], tuple[Atom, Atom]]:
    return lambda x: (tag, x)


def projection(j: int) -> Callable[[tuple], Atom]:
    return lambda t: t[j]


def source_map(element: tuple[Atom, Atom]) -> Atom:
    """Index of the summand an element of a tagged union came from.

    This is the same mechanism as the node tag of a point in a hybrid phase
    space: ``source_map(injection(k)(x)) == k``.
    """
    return element[0]


def untag(element: tuple[Atom, Atom]) -> Atom:
    return element[1]


@dataclass(frozen=True)
class FiniteMap:
    domain: FiniteSet
    codomain: FiniteSet
    table: Mapping[Atom, Atom]

    def __post_init__(self) -> None:
        object.__setattr__(self, "table", dict(self.table))
        if set(self.table) != set(self.domain.elements):
            raise FiniteError("map table must be defined exactly on its domain")
        cod = set(self.codomain.elements)
        bad = [a for a, b in self.table.items() if b not in cod]
        if bad:
            raise FiniteError(f"map sends {bad[0]!r} outside its codomain")

    @classmethod
    def from_fn(cls, domain: FiniteSet, codomain: FiniteSet, fn: Callable[[Atom], Atom]) -> "FiniteMap":
        return cls(domain, codomain, {a: fn(a) for a in domain})

    @classmethod
    def identity(cls, s: FiniteSet) -> "FiniteMap":
        return cls(s, s, {a: a for a in s})

    def __call__(self, a: Atom) -> Atom:
        return self.table[a]

    def key(self) -> tuple[Atom, ...]:
        """Values in domain order; two maps with equal ends are equal iff keys are."""
        return tuple(self.table[a] for a in self.domain)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteMap):
            return NotImplemented
        return self.domain == other.domain and self.codomain == other.codomain and self.key() == other.key()

    def __hash__(self) -> int:
        return hash((self.domain, self.codomain, self.key()))

    def is_surjective(self) -> bool:
        return set(self.table.values()) == set(self.codomain.elements)

    def is_injective(self) -> bool:
        return len(set(self.table.values())) == len(self.table)

    def is_bijective(self) -> bool:
        return self.is_injective() and self.is_surjective()

    def inverse(self) -> "FiniteMap":
        if not self.is_bijective():
            raise FiniteError("only bijections have inverses")
        return FiniteMap(self.codomain, self.domain, {b: a for a, b in self.table.items()})

    def to_dict(self) -> dict[str, Any]:
        return {"table": [[a, b] for a, b in self.table.items()]}


def compose_maps(g: FiniteMap, f: FiniteMap) -> FiniteMap:
    """``g o f``."""
    if f.codomain != g.domain:
        raise FiniteError("maps are not composable")
    return FiniteMap(f.domain, g.codomain, {a: g(f(a)) for a in f.domain})


def all_maps(domain: FiniteSet, codomain: FiniteSet) -> Iterator[FiniteMap]:
    """Every map ``domain -> codomain`` in lexicographic order of values."""
    for values in itertools.product(codomain.elements, repeat=len(domain)):
        yield FiniteMap(domain, codomain, dict(zip(domain.elements, values)))


# Relations


@dataclass(frozen=True)
class FiniteRelation:
    domain: FiniteSet
    codomain: FiniteSet
    pairs: frozenset

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", frozenset(self.pairs))
        dom, cod = set(self.domain.elements), set(self.codomain.elements)
        for a, b in self.pairs:
            if a not in dom or b not in cod:
                raise FiniteError(f"pair {(a, b)!r} is not in domain x codomain")

    @classmethod
    def diagonal(cls, s: FiniteSet) -> "FiniteRelation":
        return cls(s, s, frozenset((a, a) for a in s))

    @classmethod
    def graph(cls, f: FiniteMap) -> "FiniteRelation":
        return cls(f.domain, f.codomain, frozenset(f.table.items()))

    def __contains__(self, pair: object) -> bool:
        return pair in self.pairs

    def __le__(self, other: "FiniteRelation") -> bool:
        return self.pairs <= other.pairs

    def __lt__(self, other: "FiniteRelation") -> bool:
        return self.pairs < other.pairs


def relation_compose(r: FiniteRelation, s: FiniteRelation) -> FiniteRelation:
    """``s o r``: pairs ``(x, z)`` with some ``y`` such that ``(x, y) in r`` and ``(y, z) in s``."""
    if r.codomain != s.domain:
        raise FiniteError("relations are not composable")
    after: dict[Atom, set] = {}
    for y, z in s.pairs:
        after.setdefault(y, set()).add(z)
    pairs = {(x, z) for x, y in r.pairs for z in after.get(y, ())}
    return FiniteRelation(r.domain, s.codomain, frozenset(pairs))


# Omega: coproduct of products versus product of coproducts


@dataclass(frozen=True)
class OmegaBijection:
    """The canonical map from a coproduct of products to a product of coproducts.

    ``domain`` holds ``(ks, cs)`` with ``ks`` a choice of summand index per
    ``j`` and ``cs`` a tuple of elements ``cs[j] in C(j, ks[j])``.  ``codomain``
    holds tuples whose ``j``-th entry is a tagged element ``(k, c)``.
    """

    index: FiniteSet
    domain: FiniteSet
    codomain: FiniteSet
    forward: FiniteMap
    backward: FiniteMap

    def verify(self) -> Report:
        rep = Report("omega")
        for a in self.domain:
            if self.backward(self.forward(a)) != a:
                rep.fail("backward o forward is not the identity", element=a)
        for b in self.codomain:
            if self.forward(self.backward(b)) != b:
                rep.fail("forward o backward is not the identity", element=b)
        rep.metrics.update(size=len(self.domain), codomain_size=len(self.codomain))
        return rep


def omega(
    index: FiniteSet,
    summands: Mapping[Atom, FiniteSet],
    components: "Mapping[tuple[Atom, Atom], FiniteSet] | Callable[[Atom, Atom], FiniteSet]",
) -> OmegaBijection:
    """Build the canonical map and its inverse as explicit tables.

    Args:
        index: the indexing set ``J``.
        summands: ``j -> K_j``.
        components: ``(j, k) -> C(j, k)``, as a mapping or a callable.

    The forward map is assembled from the universal properties: on the
    summand indexed by ``ks`` its ``j``-th component is the injection
    ``i_{ks[j]}`` after the projection ``p_j``.  The backward map reads the
    summand index of each entry with ``source_map`` and injects the untagged
    tuple into that summand.
    """
    comp = components if callable(components) else (lambda j, k: components[(j, k)])
    js = index.elements
    choices = list(itertools.product(*[summands[j].elements for j in js]))
    dom: list[tuple] = []
    for ks in choices:
        prod = product_set([comp(j, k) for j, k in zip(js, ks)])
        inj = injection(ks)
        dom.extend(inj(cs) for cs in prod)
    unions = [coproduct_set({k: comp(j, k) for k in summands[j]}) for j in js]
    cod = product_set(unions)

    fwd: dict[Atom, Atom] = {}
    for elem in dom:
        ks, cs = source_map(elem), untag(elem)
        # component j of the summand ks is i_{ks[j]} o p_j
        fwd[elem] = tuple(injection(ks[n])(projection(n)(cs)) for n in range(len(js)))
    bwd: dict[Atom, Atom] = {}
    for t in cod:
        ks = tuple(source_map(t[n]) for n in range(len(js)))
        bwd[t] = injection(ks)(tuple(untag(t[n]) for n in range(len(js))))
    D, C = FiniteSet(tuple(dom)), cod
    return OmegaBijection(index, D, C, FiniteMap(D, C, fwd), FiniteMap(C, D, bwd))


def random_omega_instance(
    seed: "int | np.random.Generator", max_size: int = 200, max_parts: int = 3
) -> tuple[FiniteSet, dict[Atom, FiniteSet], dict[tuple[Atom, Atom], FiniteSet]]:
    """Random ``(J, K, C)`` with at most ``max_size`` elements in the coproduct of products."""
    rng = np.random.default_rng(seed)
    while True:
        J = FiniteSet.range(int(rng.integers(1, max_parts + 1)))
        K = {j: FiniteSet.range(int(rng.integers(1, max_parts + 1))) for j in J}
        C = {(j, k): FiniteSet.range(int(rng.integers(0, max_parts + 1))) for j in J for k in K[j]}
        size = sum(
            int(np.prod([len(C[(j, k)]) for j, k in zip(J.elements, ks)]))
            for ks in itertools.product(*[K[j].elements for j in J])
        )
        if size <= max_size:
            return J, K, C


# Discrete-time open systems


@dataclass(frozen=True)
class FiniteSubmersion:
    total: FiniteSet
    state: FiniteSet
    proj: FiniteMap

    def __post_init__(self) -> None:
        if self.proj.domain != self.total or self.proj.codomain != self.state:
            raise FiniteError("projection must go from total to state")
        if not self.proj.is_surjective():
            raise FiniteError("projection must be surjective")

    @classmethod
    def closed(cls, s: FiniteSet) -> "FiniteSubmersion":
        return cls(s, s, FiniteMap.identity(s))

    def dynamics(self) -> Iterator[FiniteMap]:
        """Every dynamics on this submersion."""
        return all_maps(self.total, self.state)

    def count_dynamics(self) -> int:
        return len(self.state) ** len(self.total)

    def to_dict(self) -> dict[str, Any]:
        return {"total": list(self.total), "state": list(self.state), "proj": self.proj.to_dict()}


@dataclass(frozen=True)
class FiniteOpenSystem:
    ssub: FiniteSubmersion
    dynamics: FiniteMap

    def __post_init__(self) -> None:
        if self.dynamics.domain != self.ssub.total or self.dynamics.codomain != self.ssub.state:
            raise FiniteError("dynamics must go from total to state")

    @property
    def total(self) -> FiniteSet:
        return self.ssub.total

    @property
    def state(self) -> FiniteSet:
        return self.ssub.state

    @property
    def proj(self) -> FiniteMap:
        return self.ssub.proj

    def to_dict(self) -> dict[str, Any]:
        d = self.ssub.to_dict()
        d["dynamics"] = self.dynamics.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(jsonable(self.to_dict()), sort_keys=True)


@dataclass(frozen=True)
class FiniteSSubMorphism:
    domain: FiniteSubmersion
    codomain: FiniteSubmersion
    f_tot: FiniteMap
    f_st: FiniteMap

    def __post_init__(self) -> None:
        if self.f_tot.domain != self.domain.total or self.f_tot.codomain != self.codomain.total:
            raise FiniteError("total map has the wrong ends")
        if self.f_st.domain != self.domain.state or self.f_st.codomain != self.codomain.state:
            raise FiniteError("state map has the wrong ends")

    def is_interconnection(self) -> bool:
        return self.f_st.is_bijective()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteSSubMorphism):
            return NotImplemented
        return (self.domain, self.codomain, self.f_tot, self.f_st) == (
            other.domain,
            other.codomain,
            other.f_tot,
            other.f_st,
        )

    def __hash__(self) -> int:
        return hash((self.f_tot, self.f_st))


def check_square(f: FiniteSSubMorphism) -> Report:
    """``proj_b o f_tot == f_st o proj_a`` at every total element."""
    rep = Report("finite_ssub_morphism")
    for p in f.domain.total:
        lhs = f.codomain.proj(f.f_tot(p))
        rhs = f.f_st(f.domain.proj(p))
        if lhs != rhs:
            rep.fail("square does not commute", element=p, lhs=lhs, rhs=rhs)
    return rep


def identity_morphism(s: FiniteSubmersion) -> FiniteSSubMorphism:
    return FiniteSSubMorphism(s, s, FiniteMap.identity(s.total), FiniteMap.identity(s.state))


def compose_morphisms(g: FiniteSSubMorphism, f: FiniteSSubMorphism) -> FiniteSSubMorphism:
    """``g o f``."""
    return FiniteSSubMorphism(f.domain, g.codomain, compose_maps(g.f_tot, f.f_tot), compose_maps(g.f_st, f.f_st))


def related(f: FiniteSSubMorphism, u: FiniteMap, w: FiniteMap) -> Report:
    """``f_st o u == w o f_tot`` at every total element of the domain."""
    rep = Report("finite_relatedness")
    for p in f.domain.total:
        lhs, rhs = f.f_st(u(p)), w(f.f_tot(p))
        if lhs != rhs:
            rep.fail("dynamics are not related", element=p, pushed=lhs, target=rhs)
    return rep


def is_related(f: FiniteSSubMorphism, u: FiniteMap, w: FiniteMap) -> bool:
    return all(f.f_st(u(p)) == w(f.f_tot(p)) for p in f.domain.total)


def related_pairs(f: FiniteSSubMorphism) -> FiniteRelation:
    """All pairs of dynamics related by ``f``, as a relation between dynamics sets."""
    dom = FiniteSet(tuple(f.domain.dynamics()))
    cod = FiniteSet(tuple(f.codomain.dynamics()))
    pairs = frozenset((u, w) for u in dom for w in cod if is_related(f, u, w))
    return FiniteRelation(dom, cod, pairs)


def pullback(i: FiniteSSubMorphism, dynamics: FiniteMap) -> FiniteMap:
    """Dynamics on the domain of an interconnection: ``i_st^-1 o dynamics o i_tot``."""
    if not i.is_interconnection():
        raise FiniteError("pullback needs a bijective state map")
    inv = i.f_st.inverse()
    return FiniteMap(i.domain.total, i.domain.state, {p: inv(dynamics(i.f_tot(p))) for p in i.domain.total})


def pullback_map(i: FiniteSSubMorphism) -> FiniteMap:
    """Pullback along ``i`` as a map from codomain dynamics to domain dynamics."""
    dom = FiniteSet(tuple(i.codomain.dynamics()))
    cod = FiniteSet(tuple(i.domain.dynamics()))
    return FiniteMap(dom, cod, {w: pullback(i, w) for w in dom})


def check_functor_laws(f: FiniteSSubMorphism, g: FiniteSSubMorphism) -> Report:
    """Pullback preserves identities and reverses composition, checked on every dynamics.

    ``f: a -> b`` and ``g: b -> c`` must be interconnections.
    """
    rep = Report("pullback_functor")
    for s in (f.domain, f.codomain, g.codomain):
        ident = identity_morphism(s)
        for w in s.dynamics():
            if pullback(ident, w) != w:
                rep.fail("pullback along the identity changes a dynamics", dynamics=w.key())
    gf = compose_morphisms(g, f)
    checked = 0
    for w in g.codomain.dynamics():
        lhs = pullback(gf, w)
        rhs = pullback(f, pullback(g, w))
        checked += 1
        if lhs != rhs:
            rep.fail("pullback along g o f differs from pullback along f after g", dynamics=w.key())
    rep.metrics["dynamics_checked"] = checked
    return rep


# Products and networks


def product_ssub(parts: Sequence[FiniteSubmersion]) -> FiniteSubmersion:
    """Flat n-ary product; the empty product is the one-point submersion."""
    total = product_set([p.total for p in parts])
    state = product_set([p.state for p in parts])
    proj = FiniteMap(total, state, {t: tuple(p.proj(a) for p, a in zip(parts, t)) for t in total})
    return FiniteSubmersion(total, state, proj)


def product_dynamics(ssub: FiniteSubmersion, parts: Sequence[FiniteMap]) -> FiniteMap:
    return FiniteMap(ssub.total, ssub.state, {t: tuple(u(a) for u, a in zip(parts, t)) for t in ssub.total})


@dataclass(frozen=True)
class FiniteList:
    labels: tuple[Atom, ...]
    entries: Mapping[Atom, FiniteSubmersion]

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise FiniteError("labels must be unique")
        if set(self.labels) - set(self.entries):
            raise FiniteError("every label needs an entry")

    def product(self) -> FiniteSubmersion:
        return product_ssub([self.entries[x] for x in self.labels])


@dataclass(frozen=True)
class FiniteListMorphism:
    """``phi: X -> Y`` with ``components[x]: entry_Y(phi(x)) -> entry_X(x)``."""

    source: FiniteList
    target: FiniteList
    label_map: Mapping[Atom, Atom]
    components: Mapping[Atom, FiniteSSubMorphism]


def pi_morphism(lm: FiniteListMorphism) -> FiniteSSubMorphism:
    """``Pi(Y) -> Pi(X)`` whose ``x``-th projection is ``components[x] o p_phi(x)``."""
    PY, PX = lm.target.product(), lm.source.product()
    pos = {y: n for n, y in enumerate(lm.target.labels)}
    xs = lm.source.labels

    def tot(t: tuple) -> tuple:
        return tuple(lm.components[x].f_tot(t[pos[lm.label_map[x]]]) for x in xs)

    def st(s: tuple) -> tuple:
        return tuple(lm.components[x].f_st(s[pos[lm.label_map[x]]]) for x in xs)

    return FiniteSSubMorphism(PY, PX, FiniteMap.from_fn(PY.total, PX.total, tot), FiniteMap.from_fn(PY.state, PX.state, st))


@dataclass(frozen=True)
class FiniteNetwork:
    systems: FiniteList
    bound: FiniteSubmersion
    iota: FiniteSSubMorphism  # bound -> product of the list


@dataclass(frozen=True)
class FiniteNetworkMorphism:
    source: FiniteNetwork  # X network
    target: FiniteNetwork  # Y network
    lm: FiniteListMorphism
    z: FiniteSSubMorphism  # bound_Y -> bound_X


def check_finite_network_morphism(nm: FiniteNetworkMorphism) -> Report:
    """Every component square, ``z`` and the compatibility ``iota_X o z == Pi o iota_Y``."""
    rep = Report("finite_network_morphism")
    for net, tag in ((nm.source, "X"), (nm.target, "Y")):
        if net.iota.codomain != net.systems.product():
            rep.fail(f"iota_{tag} does not land in the product of its list")
        if not net.iota.is_interconnection():
            rep.fail(f"iota_{tag} is not an interconnection")
        rep.merge(check_square(net.iota), f"iota_{tag}: ")
    for x, phi in nm.lm.components.items():
        rep.merge(check_square(phi), f"component {x!r}: ")
    rep.merge(check_square(nm.z), "z: ")
    pi = pi_morphism(nm.lm)
    lhs, rhs = compose_morphisms(nm.source.iota, nm.z), compose_morphisms(pi, nm.target.iota)
    for p in nm.target.bound.total:
        if lhs.f_tot(p) != rhs.f_tot(p):
            rep.fail("total compatibility square does not commute", element=p)
    for s in nm.target.bound.state:
        if lhs.f_st(s) != rhs.f_st(s):
            rep.fail("state compatibility square does not commute", element=s)
    return rep


@dataclass
class DiscreteTheoremReport(Report):
    status: str = "unchecked"
    hypothesis: dict[str, Any] = field(default_factory=dict)
    conclusion: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d = super().to_dict()
        d.update(status=self.status, hypothesis=jsonable(self.hypothesis), conclusion=jsonable(self.conclusion))
        return d


def discrete_network_theorem(
    nm: FiniteNetworkMorphism, w: Mapping[Atom, FiniteMap], v: Mapping[Atom, FiniteMap]
) -> DiscreteTheoremReport:
    """Exact check that componentwise relatedness gives relatedness under ``z``.

    The hypothesis is checked label by label.  When it fails the conclusion
    is skipped and the report says so; otherwise the interconnected dynamics
    ``W`` and ``V`` are formed by pullback and compared at every element.
    """
    rep = DiscreteTheoremReport("discrete_theorem")
    sq = check_finite_network_morphism(nm)
    if not sq.passed:
        rep.merge(sq)
        rep.status = "invalid_network_morphism"
        return rep
    hyp_ok = True
    for x in nm.lm.source.labels:
        y = nm.lm.label_map[x]
        r = related(nm.lm.components[x], w[y], v[x])
        rep.hypothesis[str(x)] = {"passed": r.passed, "mismatches": len(r.issues)}
        if not r.passed:
            hyp_ok = False
            rep.fail(f"hypothesis violated for label {x!r}", **(r.witnesses[0] if r.witnesses else {}))
    if not hyp_ok:
        rep.status = "hypothesis_violated"
        rep.conclusion = {"skipped": True}
        return rep
    Y, X = nm.lm.target, nm.lm.source
    wp = product_dynamics(Y.product(), [w[y] for y in Y.labels])
    vp = product_dynamics(X.product(), [v[x] for x in X.labels])
    W = pullback(nm.target.iota, wp)
    V = pullback(nm.source.iota, vp)
    concl = related(nm.z, W, V)
    rep.conclusion = {"passed": concl.passed, "mismatches": len(concl.issues), "elements": len(nm.target.bound.total)}
    if concl.passed:
        rep.status = "related"
    else:
        rep.status = "conclusion_violated"
        rep.merge(concl)
    return rep


def _random_map(rng: np.random.Generator, domain: FiniteSet, codomain: FiniteSet) -> FiniteMap:
    vals = rng.integers(0, len(codomain), size=len(domain))
    return FiniteMap(domain, codomain, {a: codomain.elements[int(k)] for a, k in zip(domain, vals)})


def _random_surjection(rng: np.random.Generator, domain: FiniteSet, codomain: FiniteSet) -> FiniteMap:
    n, m = len(domain), len(codomain)
    idx = np.concatenate([np.arange(m), rng.integers(0, m, size=n - m)])
    rng.shuffle(idx)
    return FiniteMap(domain, codomain, {a: codomain.elements[int(k)] for a, k in zip(domain, idx)})


def _random_fibre_map(
    rng: np.random.Generator, src: FiniteSubmersion, dst: FiniteSubmersion, f_st: FiniteMap
) -> FiniteMap:
    """Random total map lying over ``f_st``."""
    fibres: dict[Atom, list] = {}
    for t in dst.total:
        fibres.setdefault(dst.proj(t), []).append(t)
    table = {}
    for p in src.total:
        options = fibres[f_st(src.proj(p))]
        table[p] = options[int(rng.integers(0, len(options)))]
    return FiniteMap(src.total, dst.total, table)


def _open_submersion(state: FiniteSet, inputs: FiniteSet) -> FiniteSubmersion:
    total = product_set([state, inputs])
    return FiniteSubmersion(total, state, FiniteMap.from_fn(total, state, lambda t: t[0]))


@dataclass(frozen=True)
class DiscreteInstance:
    morphism: FiniteNetworkMorphism
    w: dict[Atom, FiniteMap]
    v: dict[Atom, FiniteMap]


def random_discrete_instance(
    seed: "int | np.random.Generator", defect: bool = False, max_size: int = 3, n_y: int = 2
) -> DiscreteInstance:
    """Random network morphism with componentwise related dynamics.

    Component total maps are injective, so the X-side dynamics is forced on
    their image and free elsewhere; this makes the hypothesis hold by
    construction.  With ``defect=True`` one forced value is changed.
    """
    rng = np.random.default_rng(seed)
    size = lambda: int(rng.integers(2, max_size + 1))  # noqa: E731
    ylabels = tuple(f"y{k}" for k in range(n_y))
    yentries = {y: _open_submersion(FiniteSet.range(size()), FiniteSet.range(int(rng.integers(1, 3)))) for y in ylabels}
    Y = FiniteList(ylabels, yentries)
    w = {y: _random_map(rng, s.total, s.state) for y, s in yentries.items()}

    xlabels = tuple(f"x{k}" for k in range(int(rng.integers(1, n_y + 2))))
    label_map = {x: ylabels[int(rng.integers(0, n_y))] for x in xlabels}
    xentries, comps, v = {}, {}, {}
    for x in xlabels:
        src = yentries[label_map[x]]
        # a defect needs a second state to switch to
        low = 2 if defect and x == xlabels[0] else 1
        st = FiniteSet.range(int(rng.integers(low, len(src.state) + 1)))
        f_st = _random_surjection(rng, src.state, st)
        # the input coordinate remembers the whole source point, so f_tot is injective
        order = list(src.total)
        perm = rng.permutation(len(order))
        inputs = FiniteSet(tuple(int(k) for k in range(len(order))))
        ent = _open_submersion(st, inputs)
        tag = {p: int(perm[n]) for n, p in enumerate(order)}
        f_tot = FiniteMap(src.total, ent.total, {p: (f_st(src.proj(p)), tag[p]) for p in src.total})
        xentries[x], comps[x] = ent, FiniteSSubMorphism(src, ent, f_tot, f_st)
        table = dict(_random_map(rng, ent.total, ent.state).table)
        for p in src.total:
            table[f_tot(p)] = f_st(w[label_map[x]](p))
        v[x] = FiniteMap(ent.total, ent.state, table)
    X = FiniteList(xlabels, xentries)
    lm = FiniteListMorphism(X, Y, label_map, comps)

    PY, PX = Y.product(), X.product()
    bY_state = FiniteSet(tuple(("b", s) for s in PY.state))
    env = FiniteSet.range(int(rng.integers(1, 3)))
    bY = _open_submersion(bY_state, env)
    iY_st = FiniteMap.from_fn(bY_state, PY.state, lambda b: b[1])
    iY = FiniteSSubMorphism(bY, PY, _random_fibre_map(rng, bY, PY, iY_st), iY_st)

    pi = pi_morphism(lm)
    bX_total = FiniteSet(tuple(("b", t) for t in PX.total))
    bX_state = FiniteSet(tuple(("b", s) for s in PX.state))
    bX = FiniteSubmersion(bX_total, bX_state, FiniteMap.from_fn(bX_total, bX_state, lambda b: ("b", PX.proj(b[1]))))
    iX = FiniteSSubMorphism(
        bX, PX, FiniteMap.from_fn(bX_total, PX.total, lambda b: b[1]), FiniteMap.from_fn(bX_state, PX.state, lambda b: b[1])
    )
    z = FiniteSSubMorphism(
        bY,
        bX,
        FiniteMap.from_fn(bY.total, bX_total, lambda q: ("b", pi.f_tot(iY.f_tot(q)))),
        FiniteMap.from_fn(bY_state, bX_state, lambda b: ("b", pi.f_st(iY_st(b)))),
    )
    nm = FiniteNetworkMorphism(FiniteNetwork(X, bX, iX), FiniteNetwork(Y, bY, iY), lm, z)

    if defect:
        x = xlabels[0]
        ent, phi = xentries[x], comps[x]
        p = phi.domain.total.elements[0]
        table = dict(v[x].table)
        forced = table[phi.f_tot(p)]
        table[phi.f_tot(p)] = next(s for s in ent.state if s != forced)
        v = dict(v)
        v[x] = FiniteMap(ent.total, ent.state, table)
    return DiscreteInstance(nm, w, v)


def singleton_instance() -> DiscreteInstance:
    """One label on each side, every set a single point, every map the identity."""
    pt = FiniteSubmersion.closed(FiniteSet.of("*"))
    L = FiniteList(("a",), {"a": pt})
    ident = identity_morphism(pt)
    lm = FiniteListMorphism(L, L, {"a": "a"}, {"a": ident})
    P = L.product()
    bound = pt
    iota = FiniteSSubMorphism(
        bound, P, FiniteMap.from_fn(bound.total, P.total, lambda a: (a,)), FiniteMap.from_fn(bound.state, P.state, lambda a: (a,))
    )
    net = FiniteNetwork(L, bound, iota)
    dyn = FiniteMap.identity(pt.total)
    return DiscreteInstance(FiniteNetworkMorphism(net, net, lm, ident), {"a": dyn}, {"a": dyn})


# Lax composition of the related-pairs relation


@dataclass(frozen=True)
class StrictnessWitness:
    """Closed systems ``a --f--> b --g--> c`` and dynamics ``(u, w)`` related by ``g o f``
    for which no dynamics on ``b`` is related to ``u`` by ``f`` and to ``w`` by ``g``."""

    f: FiniteSSubMorphism
    g: FiniteSSubMorphism
    u: FiniteMap
    w: FiniteMap

    def verify(self) -> Report:
        rep = Report("lax_strictness")
        gf = compose_morphisms(self.g, self.f)
        if not is_related(gf, self.u, self.w):
            rep.fail("witness pair is not related by g o f")
        middles = [v for v in self.f.codomain.dynamics() if is_related(self.f, self.u, v) and is_related(self.g, v, self.w)]
        if middles:
            rep.fail("an interpolating dynamics exists", middle=middles[0].key())
        composite = relation_compose(related_pairs(self.f), related_pairs(self.g))
        direct = related_pairs(gf)
        if not composite <= direct:
            rep.fail("composite of related pairs is not contained in the related pairs of g o f")
        if not composite < direct:
            rep.fail("inclusion is not strict")
        rep.metrics.update(
            composite_pairs=len(composite.pairs),
            direct_pairs=len(direct.pairs),
            middle_candidates=self.f.codomain.count_dynamics(),
        )
        return rep

    def to_dict(self) -> dict[str, Any]:
        return {
            "sizes": [len(self.f.domain.total), len(self.f.codomain.total), len(self.g.codomain.total)],
            "f": self.f.f_tot.to_dict(),
            "g": self.g.f_tot.to_dict(),
            "u": self.u.to_dict(),
            "w": self.w.to_dict(),
        }


def _closed_map(a: FiniteSubmersion, b: FiniteSubmersion, m: FiniteMap) -> FiniteSSubMorphism:
    return FiniteSSubMorphism(a, b, m, m)


def find_strictness_witness(max_size: int = 3) -> "StrictnessWitness | None":
    """Exhaustive search over closed systems of size at most ``max_size``.

    Sizes are tried in increasing order of total size and maps in
    lexicographic order, so the first witness found is smallest and the
    search is deterministic.
    """
    sizes = sorted(itertools.product(range(1, max_size + 1), repeat=3), key=lambda s: (sum(s), s))
    for na, nb, nc in sizes:
        A, B, C = (FiniteSubmersion.closed(FiniteSet.range(n)) for n in (na, nb, nc))
        for fm in all_maps(A.total, B.total):
            f = _closed_map(A, B, fm)
            for gm in all_maps(B.total, C.total):
                g = _closed_map(B, C, gm)
                gf = compose_morphisms(g, f)
                for u in A.dynamics():
                    for w in C.dynamics():
                        if not is_related(gf, u, w):
                            continue
                        if any(is_related(f, u, v) and is_related(g, v, w) for v in B.dynamics()):
                            continue
                        return StrictnessWitness(f, g, u, w)
    return None


def random_interconnection_chain(
    seed: "int | np.random.Generator", max_size: int = 3
) -> tuple[FiniteSSubMorphism, FiniteSSubMorphism]:
    """Composable interconnections ``a -> b -> c`` with random total maps."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_size + 1))
    states = [FiniteSet(tuple((tag, k) for k in range(n))) for tag in "abc"]
    subs = [_open_submersion(s, FiniteSet.range(int(rng.integers(1, 3)))) for s in states]
    out = []
    for src, dst in zip(subs, subs[1:]):
        perm = rng.permutation(n)
        f_st = FiniteMap(src.state, dst.state, {a: dst.state.elements[int(perm[k])] for k, a in enumerate(src.state)})
        out.append(FiniteSSubMorphism(src, dst, _random_fibre_map(rng, src, dst, f_st), f_st))
    return out[0], out[1]


def run_finite_suite(instances: int = 100, seed: int = 0, omega_max_size: int = 200) -> Report:
    """Exhaustive checks for every construction in this module, as one report."""
    rep = Report("finite_suite")
    J = FiniteSet.of("a", "b")
    K = {"a": FiniteSet.of(1, 2, 3), "b": FiniteSet.of(1, 2)}
    om = omega(J, K, lambda j, k: FiniteSet.of("pt"))
    rep.merge(om.verify(), "omega (concrete): ")
    rep.metrics["omega_concrete_size"] = len(om.domain)
    root = np.random.SeedSequence(seed)
    streams = root.spawn(4)
    om_fail = 0
    for s in streams[0].spawn(instances):
        r = omega(*random_omega_instance(np.random.default_rng(s), omega_max_size)).verify()
        om_fail += not r.passed
        rep.merge(r, "omega (random): ")
    thm_fail = 0
    for s in streams[1].spawn(instances):
        inst = random_discrete_instance(np.random.default_rng(s))
        r = discrete_network_theorem(inst.morphism, inst.w, inst.v)
        thm_fail += r.status != "related"
        if r.status != "related":
            rep.fail(f"discrete theorem instance ended with status {r.status}")
    law_fail = 0
    for s in streams[2].spawn(instances):
        f, g = random_interconnection_chain(np.random.default_rng(s))
        r = check_functor_laws(f, g)
        law_fail += not r.passed
        rep.merge(r, "functor laws: ")
    wit = find_strictness_witness()
    if wit is None:
        rep.fail("no lax strictness witness found")
    else:
        rep.merge(wit.verify(), "strictness witness: ")
        rep.metrics["strictness_witness"] = wit.to_dict()
    rep.metrics.update(
        instances=instances,
        omega_failures=om_fail,
        theorem_counterexamples=thm_fail,
        functor_law_failures=law_fail,
    )
    return rep


__all__ = [
    "DiscreteInstance",
    "DiscreteTheoremReport",
    "FiniteError",
    "FiniteList",
    "FiniteListMorphism",
    "FiniteMap",
    "FiniteNetwork",
    "FiniteNetworkMorphism",
    "FiniteOpenSystem",
    "FiniteRelation",
    "FiniteSSubMorphism",
    "FiniteSet",
    "FiniteSubmersion",
    "OmegaBijection",
    "StrictnessWitness",
    "all_maps",
    "check_finite_network_morphism",
    "check_functor_laws",
    "check_square",
    "compose_maps",
    "compose_morphisms",
    "coproduct_set",
    "discrete_network_theorem",
    "find_strictness_witness",
    "identity_morphism",
    "injection",
    "is_related",
    "omega",
    "pi_morphism",
    "product_dynamics",
    "product_set",
    "product_ssub",
    "projection",
    "pullback",
    "pullback_map",
    "random_discrete_instance",
    "random_interconnection_chain",
    "random_omega_instance",
    "related",
    "related_pairs",
    "relation_compose",
    "run_finite_suite",
    "singleton_instance",
    "source_map",
    "untag",
]
