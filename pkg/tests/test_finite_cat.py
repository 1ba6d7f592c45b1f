from __future__ import annotations

import itertools

import numpy as np
import pytest

from hybridnet.finite_cat import (
    FiniteError,
    FiniteMap,
    FiniteRelation,
    FiniteSet,
    FiniteSubmersion,
    check_functor_laws,
    coproduct_set,
    discrete_network_theorem,
    find_strictness_witness,
    injection,
    omega,
    random_discrete_instance,
    random_interconnection_chain,
    random_omega_instance,
    relation_compose,
    singleton_instance,
    source_map,
)


def _random_relation(rng: np.random.Generator, a: FiniteSet, b: FiniteSet) -> FiniteRelation:
    pairs = [(x, y) for x in a for y in b if rng.random() < 0.4]
    return FiniteRelation(a, b, frozenset(pairs))


def test_omega_on_the_two_index_instance():
    J = FiniteSet.of("a", "b")
    K = {"a": FiniteSet.of(1, 2, 3), "b": FiniteSet.of(1, 2)}
    om = omega(J, K, lambda j, k: FiniteSet.of("pt"))
    assert len(om.domain) == 6 and len(om.codomain) == 6
    assert om.forward.is_bijective()
    assert om.verify().passed


def test_omega_with_one_index_is_identity_like():
    J = FiniteSet.of("a")
    K = {"a": FiniteSet.of(1, 2)}
    om = omega(J, K, {("a", 1): FiniteSet.of("x", "y"), ("a", 2): FiniteSet.of("z")})
    assert om.verify().passed
    for elem in om.domain:
        (k,), (c,) = elem
        assert om.forward(elem) == ((k, c),)


@pytest.mark.parametrize("seed", range(20))
def test_omega_random_small_instances(seed):
    om = omega(*random_omega_instance(seed, max_size=30))
    assert om.verify().passed
    assert len(om.domain) == len(om.codomain)


def test_injections_tag_and_source_map_reads_the_tag():
    assert source_map(injection(2)("x")) == 2
    parts = {0: FiniteSet.of("a"), 1: FiniteSet.of("b", "c"), 2: FiniteSet.of("d")}
    union = coproduct_set(parts)
    assert len(union) == 4
    for tag, s in parts.items():
        for x in s:
            assert injection(tag)(x) in union
            assert source_map(injection(tag)(x)) == tag


def test_diagonal_is_a_unit_for_relations():
    rng = np.random.default_rng(0)
    for n, m in itertools.product(range(1, 4), repeat=2):
        a, b = FiniteSet.range(n), FiniteSet.range(m)
        r = _random_relation(rng, a, b)
        assert relation_compose(FiniteRelation.diagonal(a), r) == r
        assert relation_compose(r, FiniteRelation.diagonal(b)) == r


def test_relation_composition_is_associative():
    rng = np.random.default_rng(1)
    for _ in range(50):
        a, b, c, d = (FiniteSet.range(int(rng.integers(1, 5))) for _ in range(4))
        r, s, t = _random_relation(rng, a, b), _random_relation(rng, b, c), _random_relation(rng, c, d)
        assert relation_compose(relation_compose(r, s), t) == relation_compose(r, relation_compose(s, t))


def test_relations_must_fit_their_sets():
    with pytest.raises(FiniteError):
        FiniteRelation(FiniteSet.range(1), FiniteSet.range(1), frozenset({(0, 5)}))


def test_maps_compose_and_invert():
    s = FiniteSet.range(3)
    f = FiniteMap.from_fn(s, s, lambda x: (x + 1) % 3)
    assert f.is_bijective()
    assert FiniteRelation.graph(f.inverse()) == FiniteRelation(s, s, frozenset((b, a) for a, b in f.table.items()))


def test_submersion_needs_a_surjection():
    t, s = FiniteSet.range(2), FiniteSet.range(2)
    with pytest.raises(FiniteError):
        FiniteSubmersion(t, s, FiniteMap.from_fn(t, s, lambda x: 0))


def test_strictness_witness():
    wit = find_strictness_witness()
    assert wit is not None
    rep = wit.verify()
    assert rep.passed, rep.issues
    assert rep.metrics["composite_pairs"] < rep.metrics["direct_pairs"]


def test_singleton_network_is_related():
    inst = singleton_instance()
    assert discrete_network_theorem(inst.morphism, inst.w, inst.v).status == "related"


@pytest.mark.parametrize("seed", range(25))
def test_discrete_theorem_on_random_instances(seed):
    inst = random_discrete_instance(np.random.default_rng(seed))
    rep = discrete_network_theorem(inst.morphism, inst.w, inst.v)
    assert rep.status == "related", rep.issues


@pytest.mark.parametrize("seed", range(5))
def test_broken_hypothesis_skips_the_conclusion(seed):
    inst = random_discrete_instance(np.random.default_rng(seed), defect=True)
    rep = discrete_network_theorem(inst.morphism, inst.w, inst.v)
    assert rep.status == "hypothesis_violated"
    assert rep.conclusion == {"skipped": True}
    assert not rep.passed


@pytest.mark.parametrize("seed", range(10))
def test_functor_laws(seed):
    f, g = random_interconnection_chain(np.random.default_rng(seed))
    rep = check_functor_laws(f, g)
    assert rep.passed, rep.issues
