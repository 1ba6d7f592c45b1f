from __future__ import annotations

import numpy as np
import pytest

from hybridnet.catalog import networked_thermostats, thermostat_flip, thermostat_space
from hybridnet.morphisms import (
    HybridSSub,
    MissingInverseError,
    PhaseSpaceMorphism,
    SmoothMap,
    SSubMorphism,
    apply,
    check_iso,
    check_morphism,
    check_submersion,
    compose,
    differential,
    identity,
    invert_iso,
    is_interconnection,
    pairing,
    product_map,
    product_ssub,
    projection,
    ssub_identity,
)
from hybridnet.phase_space import BoxSpace, HybridPhaseSpace, TaggedPoint, product_space
from hybridnet.sampling import sample_points
from hybridnet.stability import neg_log_map


def _line(name: str = "line") -> HybridPhaseSpace:
    return HybridPhaseSpace.build({0: BoxSpace.reals(1)}, name=name)


def _affine_on(space: HybridPhaseSpace, rng: np.random.Generator, name: str) -> PhaseSpaceMorphism:
    d = space.dim(space.nodes[0])
    A, b = rng.normal(size=(d, d)), rng.normal(size=d)
    return PhaseSpaceMorphism.build(space, space, lambda n: n, lambda n: SmoothMap.linear(A, b), name=name)


def test_identity_applies_to_itself():
    c = thermostat_space()
    for p in sample_points(c, 5):
        assert apply(identity(c), p) == p


def test_network_z_embeds_on_the_antidiagonal():
    c = thermostat_space()
    z = pairing(identity(c), thermostat_flip(c))
    out = apply(z, TaggedPoint(0, [0.4]))
    assert out.node == (0, 1)
    np.testing.assert_array_equal(out.coords, [0.4, -0.4])


def test_neg_log_at_one():
    assert neg_log_map()(np.array([1.0]))[0] == 0.0


def test_linear_differential_is_exact():
    A = np.array([[1.0, 2.0], [3.0, -4.0]])
    J, one_sided = SmoothMap.linear(A).differential(np.array([0.3, 0.7]))
    np.testing.assert_array_equal(J, A)
    assert not one_sided


def test_finite_difference_of_neg_log():
    f = SmoothMap(lambda x: -np.log(x), 1, 1, fd_step=1e-5)
    J, _ = f.differential(np.array([2.0]))
    assert abs(J[0, 0] + 0.5) <= 1e-8


def test_chain_rule_on_random_affine_pairs():
    rng = np.random.default_rng(7)
    space = HybridPhaseSpace.build({0: BoxSpace.reals(3)}, name="r3")
    for k in range(10):
        f, g = _affine_on(space, rng, "f"), _affine_on(space, rng, "g")
        gf = compose(g, f)
        p = TaggedPoint(0, rng.normal(size=3))
        lhs = differential(gf, p)
        rhs = differential(g, apply(f, p, False)) @ differential(f, p)
        assert np.max(np.abs(lhs - rhs)) <= 1e-6


def test_composition_laws():
    rng = np.random.default_rng(11)
    space = HybridPhaseSpace.build({0: BoxSpace.reals(2)}, name="r2")
    f, g, h = (_affine_on(space, rng, n) for n in "fgh")
    for p in sample_points(space, 10, seed=2):
        assert apply(compose(identity(space), f), p, False) == apply(f, p, False)
        a = apply(compose(h, compose(g, f)), p, False)
        b = apply(compose(compose(h, g), f), p, False)
        assert a.close_to(b, 1e-12)


def test_node_maps_compose_as_tables():
    c = thermostat_space()
    flip = thermostat_flip(c)
    twice = compose(flip, flip)
    assert {n: twice.nodes(n) for n in c.nodes} == {0: 0, 1: 1}
    assert twice.nodes.edge("e10") == "e10"


def test_identity_and_phi2_pass_morphism_check():
    assert check_morphism(identity(thermostat_space())).passed
    ex = networked_thermostats()
    phi2 = ex.morphism.lm.components[2]
    assert check_morphism(phi2.f_tot).passed
    p = apply(phi2.f_tot, TaggedPoint((0, 1), [0.2, -0.7]))
    assert p.node == (1, 1)
    np.testing.assert_array_equal(p.coords, [-0.2, -0.7])


def test_map_violating_threshold_fails_with_witness():
    c = thermostat_space(guarded=True)
    half = PhaseSpaceMorphism.build(c, c, lambda j: j, lambda j: SmoothMap.linear([[0.5]]), name="half")
    rep = check_morphism(half)
    assert not rep.passed
    assert rep.witnesses


def test_submersions():
    c = thermostat_space()
    cc = product_space(c, c)
    assert check_submersion(HybridSSub(cc, c, projection(cc, 0))).passed
    assert check_submersion(ssub_identity(c)).passed
    line = _line()
    const = PhaseSpaceMorphism.build(line, line, lambda n: n, lambda n: SmoothMap.linear([[0.0]], [1.0]))
    rep = check_submersion(HybridSSub(line, line, const))
    assert not rep.passed


def test_projection_jacobian_is_a_selection():
    c = thermostat_space()
    cc = product_space(c, c)
    J = differential(projection(cc, 1), TaggedPoint((0, 1), [3.0, 4.0]))
    np.testing.assert_array_equal(J, [[0.0, 1.0]])


def test_diagonal_interconnection():
    a, b = _line("a"), thermostat_space()
    ab = product_space(a, b)
    sa = HybridSSub(ab, a, projection(ab, 0))
    sb = HybridSSub(ab, b, projection(ab, 1))
    prod = product_ssub(sa, sb)
    bound = ssub_identity(ab)
    st = PhaseSpaceMorphism(ab, prod.state, identity(ab).nodes, identity(ab).maps)
    inv = PhaseSpaceMorphism(prod.state, ab, identity(ab).nodes, identity(ab).maps)
    i = SSubMorphism(bound, prod, pairing(identity(ab), identity(ab), prod.total), st, inv)
    ok, rep = is_interconnection(i)
    assert ok, rep.issues


def test_identity_state_map_is_an_interconnection():
    c = thermostat_space()
    s = ssub_identity(c)
    ok, _ = is_interconnection(SSubMorphism(s, s, identity(c), identity(c), identity(c)))
    assert ok


def test_square_state_map_is_not_an_interconnection():
    line = _line()
    s = ssub_identity(line)
    sq = PhaseSpaceMorphism.build(line, line, lambda n: n, lambda n: SmoothMap(lambda x: x**2, 1, 1))
    root = PhaseSpaceMorphism.build(line, line, lambda n: n, lambda n: SmoothMap(lambda x: np.sqrt(np.abs(x)), 1, 1))
    ok, rep = is_interconnection(SSubMorphism(s, s, sq, sq, root))
    assert not ok
    assert rep.witnesses
    with pytest.raises(MissingInverseError):
        is_interconnection(SSubMorphism(s, s, sq, sq, None))


def test_flip_is_an_involution():
    c = thermostat_space()
    flip = thermostat_flip(c)
    assert check_iso(flip, flip).passed
    assert check_iso(identity(c), identity(c)).passed
    inv = invert_iso(flip, flip)
    for p in sample_points(c, 10):
        assert apply(inv, apply(flip, p)) == p
    assert check_morphism(inv).passed


def test_product_map_is_functorial():
    rng = np.random.default_rng(5)
    space = HybridPhaseSpace.build({0: BoxSpace.reals(2)}, name="r2")
    sq = product_space(space, space)
    f, g, f2, g2 = (_affine_on(space, rng, n) for n in ("f", "g", "f2", "g2"))
    lhs = compose(product_map(f2, g2, sq, sq), product_map(f, g, sq, sq))
    rhs = product_map(compose(f2, f), compose(g2, g), sq, sq)
    ids = product_map(identity(space), identity(space), sq, sq)
    for p in sample_points(sq, 10, seed=4):
        assert apply(lhs, p, False).close_to(apply(rhs, p, False), 1e-12)
        assert apply(ids, p, False) == p
    p = TaggedPoint((0, 0), [1.0, 2.0, 3.0, 4.0])
    q = apply(product_map(f, g, sq, sq), p, False)
    np.testing.assert_allclose(q.coords[:2], f.maps[0](np.array([1.0, 2.0])))
    np.testing.assert_allclose(q.coords[2:], g.maps[0](np.array([3.0, 4.0])))
