from __future__ import annotations

import numpy as np

from hybridnet.catalog import (
    networked_thermostats,
    random_affine_instance,
    thermostat_control,
    thermostat_flip,
    thermostat_space,
)
from hybridnet.execution import IntegratorOptions
from hybridnet.morphisms import (
    PhaseSpaceMorphism,
    SSubMorphism,
    apply,
    compose,
    identity,
    pairing,
    product_ssub,
    ssub_identity,
)
from hybridnet.networks import (
    ListMorphism,
    Network,
    NetworkMorphism,
    SystemList,
    check_network,
    check_network_morphism,
    invariance_demo,
    nary_projection,
    pi_morphism,
    pi_product,
    verify_main_theorem,
)
from hybridnet.phase_space import TaggedPoint, product_space
from hybridnet.sampling import sample_points


def _trivial():
    c = thermostat_control()
    s = c.ssub
    ident = SSubMorphism(s, s, identity(s.total), identity(s.state), identity(s.state), "id")
    systems = SystemList(("a",), {"a": s})
    net = Network(systems, s, ident, "N")
    lm = ListMorphism(systems, systems, {"a": "a"}, {"a": ident})
    return NetworkMorphism(net, net, lm, ident), c


def test_pi_product_shapes():
    ex = networked_thermostats()
    entry = ex.morphism.target.systems["star"]
    assert pi_product(SystemList(("s",), {"s": entry})) is entry
    P = pi_product(ex.morphism.source.systems)
    c = thermostat_space()
    assert len(P.total.nodes) == 16 and P.total.dim(((0, 0), (0, 0))) == 4
    assert len(P.state.nodes) == 4 and P.state.dim((0, 0)) == 2
    assert product_ssub(entry, entry).total.nodes == P.total.nodes
    empty = pi_product(SystemList((), {}))
    assert len(empty.total.nodes) == 1 and empty.total.dim(empty.total.nodes[0]) == 0
    assert c.nodes == entry.state.nodes


def test_pi_morphism_formula():
    ex = networked_thermostats()
    pi = pi_morphism(ex.morphism.lm)
    q = apply(pi.f_tot, TaggedPoint((0, 1), [0.3, -0.8]), check=False)
    # (x, j, x', j') -> (x, j, -x', 1 - j', -x, 1 - j, x', j')
    assert q.node == ((0, 0), (1, 1))
    np.testing.assert_array_equal(q.coords, [0.3, 0.8, -0.3, -0.8])


def test_pi_morphism_projections():
    ex = networked_thermostats()
    lm = ex.morphism.lm
    pi = pi_morphism(lm)
    for k, x in enumerate(lm.source.labels):
        lhs = compose(nary_projection(pi.f_tot.codomain, 2, k), pi.f_tot)
        for p in sample_points(pi.f_tot.domain, 10, seed=k):
            assert apply(lhs, p, False) == apply(lm.components[x].f_tot, p, False)


def test_identity_pi_morphism_is_identity():
    nm, _ = _trivial()
    pi = pi_morphism(nm.lm)
    for p in sample_points(pi.f_tot.domain, 10):
        assert apply(pi.f_tot, p, False) == p


def test_network_and_morphism_checks():
    ex = networked_thermostats()
    assert check_network(ex.morphism.source).passed
    assert check_network(ex.morphism.target).passed
    assert check_network_morphism(ex.morphism).passed
    nm, _ = _trivial()
    assert check_network_morphism(nm).passed


def test_wrong_z_fails_with_witness():
    ex = networked_thermostats()
    nm = ex.morphism
    c = thermostat_space()
    cc = nm.source.bound.total
    # (x, j) -> (x, j, x, 1 - j): the sign of the mirrored coordinate is lost
    flip = thermostat_flip(c)
    flip_node = PhaseSpaceMorphism(c, c, flip.nodes, identity(c).maps, "node flip only")
    zbad = pairing(identity(c), flip_node, cc)
    bad = NetworkMorphism(nm.source, nm.target, nm.lm, SSubMorphism(nm.z.domain, nm.z.codomain, zbad, zbad))
    rep = check_network_morphism(bad)
    assert not rep.passed and rep.witnesses


def test_networked_thermostat_theorem():
    ex = networked_thermostats()
    rep = verify_main_theorem(ex.morphism, ex.w, ex.v, samples=50, tol=1e-8, hypothesis_tol=1e-9)
    assert rep.status == "related"
    assert all(h["max_vf_residual"] <= 1e-9 for h in rep.hypothesis.values())
    assert rep.conclusion["max_vf_residual"] <= 1e-8


def test_trivial_network_theorem():
    nm, c = _trivial()
    rep = verify_main_theorem(nm, {"a": c}, {"a": c})
    assert rep.passed
    assert rep.conclusion["max_vf_residual"] == 0.0


def test_random_affine_instances():
    for seed in range(5):
        ex = random_affine_instance(seed)
        rep = verify_main_theorem(ex.morphism, ex.w, ex.v, samples=10, tol=1e-8)
        assert rep.status == "related", (seed, rep.issues[:3])
    ex = random_affine_instance(0, defect=0.1)
    assert verify_main_theorem(ex.morphism, ex.w, ex.v, samples=10).status == "hypothesis_violated"


def test_invariance_of_the_antidiagonal():
    ex = networked_thermostats()
    demo = invariance_demo(ex.morphism, ex.w, ex.v, TaggedPoint(0, [0.3]), IntegratorOptions(horizon=10.0))
    assert demo.sup_deviation <= 1e-4
    assert demo.switches >= 2
    assert demo.compared > 0


def test_identity_network_has_no_deviation():
    nm, c = _trivial()
    demo = invariance_demo(nm, {"a": c}, {"a": c}, TaggedPoint(1, [0.0]), IntegratorOptions(horizon=5.0))
    assert demo.sup_deviation == 0.0


def test_defect_breaks_invariance():
    ex = networked_thermostats(defect=0.5)
    demo = invariance_demo(ex.morphism, ex.w, ex.v, TaggedPoint(0, [0.3]), IntegratorOptions(horizon=10.0))
    assert demo.sup_deviation > 1e-2


def test_projection_entry_shape():
    ex = networked_thermostats()
    entry = ex.morphism.target.systems["star"]
    c = thermostat_space()
    assert entry.total.nodes == product_space(c, c).nodes
    assert ssub_identity(c).state.nodes == c.nodes
