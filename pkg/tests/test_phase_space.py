from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridnet.catalog import ball_space, thermostat_space
from hybridnet.execution import TimePartition, universal_system
from hybridnet.morphisms import SmoothMap, PhaseSpaceMorphism, apply, product_map
from hybridnet.phase_space import (
    BoxSpace,
    HybridPhaseSpace,
    Interval,
    JumpRelation,
    PhaseSpaceError,
    TaggedPoint,
    contains,
    join_underlying,
    lambda_lookup,
    product_space,
    split_underlying,
    terminal,
    validate,
)
from hybridnet.sampling import sample_points


def test_thermostat_space_is_valid():
    c = thermostat_space()
    rep = validate(c)
    assert rep.passed, rep.issues
    assert set(c.nodes) == {0, 1}
    assert len(c.edges) == 4
    assert {e.id for e in c.edges} == {("id", 0), ("id", 1), "e10", "e01"}


def test_ball_space_is_valid():
    b = ball_space()
    assert validate(b).passed
    assert b.nodes == (0,)
    assert len(b.edges) == 2


def test_full_unit_relation_is_rejected():
    good = HybridPhaseSpace.build({0: BoxSpace.reals(1)}, name="one")
    bad = HybridPhaseSpace(good.graph, good.space, {("id", 0): JumpRelation.anything()}, "bad")
    rep = validate(bad)
    assert not rep.passed
    assert any("not diagonal" in i for i in rep.issues)


def test_duplicate_edge_ids_raise():
    rel = JumpRelation.diagonal()
    with pytest.raises(PhaseSpaceError):
        HybridPhaseSpace.build({0: BoxSpace.reals(1)}, [("e", 0, 0, rel), ("e", 0, 0, rel)])


@pytest.mark.parametrize(
    "coords, inside",
    [((0.0, -1.0), True), ((-0.1, 0.0), False), ((3.0, 2.0), True)],
)
def test_ball_containment(coords, inside):
    assert contains(ball_space(), TaggedPoint(0, np.array(coords))) is inside


def test_universal_time_space_contains_its_times():
    u = universal_system(TimePartition((0.0, 1.0, 2.0))).ssub.total
    assert contains(u, TaggedPoint(0, np.array([1.0])))
    assert not contains(u, TaggedPoint(0, np.array([1.5])))
    assert u.box(0).intervals[0].lo == 0.0 and u.box(1).intervals[0].hi == 2.0


def test_interval_endpoints():
    iv = Interval(0.0, 1.0, True, False)
    assert iv.contains(0.0) and not iv.contains(1.0)
    assert iv.contains(1.0, tol=1e-12)
    assert not Interval.greater_than(0.0).contains(0.0)
    with pytest.raises(PhaseSpaceError):
        Interval(1.0, 0.0)


def test_jump_lookup_on_thermostat_and_ball():
    c = thermostat_space()
    x, y = TaggedPoint(0, [1.5]), TaggedPoint(1, [1.5])
    assert lambda_lookup(c, x, y) == "e10"
    assert lambda_lookup(c, y, y) == ("id", 1)
    b = ball_space()
    assert lambda_lookup(b, TaggedPoint(0, [0.0, -1.0]), TaggedPoint(0, [0.0, 0.5])) == "e"
    assert lambda_lookup(b, TaggedPoint(0, [1.0, -1.0]), TaggedPoint(0, [1.0, 0.5])) is None


def test_guarded_thermostat_needs_threshold():
    c = thermostat_space(guarded=True)
    assert lambda_lookup(c, TaggedPoint(0, [1.5]), TaggedPoint(1, [1.5])) == "e10"
    assert lambda_lookup(c, TaggedPoint(0, [0.5]), TaggedPoint(1, [0.5])) is None


def test_product_counts_and_corners():
    c = thermostat_space()
    cc = product_space(c, c)
    assert len(cc.nodes) == 4
    assert len(cc.edges) == 16
    assert validate(cc).passed
    bb = product_space(ball_space(), ball_space())
    box = bb.box((0, 0))
    assert box.dim == 4
    assert box.intervals[0].lo == 0.0 and box.intervals[2].lo == 0.0
    assert contains(bb, TaggedPoint((0, 0), [0.0, 1.0, 0.0, -1.0]))


def test_product_with_terminal_is_structurally_the_input():
    c = thermostat_space()
    ct = product_space(c, terminal())
    assert [n for n, _ in ct.nodes] == list(c.nodes)
    assert len(ct.edges) == len(c.edges)
    for n in c.nodes:
        assert ct.box((n, "*")) == c.box(n)


def test_terminal_space():
    t = terminal()
    assert len(t.nodes) == 1 and len(t.edges) == 1
    tt = product_space(t, t)
    assert len(tt.nodes) == 1 and len(tt.edges) == 1
    assert contains(t, TaggedPoint("*", np.zeros(0)))


def test_split_retags_structurally():
    c = thermostat_space()
    pa, pb = split_underlying(c, c, TaggedPoint((0, 1), [2.0, 3.0]))
    assert pa == TaggedPoint(0, [2.0]) and pb == TaggedPoint(1, [3.0])


def test_split_join_round_trip_on_samples():
    c = thermostat_space()
    cc = product_space(c, c)
    for p in sample_points(cc, 250, seed=3):
        assert join_underlying(c, c, *split_underlying(c, c, p)) == p


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from([(0, 0), (0, 1), (1, 0), (1, 1)]),
    st.floats(-1e6, 1e6),
    st.floats(-1e6, 1e6),
)
def test_split_join_round_trip_property(node, a, b):
    c = thermostat_space()
    p = TaggedPoint(node, [a, b])
    assert join_underlying(c, c, *split_underlying(c, c, p)) == p


def test_split_is_natural():
    c = thermostat_space()
    cc = product_space(c, c)
    f = PhaseSpaceMorphism.build(c, c, lambda j: j, lambda j: SmoothMap.linear([[2.0]]), name="double")
    g = PhaseSpaceMorphism.build(c, c, lambda j: j, lambda j: SmoothMap.linear([[1.0]], [1.0]), name="shift")
    fg = product_map(f, g, cc, cc)
    for p in sample_points(cc, 20, seed=1):
        lhs = split_underlying(c, c, apply(fg, p, check=False))
        pa, pb = split_underlying(c, c, p)
        assert lhs == (apply(f, pa, check=False), apply(g, pb, check=False))
