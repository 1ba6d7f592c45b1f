from __future__ import annotations

import numpy as np
import pytest

from hybridnet.catalog import (
    ball_control,
    networked_thermostats,
    switched_state_decomposition,
    switched_time_decomposition,
    thermostat_control,
)
from hybridnet.phase_space import TaggedPoint
from hybridnet.scenario import (
    BUNDLED,
    ScenarioError,
    SimulateDecl,
    StabilityDecl,
    TheoremDecl,
    build,
    bundled_text,
    load,
    parse_scenario,
    serialize,
)


def _diagnostics(text: str, params=None):
    with pytest.raises(ScenarioError) as err:
        build(parse_scenario(text), params)
    return err.value.diagnostics


def test_thermostat_round_trip_is_byte_identical():
    text = bundled_text("thermostat")
    assert serialize(parse_scenario(text)) == text


@pytest.mark.parametrize("name", BUNDLED)
def test_parse_serialize_parse_is_stable(name):
    first = parse_scenario(bundled_text(name))
    text = serialize(first)
    second = parse_scenario(text)
    assert second == first
    assert serialize(second) == text


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_scenarios_build(name):
    model = load(bundled_text(name))
    assert model.scenario.analyses()


def test_analyses_are_found_by_kind():
    s = parse_scenario(bundled_text("stability-transport"))
    assert [d.name for d in s.analyses(StabilityDecl)] == ["at_one", "drift_at_zero"]
    assert not s.analyses(SimulateDecl)
    assert [d.name for d in parse_scenario(bundled_text("networked-thermostats")).analyses(TheoremDecl)] == ["related"]


def _agree(a, b, points, rename=lambda n: n):
    for p in points:
        q = TaggedPoint(rename(p.node), p.coords)
        np.testing.assert_array_equal(a.X(p), b.X(q))
        ra, rb = a.rho(p), b.rho(q)
        assert rename(ra.node) == rb.node
        np.testing.assert_array_equal(ra.coords, rb.coords)


def test_thermostat_matches_the_catalog():
    c = load(bundled_text("thermostat")).controls["heater"]
    pts = [TaggedPoint(j, [x]) for j in (0, 1) for x in np.linspace(-2, 2, 41)]
    _agree(c, thermostat_control(), pts)


def test_ball_matches_the_catalog():
    c = load(bundled_text("bouncing-ball")).controls["bounce"]
    pts = [TaggedPoint(0, [h, v]) for h in (0.0, 0.3, 2.0) for v in (-1.5, -0.2, 0.0, 0.7)]
    _agree(c, ball_control(0.5), pts)


@pytest.mark.parametrize(
    "name, decomposition, dim",
    [("switched-state", switched_state_decomposition, 2), ("switched-time", switched_time_decomposition, 3)],
)
def test_switched_systems_match_the_catalog(name, decomposition, dim):
    c = load(bundled_text(name)).controls["switched"]
    ref = decomposition().interconnected()
    rng = np.random.default_rng(0)
    pts = [TaggedPoint(("x", m), rng.uniform(-2, 2, dim)) for m in (1, 2) for _ in range(20)]
    _agree(c, ref, pts)


def test_networked_controls_match_the_catalog():
    model = load(bundled_text("networked-thermostats"))
    ex = networked_thermostats()
    rng = np.random.default_rng(1)
    pts = [TaggedPoint((j, k), rng.uniform(-1, 1, 2)) for j in (0, 1) for k in (0, 1) for _ in range(5)]
    _agree(model.controls["w"], ex.w["star"], pts)
    _agree(model.controls["v1"], ex.v[1], pts)
    _agree(model.controls["v2"], ex.v[2], pts)


def test_parameters_override_defaults():
    model = load(bundled_text("bouncing-ball"), {"r": 0.25})
    assert model.params["r"] == 0.25
    out = model.controls["bounce"].rho(TaggedPoint(0, [0.0, -1.0]))
    np.testing.assert_array_equal(out.coords, [0.0, 0.25])


def test_unknown_parameter_is_reported():
    (d,) = _diagnostics(bundled_text("bouncing-ball"), {"gravity": 9.8})
    assert "unknown parameter" in d.message


def test_unknown_identifier_has_a_position():
    text = bundled_text("thermostat").replace("flow (-1) ^ (1 - j)", "flow (-1) ^ (1 - q)")
    ds = _diagnostics(text)
    assert any("q" in d.message for d in ds)
    line = next(i for i, l in enumerate(text.splitlines(), 1) if "(1 - q)" in l)
    assert ds[0].line == line and ds[0].col > 1


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("scenario s\n\nspace a\n  node 0: R\n   node 1: R\n", "indent"),
        ("scenario s\n\nfrobnicate x\n", "frobnicate"),
        ("scenario s\n\nspace a\n  node 0: [1, 0]\n", ""),
        ("scenario s\n\nparam p = \n", ""),
    ],
)
def test_syntax_diagnostics(text, fragment):
    with pytest.raises(ScenarioError) as err:
        build(parse_scenario(text))
    ds = err.value.diagnostics
    assert ds and all(d.line >= 1 and d.col >= 1 for d in ds)
    assert any(fragment in d.message for d in ds)


def test_duplicate_names_are_rejected():
    text = "scenario s\n\nspace a\n  node 0: R\n\nspace a\n  node 0: R\n"
    ds = _diagnostics(text)
    assert any(d.line == 6 for d in ds)


def test_diagnostics_serialize():
    ds = _diagnostics("scenario s\n\nfrobnicate x\n")
    assert set(ds[0].to_dict()) == {"line", "col", "message"}
