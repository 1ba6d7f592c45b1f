from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from hybridnet.cli import main
from hybridnet.scenario import bundled_path, bundled_text


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, json.loads(out.out), out.err


def test_ball_demo_writes_bounce_times(tmp_path, capsys):
    code, doc, _ = _run(["demo", "bouncing-ball", "--r", "0.5", "--out", str(tmp_path)], capsys)
    assert code == 0 and doc["status"] == "pass"
    with open(tmp_path / "drop_jumps.csv", newline="") as fh:
        times = [float(row["t"]) for row in csv.DictReader(fh)]
    for got, want in zip(times, [1.0, 1.5, 1.75]):
        assert got == pytest.approx(want, abs=1e-5)
    (res,) = doc["results"]
    assert res["execution"]["termination"] == "zeno"
    assert res["execution"]["zeno_estimate"] == pytest.approx(2.0, abs=1e-2)


def test_restitution_flag_changes_the_bounces(tmp_path, capsys):
    code, doc, _ = _run(["demo", "bouncing-ball", "--r", "0.25"], capsys)
    assert code == 0
    times = doc["results"][0]["execution"]["jump_times"]
    assert times[:2] == pytest.approx([1.0, 1.25], abs=1e-5)


def test_theorem_verification_reports_the_residual_table(tmp_path, capsys):
    path = str(bundled_path("networked-thermostats"))
    code, doc, _ = _run(["verify", "theorem", path, "--out", str(tmp_path)], capsys)
    assert code == 0
    (res,) = doc["results"]
    assert res["status"] == "related"
    assert set(res["residual_table"]) == {"1", "2"}
    assert res["conclusion"]["max_vf_residual"] <= 1e-8
    with open(tmp_path / "related_residuals.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["label"] for r in rows] == ["1", "2"]


def test_defect_makes_the_theorem_check_fail(capsys):
    path = str(bundled_path("networked-thermostats"))
    code, doc, _ = _run(["verify", "theorem", path, "--param", "defect=0.1"], capsys)
    assert code == 1
    assert doc["results"][0]["status"] == "hypothesis_violated"


@pytest.mark.parametrize("kind", ["control", "morphism", "submersion", "network"])
def test_structural_checks_pass_on_the_network_scenario(kind, capsys):
    code, doc, _ = _run(["verify", kind, str(bundled_path("networked-thermostats"))], capsys)
    assert code == 0 and doc["passed"]


def test_initial_point_outside_the_box_is_an_input_error(tmp_path, capsys):
    text = bundled_text("bouncing-ball").replace("initial 0: 0, 0.5", "initial 0: -1, 0.5")
    path = tmp_path / "ball.scn"
    path.write_text(text)
    code, doc, err = _run(["simulate", str(path)], capsys)
    assert code == 2
    line = next(i for i, l in enumerate(text.splitlines(), 1) if l.strip().startswith("initial"))
    assert any(d["line"] == line for d in doc["diagnostics"])
    assert err.startswith("error:")


def test_unknown_identifier_is_an_input_error(tmp_path, capsys):
    path = tmp_path / "bad.scn"
    path.write_text(bundled_text("thermostat").replace("flow (-1)", "flow (-q)"))
    code, doc, _ = _run(["simulate", str(path)], capsys)
    assert code == 2
    assert doc["diagnostics"][0]["line"] > 1


def test_missing_file_is_an_input_error(tmp_path, capsys):
    code, _, err = _run(["simulate", str(tmp_path / "nope.scn")], capsys)
    assert code == 2 and err


def test_finite_suite_passes(capsys):
    code, doc, _ = _run(["finite", "--samples", "20"], capsys)
    assert code == 0 and doc["passed"]


def test_show_prints_the_bundled_text(capsys):
    assert main(["show", "thermostat"]) == 0
    assert capsys.readouterr().out == bundled_text("thermostat")


@pytest.mark.parametrize("name", ["thermostat", "switched-state", "switched-time"])
def test_demos_pass(name, capsys):
    code, doc, _ = _run(["demo", name], capsys)
    assert code == 0 and doc["status"] == "pass"


def test_runs_are_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        proc = subprocess.run(
            [sys.executable, "-m", "hybridnet.cli", "demo", "bouncing-ball", "--out", str(d)],
            capture_output=True,
            check=True,
        )
        files = {p.name: p.read_bytes() for p in sorted(d.iterdir())}
        outs.append((proc.stdout, files))
    assert outs[0] == outs[1]
