"""Acceptance criteria, one check per criterion.

Each check prints a single ``criterion N PASS|FAIL: ...`` line with the
measured values and the pinned tolerances.  Run with ``pytest -s`` to see the
lines, or directly with ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import json
import math
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from hybridnet.catalog import (
    ball_bounce_times,
    ball_control,
    networked_thermostats,
    random_affine_instance,
    thermostat_control,
    thermostat_decomposition,
)
from hybridnet.execution import IntegratorOptions, execute
from hybridnet.finite_cat import find_strictness_witness, run_finite_suite
from hybridnet.networks import invariance_demo, verify_main_theorem
from hybridnet.phase_space import TaggedPoint
from hybridnet.stability import (
    check_system_map,
    cubic_decay_system,
    decay_system,
    drift_system,
    empirical_stability,
    inverse_sqrt_log_map,
    neg_log_map,
)

# pinned tolerances
BOUNCE_TOL = 1e-5
ZENO_TOL = 1e-2
BALL_RUNTIME = 5.0
HYPOTHESIS_TOL = 1e-9
CONCLUSION_TOL = 1e-8
INVARIANCE_TOL = 1e-4
THEOREM_SAMPLES = 500
AFFINE_INSTANCES = 50
DEFECT_INSTANCES = 10
FINITE_INSTANCES = 100
OMEGA_MAX_SIZE = 200
ORDER_SLOPE = 3.5
SYSTEM_MAP_TOL = 1e-7
EPS_GRID = (0.05, 0.1, 0.2)
STABILITY_HORIZON = 50.0


def _line(n: int, ok: bool, detail: str) -> bool:
    print(f"criterion {n} {'PASS' if ok else 'FAIL'}: {detail}", flush=True)
    return ok


def criterion_1() -> bool:
    start = time.perf_counter()
    opts = IntegratorOptions(step=1e-3, event_refine_tol=1e-9, horizon=3.0)
    e = execute(ball_control(0.5), TaggedPoint(0, [0.0, 0.5]), opts)
    elapsed = time.perf_counter() - start
    want = ball_bounce_times(0.5, 4)
    errs = [abs(a - b) for a, b in zip(e.jump_times, want)]
    zeno_err = abs(e.zeno - 2.0) if e.zeno is not None else math.inf
    ok = (
        len(errs) == 4
        and max(errs) <= BOUNCE_TOL
        and e.termination == "zeno"
        and zeno_err <= ZENO_TOL
        and elapsed < BALL_RUNTIME
    )
    return _line(
        1,
        ok,
        f"max bounce error {max(errs):.3g} (tol {BOUNCE_TOL:g}), termination {e.termination}, "
        f"zeno error {zeno_err:.3g} (tol {ZENO_TOL:g}), runtime {elapsed:.2f}s (limit {BALL_RUNTIME:g}s)",
    )


def criterion_2() -> bool:
    rec = thermostat_decomposition().interconnected()
    ref = thermostat_control()
    worst_vf = worst_jump = 0.0
    nodes_ok = True
    for j in (0, 1):
        for x in np.linspace(-2.0, 2.0, 201):
            p, q = TaggedPoint(("T", j), [x]), TaggedPoint(j, [x])
            worst_vf = max(worst_vf, float(np.max(np.abs(rec.X(p) - ref.X(q)))))
            r, s = rec.rho(p), ref.rho(q)
            nodes_ok &= r.node == ("T", s.node)
            worst_jump = max(worst_jump, float(np.max(np.abs(r.coords - s.coords))))
    ok = worst_vf == 0.0 and worst_jump == 0.0 and nodes_ok
    return _line(2, ok, f"field residual {worst_vf:g}, jump residual {worst_jump:g}, nodes agree {nodes_ok} (exact, 402 points)")


def criterion_3() -> bool:
    ex = networked_thermostats(coupling=lambda x, y: 0.3 * (y - x))
    rep = verify_main_theorem(
        ex.morphism, ex.w, ex.v, samples=THEOREM_SAMPLES, tol=CONCLUSION_TOL, hypothesis_tol=HYPOTHESIS_TOL
    )
    hyp = max(h["max_vf_residual"] for h in rep.hypothesis.values())
    concl = rep.conclusion["max_vf_residual"]
    demo = invariance_demo(ex.morphism, ex.w, ex.v, TaggedPoint(0, [0.3]), IntegratorOptions(horizon=10.0))
    ok = (
        rep.status == "related"
        and hyp <= HYPOTHESIS_TOL
        and concl <= CONCLUSION_TOL
        and demo.sup_deviation <= INVARIANCE_TOL
        and demo.switches >= 2
    )
    return _line(
        3,
        ok,
        f"status {rep.status}, hypothesis residual {hyp:g} (tol {HYPOTHESIS_TOL:g}), "
        f"conclusion residual {concl:g} (tol {CONCLUSION_TOL:g}, {THEOREM_SAMPLES} samples), "
        f"antidiagonal deviation {demo.sup_deviation:g} (tol {INVARIANCE_TOL:g}), switches {demo.switches}",
    )


def criterion_4() -> bool:
    worst, bad = 0.0, []
    for seed in range(AFFINE_INSTANCES):
        ex = random_affine_instance(seed)
        rep = verify_main_theorem(ex.morphism, ex.w, ex.v, samples=10, tol=CONCLUSION_TOL, seed=seed)
        worst = max(worst, rep.conclusion["max_vf_residual"])
        if rep.status != "related":
            bad.append(seed)
    missed = []
    for seed in range(DEFECT_INSTANCES):
        ex = random_affine_instance(1000 + seed, defect=0.1)
        rep = verify_main_theorem(ex.morphism, ex.w, ex.v, samples=10, tol=CONCLUSION_TOL, seed=seed)
        if rep.passed or rep.status == "related":
            missed.append(seed)
    ok = not bad and worst <= CONCLUSION_TOL and not missed
    return _line(
        4,
        ok,
        f"{AFFINE_INSTANCES} instances, worst conclusion residual {worst:.3g} (tol {CONCLUSION_TOL:g}), "
        f"unrelated {bad}, {DEFECT_INSTANCES} defect instances with {len(missed)} unflagged",
    )


def criterion_5() -> bool:
    rep = run_finite_suite(FINITE_INSTANCES, seed=0, omega_max_size=OMEGA_MAX_SIZE)
    m = rep.metrics
    ok = (
        rep.passed
        and m["omega_concrete_size"] == 6
        and m["omega_failures"] == 0
        and m["theorem_counterexamples"] == 0
        and m["functor_law_failures"] == 0
    )
    return _line(
        5,
        ok,
        f"concrete omega size {m['omega_concrete_size']}, omega failures {m['omega_failures']}/{FINITE_INSTANCES}, "
        f"theorem counterexamples {m['theorem_counterexamples']}/{FINITE_INSTANCES}, "
        f"functor law failures {m['functor_law_failures']}/{FINITE_INSTANCES} (exact)",
    )


def criterion_6() -> bool:
    wit = find_strictness_witness()
    if wit is None:
        return _line(6, False, "no witness found")
    rep = wit.verify()
    m = rep.metrics
    ok = rep.passed and m["composite_pairs"] < m["direct_pairs"]
    return _line(6, ok, f"composite relation has {m['composite_pairs']} pairs, direct relation {m['direct_pairs']} (strict inclusion, exact)")


def criterion_7() -> bool:
    steps = (1e-2, 5e-3, 2.5e-3)
    want = ball_bounce_times(0.5, 4)
    errs = []
    for h in steps:
        e = execute(ball_control(0.5), TaggedPoint(0, [0.0, 0.5]), IntegratorOptions(step=h, event_refine_tol=1e-9, horizon=3.0))
        errs.append(max(abs(a - b) for a, b in zip(e.jump_times, want)))
    slope = float(np.polyfit(np.log(steps), np.log(errs), 1)[0])
    ok = slope >= ORDER_SLOPE
    return _line(
        7,
        ok,
        f"bounce-time errors {', '.join(f'{x:.3g}' for x in errs)} give log-log slope {slope:.3g} (need >= {ORDER_SLOPE:g})",
    )


def criterion_8() -> bool:
    grid = [[x] for x in np.linspace(0.2, 1.6, 201)]
    r_cubic = check_system_map(inverse_sqrt_log_map(), decay_system(), cubic_decay_system(), grid, SYSTEM_MAP_TOL)
    r_drift = check_system_map(neg_log_map(), decay_system(), drift_system(), grid, SYSTEM_MAP_TOL)
    image = float(inverse_sqrt_log_map()(np.array([1.0]))[0])
    src = empirical_stability(decay_system(), [1.0], EPS_GRID, STABILITY_HORIZON)
    tgt = empirical_stability(cubic_decay_system(), [image], EPS_GRID, STABILITY_HORIZON)
    drift = empirical_stability(drift_system(), [0.0], EPS_GRID, STABILITY_HORIZON)
    ok = (
        r_cubic.metrics["max_residual"] <= SYSTEM_MAP_TOL
        and r_drift.metrics["max_residual"] <= SYSTEM_MAP_TOL
        and image == 1.0
        and src.stable
        and tgt.stable
        and drift.stable
    )
    return _line(
        8,
        ok,
        f"map residuals {r_cubic.metrics['max_residual']:.3g}, {r_drift.metrics['max_residual']:.3g} (tol {SYSTEM_MAP_TOL:g}), "
        f"decay at 1 stable {src.stable}, cubic decay at {image:g} stable {tgt.stable}, "
        f"drift stable {drift.stable} (eps {list(EPS_GRID)}, horizon {STABILITY_HORIZON:g})",
    )


_PIPELINE = [
    ["demo", "thermostat"],
    ["demo", "bouncing-ball", "--r", "0.5"],
    ["demo", "switched-state"],
    ["demo", "switched-time"],
    ["demo", "networked-thermostats"],
    ["demo", "stability-transport"],
    ["finite", "--samples", "20"],
]


def _pipeline_outputs(root: Path) -> dict[str, bytes]:
    out: dict[str, bytes] = {}
    for k, args in enumerate(_PIPELINE):
        d = root / str(k)
        proc = subprocess.run(
            [sys.executable, "-m", "hybridnet.cli", *args, "--seed", "0", "--out", str(d)], capture_output=True
        )
        out[f"{k}/stdout"] = proc.stdout
        out[f"{k}/exit"] = str(proc.returncode).encode()
        for p in sorted(d.rglob("*")):
            if p.is_file():
                out[str(p.relative_to(root))] = p.read_bytes()
    return out


def criterion_9() -> bool:
    with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
        first, second = _pipeline_outputs(Path(a)), _pipeline_outputs(Path(b))
    differing = sorted(k for k in first.keys() | second.keys() if first.get(k) != second.get(k))
    reports = sum(1 for k in first if k.endswith(".json") or k.endswith("stdout"))
    csvs = sum(1 for k in first if k.endswith(".csv"))
    ok = not differing and csvs > 0
    return _line(9, ok, f"{reports} reports and {csvs} CSVs compared across two runs, {len(differing)} differ {differing[:3]}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{k}" for k in range(1, 10)])
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    results = [check() for check in CRITERIA]
    print(json.dumps({"passed": sum(results), "total": len(results)}))
    sys.exit(0 if all(results) else 1)
