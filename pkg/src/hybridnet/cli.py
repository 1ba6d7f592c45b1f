"""Command line entry point.

Every command prints one JSON document on stdout (sorted keys, no timings)
and exits with 0 when every check passed, 1 when a verification failed and
2 on input errors, whose diagnostics carry line and column positions.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .execution import ExecutionError, IntegratorOptions, execute, verify_execution
from .expr import ExprError
from .morphisms import check_morphism, check_ssub_morphism, check_submersion
from .networks import NetworkError, TheoremError, check_network, check_network_morphism, invariance_demo, verify_main_theorem
from .phase_space import PhaseSpaceError, TaggedPoint
from .report import jsonable
from .scenario import (
    BUNDLED,
    Diagnostic,
    Model,
    ScenarioError,
    SimulateDecl,
    StabilityDecl,
    TheoremDecl,
    build,
    bundled_text,
    parse_scenario,
)
from .stability import ContinuousSystem, SearchOptions, StabilityError, empirical_stability, stability_transport_demo
from .systems import SystemsError, check_control

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
VERIFY_KINDS = ("control", "morphism", "submersion", "network", "theorem")
INVARIANCE_TOL = 1e-4


class InputError(Exception):
    def __init__(self, diagnostics: Sequence[Diagnostic]) -> None:
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = list(diagnostics)


def _input_error(message: str, line: int = 0, col: int = 0) -> InputError:
    return InputError([Diagnostic(line, col, message)])


# --------------------------------------------------------------------------- arguments


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, help="verification tolerance")
    p.add_argument("--samples", type=int, help="sample count (instances for 'finite')")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--step", type=float, help="integrator step")
    p.add_argument("--horizon", type=float, help="time horizon")
    p.add_argument("--max-jumps", type=int, help="jump budget of an execution")
    p.add_argument("--min-dwell", type=float, help="dwell time below which jumps count as Zeno")
    p.add_argument("--out", type=Path, help="directory for report.json and CSV files")
    p.add_argument("--name", help="only the declaration or analysis with this name")
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE", help="override a scenario parameter")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridnet", description="Simulate and verify compositional hybrid systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="execute the simulate blocks of a scenario and export CSV")
    p.add_argument("file", type=Path)
    _common(p)

    p = sub.add_parser("verify", help="check declarations of one kind, or run theorem blocks")
    p.add_argument("kind", choices=VERIFY_KINDS)
    p.add_argument("file", type=Path)
    _common(p)

    p = sub.add_parser("stability", help="delta-epsilon tables for the stability blocks of a scenario")
    p.add_argument("file", type=Path)
    _common(p)

    p = sub.add_parser("finite", help="exhaustive suite of the finite-set backend")
    _common(p)

    p = sub.add_parser("demo", help="run every analysis of a bundled scenario")
    p.add_argument("demo", choices=BUNDLED)
    p.add_argument("--r", type=float, help="restitution coefficient (bouncing-ball)")
    _common(p)

    p = sub.add_parser("show", help="print a bundled scenario")
    p.add_argument("demo", choices=BUNDLED)
    return parser


def _params(args: argparse.Namespace) -> dict[str, float]:
    out: dict[str, float] = {}
    for item in args.param:
        key, sep, value = item.partition("=")
        try:
            if not sep or not key.strip():
                raise ValueError
            out[key.strip()] = float(value)
        except ValueError:
            raise _input_error(f"--param expects NAME=NUMBER, got {item!r}") from None
    if getattr(args, "r", None) is not None:
        out["r"] = args.r
    return out


def _load(text: str, params: dict[str, float]) -> Model:
    try:
        return build(parse_scenario(text), params)
    except ScenarioError as exc:
        raise InputError(exc.diagnostics) from None


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise _input_error(f"cannot read {path}: {exc}") from None


def _options(decl: Any, model: Model) -> dict[str, float]:
    return {k: model.number(v) for k, v in getattr(decl, "options", ())}


def _pick(flag: Any, opts: dict[str, float], key: str, default: Any) -> Any:
    if flag is not None:
        return flag
    return opts.get(key, default)


def _integrator(args: argparse.Namespace, opts: dict[str, float]) -> IntegratorOptions:
    d = IntegratorOptions()
    try:
        return IntegratorOptions(
            step=float(_pick(args.step, opts, "step", d.step)),
            event_refine_tol=float(opts.get("event_tol", d.event_refine_tol)),
            max_jumps=int(_pick(args.max_jumps, opts, "max_jumps", d.max_jumps)),
            min_dwell=float(_pick(args.min_dwell, opts, "min_dwell", d.min_dwell)),
            horizon=float(_pick(args.horizon, opts, "horizon", d.horizon)),
        )
    except ExecutionError as exc:
        raise _input_error(str(exc)) from None


def _selected(decls: list[Any], name: "str | None") -> list[Any]:
    if name is None:
        return decls
    hit = [d for d in decls if d.name == name]
    if not hit:
        raise _input_error(f"no declaration named {name!r}")
    return hit


# --------------------------------------------------------------------------- analyses


def _initial_point(model: Model, node_expr: Any, coords: Sequence[Any]) -> TaggedPoint:
    return TaggedPoint(model.literal(node_expr), np.array([model.number(e) for e in coords], dtype=float))


def run_simulate(model: Model, d: SimulateDecl, args: argparse.Namespace, files: dict[str, str]) -> dict[str, Any]:
    opts = _options(d, model)
    integ = _integrator(args, opts)
    control = model.controls[d.control]
    x0 = _initial_point(model, d.node, d.coords)
    try:
        e = execute(control, x0, integ)
    except ExecutionError as exc:
        raise _input_error(str(exc), d.node.line, d.node.col) from None
    rep = verify_execution(e, control, tol=args.tol if args.tol is not None else 1e-4)
    files[f"{d.name}_arcs.csv"] = e.arcs_csv()
    files[f"{d.name}_jumps.csv"] = e.jumps_csv()
    return {
        "analysis": "simulate",
        "name": d.name,
        "passed": rep.passed,
        "options": {k: getattr(integ, k) for k in ("step", "event_refine_tol", "max_jumps", "min_dwell", "horizon")},
        "execution": e.summary(),
        "verification": rep.to_dict(),
    }


def _residual_table(hypothesis: dict[str, dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["max_vf_residual", "max_jump_mismatch", "node_mismatches", "passed"]
    w.writerow(["label"] + cols)
    for label in hypothesis:
        row = hypothesis[label]
        w.writerow([label] + [repr(row[c]) if isinstance(row[c], float) else row[c] for c in cols])
    return buf.getvalue()


def run_theorem(model: Model, d: TheoremDecl, args: argparse.Namespace, files: dict[str, str]) -> dict[str, Any]:
    opts = _options(d, model)
    nm = model.network_morphisms[d.morphism]
    w = {model.literal(k): model.controls[c] for k, c in d.w}
    v = {model.literal(k): model.controls[c] for k, c in d.v}
    for want, got, side in ((nm.target.systems.labels, w, "w"), (nm.source.systems.labels, v, "v")):
        missing = [x for x in want if x not in got]
        if missing:
            raise _input_error(f"theorem {d.name!r}: no {side} control for label {missing[0]!r}", d.line, d.col)
    tol = float(_pick(args.tol, opts, "tol", 1e-8))
    htol = opts.get("hypothesis_tol")
    try:
        rep = verify_main_theorem(
            nm,
            w,
            v,
            samples=int(_pick(args.samples, opts, "samples", 20)),
            tol=tol,
            hypothesis_tol=None if htol is None else float(htol),
            seed=int(_pick(args.seed, opts, "seed", 0)),
        )
    except (TheoremError, SystemsError) as exc:
        return {"analysis": "theorem", "name": d.name, "passed": False, "status": "invalid_input", "error": str(exc)}
    out: dict[str, Any] = {"analysis": "theorem", "name": d.name, **rep.to_dict()}
    out["residual_table"] = rep.hypothesis
    files[f"{d.name}_residuals.csv"] = _residual_table(rep.hypothesis)
    if d.initial is not None and rep.passed:
        x0 = _initial_point(model, *d.initial)
        try:
            demo = invariance_demo(nm, w, v, x0, _integrator(args, opts))
        except ExecutionError as exc:
            raise _input_error(str(exc), d.initial[0].line, d.initial[0].col) from None
        limit = float(opts.get("invariance_tol", INVARIANCE_TOL))
        ok = demo.sup_deviation <= limit and demo.compared > 0
        out["invariance"] = {
            "sup_deviation": demo.sup_deviation,
            "switches": demo.switches,
            "compared_samples": demo.compared,
            "tolerance": limit,
            "passed": ok,
        }
        files[f"{d.name}_bound_y_arcs.csv"] = demo.bound_y.arcs_csv()
        files[f"{d.name}_bound_x_arcs.csv"] = demo.bound_x.arcs_csv()
        out["passed"] = out["passed"] and ok
    return out


def _continuous(model: Model, name: str) -> ContinuousSystem:
    c = model.controls[name]
    (node,) = c.ssub.total.nodes
    box = c.ssub.total.box(node)
    return ContinuousSystem(lambda x: c.X(TaggedPoint(node, np.atleast_1d(x))), box.dim, box, name)


def run_stability(model: Model, d: StabilityDecl, args: argparse.Namespace, files: dict[str, str]) -> dict[str, Any]:
    opts = _options(d, model)
    search = SearchOptions(
        step=float(_pick(args.step, opts, "step", SearchOptions.step)),
        seed=int(args.seed if args.seed is not None else SearchOptions.seed),
    )
    horizon = float(_pick(args.horizon, opts, "horizon", 50.0))
    x0 = [model.number(e) for e in d.initial]
    eps = [model.number(e) for e in d.epsilons]
    source = _continuous(model, d.source)
    if len(x0) != source.dim:
        raise _input_error(f"initial point has {len(x0)} coordinates, {d.source!r} has {source.dim}", d.line, d.col)
    try:
        if d.map is None:
            verdict = empirical_stability(source, x0, eps, horizon, search)
            files[f"{d.name}_source.csv"] = verdict.table_csv()
            return {"analysis": "stability", "name": d.name, "passed": verdict.stable, "source": verdict.to_dict()}
        f = model.morphisms[d.map]
        (node,) = f.domain.nodes
        lo, hi, count = (model.number(e) for e in d.grid)
        axis = np.linspace(lo, hi, int(count))
        grid = [np.array(p) for p in np.array(np.meshgrid(*[axis] * source.dim)).reshape(source.dim, -1).T]
        rep = stability_transport_demo(
            f.maps[node],
            source,
            _continuous(model, d.target),
            x0,
            grid,
            eps,
            horizon,
            search,
            tol=args.tol if args.tol is not None else 1e-7,
        )
    except StabilityError as exc:
        return {"analysis": "stability", "name": d.name, "passed": False, "error": str(exc)}
    files[f"{d.name}_source.csv"] = rep.source.table_csv()
    files[f"{d.name}_target.csv"] = rep.target.table_csv()
    return {"analysis": "stability", "name": d.name, **rep.to_dict()}


ANALYSIS_RUNNERS: dict[type, Callable[..., dict[str, Any]]] = {
    SimulateDecl: run_simulate,
    TheoremDecl: run_theorem,
    StabilityDecl: run_stability,
}


def run_verify(kind: str, model: Model, args: argparse.Namespace, files: dict[str, str]) -> list[dict[str, Any]]:
    samples = args.samples if args.samples is not None else 20
    tol = args.tol if args.tol is not None else 1e-9
    seed = args.seed if args.seed is not None else 0
    if kind == "theorem":
        decls = _selected(model.scenario.analyses(TheoremDecl), args.name)
        if not decls:
            raise _input_error("scenario has no theorem blocks")
        return [run_theorem(model, d, args, files) for d in decls]
    tables: list[tuple[str, dict[str, Any], Callable[[Any], Any]]] = {
        "control": [("control", model.controls, lambda c: check_control(c, samples, tol, seed))],
        "morphism": [
            ("morphism", model.morphisms, lambda f: check_morphism(f, samples, tol, seed)),
            ("ssub_morphism", model.ssub_morphisms, lambda f: check_ssub_morphism(f, samples, tol, seed)),
        ],
        "submersion": [("submersion", model.ssubs, lambda s: check_submersion(s, samples, seed=seed))],
        "network": [
            ("network", model.networks, lambda n: check_network(n, samples, tol, seed)),
            ("network_morphism", model.network_morphisms, lambda m: check_network_morphism(m, samples, tol, seed)),
        ],
    }[kind]
    results = []
    for label, table, check in tables:
        for name, obj in table.items():
            if args.name is not None and name != args.name:
                continue
            results.append({"analysis": label, "name": name, **check(obj).to_dict()})
    if not results:
        what = f"named {args.name!r}" if args.name else "to check"
        raise _input_error(f"no {kind} declarations {what}")
    return results


def _run_analyses(model: Model, args: argparse.Namespace, files: dict[str, str], kinds: Sequence[type]) -> list[dict[str, Any]]:
    decls = [d for d in model.scenario.analyses() if isinstance(d, tuple(kinds))]
    decls = _selected(decls, args.name)
    if not decls:
        raise _input_error("scenario has no matching analysis blocks")
    return [ANALYSIS_RUNNERS[type(d)](model, d, args, files) for d in decls]


def run_finite(args: argparse.Namespace) -> list[dict[str, Any]]:
    from .finite_cat import run_finite_suite

    rep = run_finite_suite(
        instances=args.samples if args.samples is not None else 100, seed=args.seed if args.seed is not None else 0
    )
    return [{"analysis": "finite", "name": "finite_suite", **rep.to_dict()}]


# --------------------------------------------------------------------------- driver


def _emit(doc: dict[str, Any], out: "Path | None", files: dict[str, str]) -> None:
    text = json.dumps(jsonable(doc), sort_keys=True, indent=2) + "\n"
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        for fname, content in sorted(files.items()):
            (out / fname).write_text(content, encoding="utf-8")
        (out / "report.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def dispatch(args: argparse.Namespace) -> tuple[dict[str, Any], dict[str, str]]:
    files: dict[str, str] = {}
    doc: dict[str, Any] = {"command": args.command}
    if args.command == "finite":
        results = run_finite(args)
    else:
        if args.command == "demo":
            doc["scenario"] = args.demo
            text = bundled_text(args.demo)
        else:
            doc["scenario"] = str(args.file)
            text = _read(args.file)
        model = _load(text, _params(args))
        doc["parameters"] = dict(sorted(model.params.items()))
        if args.command == "simulate":
            results = _run_analyses(model, args, files, [SimulateDecl])
        elif args.command == "stability":
            results = _run_analyses(model, args, files, [StabilityDecl])
        elif args.command == "verify":
            doc["kind"] = args.kind
            results = run_verify(args.kind, model, args, files)
        else:
            results = _run_analyses(model, args, files, list(ANALYSIS_RUNNERS))
    doc["results"] = results
    doc["passed"] = all(r.get("passed", False) for r in results)
    doc["status"] = "pass" if doc["passed"] else "fail"
    return doc, files


def main(argv: "Sequence[str] | None" = None) -> int:
    args = make_parser().parse_args(argv)
    if args.command == "show":
        sys.stdout.write(bundled_text(args.demo))
        return EXIT_PASS
    try:
        doc, files = dispatch(args)
    except InputError as exc:
        doc = {"command": args.command, "status": "input_error", "passed": False, "diagnostics": [d.to_dict() for d in exc.diagnostics]}
        for d in exc.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        _emit(doc, None, {})
        return EXIT_INPUT
    except (ExprError, PhaseSpaceError, NetworkError, SystemsError, ValueError) as exc:
        # evaluation errors while running, e.g. log of a negative number
        line, col = getattr(exc, "line", 0), getattr(exc, "col", 0)
        message = getattr(exc, "message", str(exc))
        doc = {"command": args.command, "status": "input_error", "passed": False, "diagnostics": [Diagnostic(line, col, message).to_dict()]}
        print(f"error: {message}", file=sys.stderr)
        _emit(doc, None, {})
        return EXIT_INPUT
    _emit(doc, getattr(args, "out", None), files)
    return EXIT_PASS if doc["passed"] else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
