"""Command-line entry point: ``sympten <command> ...``.

Every command prints one JSON report on stdout. Exit status is 0 when all
checks pass, 1 when a check fails and 2 for usage or input errors (reported
as a JSON object on stderr).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import connections as cn
from . import invariants as inv
from .chart import Chart, ChartError, load_shipped, shipped_charts
from .decomposition import DecompositionError, decompose_torsion
from .expr import ExprError
from .linear import Tensor, antisymmetrize, tensor_from_json, tensor_to_json
from .verify import SUITES, run_suite

MODES = ("rational", "float")


class UsageError(Exception):
    pass


class InputParseError(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer, np.floating, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Tensor):
        return tensor_to_json(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def resolve_mode(flag, default: str) -> str:
    """--mode beats SYMPTEN_MODE, which beats the per-command default."""
    mode = flag or os.environ.get("SYMPTEN_MODE") or default
    if mode not in MODES:
        raise UsageError(f"unknown arithmetic mode {mode!r}; use rational or float")
    return mode


def parse_n_list(text: str) -> list:
    try:
        out = [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"--n expects comma-separated integers, got {text!r}") from exc
    if not out or any(n < 1 for n in out):
        raise UsageError("--n values must be positive")
    return out


def _report(command, digest, mode, tolerances, results, residuals, checks) -> dict:
    return {
        "command": command,
        "inputs_digest": digest,
        "mode": mode,
        "tolerances": tolerances,
        "results": results,
        "residuals": residuals,
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }


def _read(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _load_tensor(path, exact: bool) -> Tensor:
    raw = _read(path)
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    try:
        return tensor_from_json(doc, exact=exact)
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        raise InputParseError(f"{path}: {exc}") from exc


# -- commands -------------------------------------------------------------------

def cmd_decompose(args) -> dict:
    mode = resolve_mode(args.mode, "rational")
    exact = mode == "rational"
    tol = args.tol if args.tol is not None else 1e-12
    t = _load_tensor(args.input, exact)
    if t.order != 3:
        raise UsageError("decompose expects an order-3 tensor")
    antisym = False
    try:
        t = t.with_signature((1, 2))
    except ValueError:
        t = antisymmetrize(t, (1, 2)).with_signature((1, 2))
        antisym = True
    d = decompose_torsion(t)
    parts = d.parts()
    resid = d.recombination_residual
    ok = resid == 0 if exact else resid <= tol
    results = {
        "n": t.space.n,
        "input_antisymmetrized": antisym,
        "degenerate": d.degenerate,
        "parts": {k: tensor_to_json(v) for k, v in parts.items()},
        "norms": {k: v.max_abs() for k, v in parts.items()},
    }
    if d.degenerate:
        results["note"] = "n = 1: Lambda^3 V = 0, the form-side parts are identically zero"
    checks = [{"name": "parts sum to input", "pass": bool(ok), "value": resid, "tol": 0 if exact else tol}]
    return _report(["decompose", args.input], _digest(_read(args.input)), mode,
                   {"recombination": 0 if exact else tol}, results, {"recombination": resid}, checks)


def cmd_invariants(args) -> dict:
    mode = resolve_mode(args.mode, "rational")
    exact = mode == "rational"
    tol = args.tol if args.tol is not None else 1e-9
    Q = _load_tensor(args.input, exact)
    if Q.order != 3:
        raise UsageError("invariants expects an order-3 tensor")
    vals = dict(zip(("r1", "r2", "r3", "r4"), inv.r_invariants(Q)))
    results = {"n": Q.space.n, "r": vals}
    if args.all_matchings:
        results["matchings"] = {str(m): inv.eval_trace(Q, m) for m in inv.all_matchings()}
    checks = []
    sym = Q.components + np.swapaxes(Q.components, 0, 1)
    skew = not np.any(sym != 0) if exact else float(np.abs(sym).max()) <= tol
    results["skew_in_first_two"] = bool(skew)
    residuals = {}
    if skew:
        cor = inv.mixed_index_form(Q)
        diff = abs(cor - vals["r2"])
        residuals["mixed_vs_r"] = diff
        results["unique_invariant"] = vals["r2"]
        checks.append({"name": "mixed-index form equals r(Q)", "pass": bool(diff == 0 if exact else diff <= tol),
                       "value": diff, "tol": 0 if exact else tol})
    return _report(["invariants", args.input], _digest(_read(args.input)), mode,
                   {"mixed_index": 0 if exact else tol}, results, residuals, checks)


def cmd_classify(args) -> dict:
    mode = resolve_mode(args.mode, "rational")
    if mode != "rational":
        raise UsageError("classify-traces runs in exact arithmetic only")
    n_list = parse_n_list(args.n)
    results, checks = {}, []
    for n in n_list:
        if n > 3:
            raise UsageError("classify-traces supports n <= 3")
        rep = inv.classify_traces(n)
        results[str(n)] = rep
        want = 4 if n > 1 else 1
        checks.append({"name": f"span rank {want} (n={n})", "pass": rep["span_rank"] == want,
                       "value": rep["span_rank"], "tol": 0})
    return _report(["classify-traces", "--n", args.n], _digest(args.n.encode()), mode, {"rank": 0},
                   results, {}, checks)


def _load_chart(ref):
    path = Path(ref)
    if path.exists():
        raw = path.read_bytes()
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ChartError(f"{ref}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
        return doc, raw
    name = ref[:-5] if ref.endswith(".json") else ref
    if name + ".json" in shipped_charts():
        chart = load_shipped(name)
        return chart.config, json.dumps(chart.config, sort_keys=True).encode()
    raise UsageError(f"no chart file {ref!r} and no shipped chart of that name ({', '.join(shipped_charts())})")


def cmd_tondeur(args) -> dict:
    if args.mode == "rational":
        raise UsageError("tondeur works in floating point; drop --mode rational")
    tol = args.tol if args.tol is not None else 1e-6
    doc, raw = _load_chart(args.chart)
    if not isinstance(doc, dict):
        raise ChartError("chart config must be a JSON object")
    c0 = cn.chart_connection(doc)
    chart = c0.chart
    info = chart.validate(args.lattice, seed=args.seed)
    c = cn.tondeur(c0, lattice=args.lattice, seed=args.seed)
    rep = cn.tondeur_report(c, args.lattice, args.seed)
    pts = chart.lattice(args.lattice, seed=args.seed)[: args.samples]
    samples = [{"x": x.tolist(), "gamma": c.christoffel(x).tolist(),
                "t": cn.torsion_invariant(c, x)} for x in pts]
    checks = [
        {"name": "max |nabla omega|", "pass": rep["max_nabla_omega"] < tol, "value": rep["max_nabla_omega"], "tol": tol},
        {"name": "max |T_ijk - d omega_ijk / 3|", "pass": rep["max_torsion_minus_domega_over_3"] < tol,
         "value": rep["max_torsion_minus_domega_over_3"], "tol": tol},
    ]
    results = {"chart": chart.name, "n": chart.n, "lattice_points": rep["points"],
               "symplectic": rep["max_torsion"] < 1e-10, "chart_validation": info, "samples": samples}
    return _report(["tondeur", args.chart], _digest(raw), "float",
                   {"residual": tol, "symplectic": 1e-10}, results, rep, checks)


def cmd_verify(args) -> dict:
    n_list = parse_n_list(args.n)
    if args.suite not in SUITES + ("all",):
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES + ('all',))}")
    mode = resolve_mode(args.mode, "rational")
    try:
        reports = run_suite(args.suite, n_list, mode=mode, tol=args.tol, seed=args.seed, lattice=args.lattice)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    checks = []
    for r in reports:
        for c in r.checks:
            d = c.to_json()
            d["name"] = f"{r.suite}: {d['name']}"
            checks.append(d)
    results = {r.suite: {"pass": r.passed, "mode": r.mode, "seconds": round(r.seconds, 3),
                         "checks": len(r.checks)} for r in reports}
    tols = {"algebraic": 0 if mode == "rational" else (args.tol or 1e-8), "chart": args.tol or 1e-6}
    echo = ["verify", "--suite", args.suite, "--n", args.n]
    return _report(echo, _digest(" ".join(echo).encode() + f" seed={args.seed}".encode()), mode, tols,
                   results, {}, checks)


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=MODES, default=None,
                        help="arithmetic mode (default: rational for algebra, float for charts; env SYMPTEN_MODE)")
    common.add_argument("--tol", type=float, default=None, help="tolerance for floating-point checks")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--lattice", type=int, default=3, help="grid points per axis on charts")
    common.add_argument("--out", default=None, help="write the JSON report here instead of stdout")

    p = argparse.ArgumentParser(prog="sympten", description="Symplectic torsion toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", parents=[common], help="split a tensor in V (x) Lambda^2 V")
    d.add_argument("input", help="tensor JSON file")
    d.set_defaults(func=cmd_decompose)

    i = sub.add_parser("invariants", parents=[common], help="quadratic invariants r1..r4 of an order-3 tensor")
    i.add_argument("input", help="tensor JSON file")
    i.add_argument("--all-matchings", action="store_true", help="also evaluate all 15 matchings")
    i.set_defaults(func=cmd_invariants)

    c = sub.add_parser("classify-traces", parents=[common], help="exact classification of quadratic traces")
    c.add_argument("--n", default="1,2,3")
    c.set_defaults(func=cmd_classify)

    t = sub.add_parser("tondeur", parents=[common], help="Tondeur connection on a chart")
    t.add_argument("chart", help="chart config path or shipped chart name")
    t.add_argument("--samples", type=int, default=5, help="number of Gamma / t samples to emit")
    t.set_defaults(func=cmd_tondeur)

    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("--suite", default="all", help=f"one of {', '.join(SUITES)}, all")
    v.add_argument("--n", default="1,2,3")
    v.set_defaults(func=cmd_verify)
    return p


def _fail(kind: str, message: str) -> int:
    print(json.dumps({"error": {"type": kind, "message": message}}), file=sys.stderr)
    return 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except UsageError as exc:
        return _fail("usage", str(exc))
    except (InputParseError, ChartError, ExprError) as exc:
        return _fail("parse", str(exc))
    except (DecompositionError, cn.ConnectionLabError) as exc:
        return _fail("precondition", str(exc))
    text = json.dumps(report, default=_jsonable, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
