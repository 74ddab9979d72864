"""Command-line front end.

    quidd check A B [--level L] [--method M] [--as K] [--json] [--quiet]
    quidd bench SUITE --sizes SPEC [--json]
    quidd dd serialize CIRCUIT OUT [--as K]
    quidd dd deserialize FILE [--json]

Exit codes: 0 equivalent (or filter passed), 1 not equivalent, 2 usage or
input error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import cmath
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import circuits as C
from . import equiv as E
from .dd import DDError, DDFormatError, Manager
from .gates import GateError
from .linalg import OPERATOR, STATE, QuIDD, ShapeError, scalar_ops

EXIT_OK, EXIT_DIFFERENT, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

STATE_ONLY = {"inner", "elemdiv", "modinner"}
OPERATOR_ONLY = {"matrix", "rpdiv", "modmatrix"}
METHOD_CHOICES = ["auto"] + sorted(E.METHODS)

REPORT_KEYS = ("command", "method", "level", "verdict", "equivalent", "phase",
               "phases", "phases_file", "side", "also_right", "kind", "qubits",
               "nodes_a", "nodes_b", "build_ms", "check_ms")


class UsageError(Exception):
    pass


def _cplx(z):
    return None if z is None else [float(z.real), float(z.imag)]


def _emit(report: dict, as_json: bool, quiet: bool):
    if quiet:
        return
    if as_json:
        print(json.dumps(report, sort_keys=True))
        return
    for k in REPORT_KEYS:
        if k in report and report[k] is not None:
            v = report[k]
            if k == "phase":
                z = complex(*v)
                v = f"{z.real:.12g}{z.imag:+.12g}j (angle {cmath.phase(z):.12g})"
            elif k == "phases":
                v = ", ".join(f"e^{{{cmath.phase(complex(*p)):.12g}i}}" for p in v)
            print(f"{k:12s} {v}")


# ---------------------------------------------------------------------------
# loading inputs
# ---------------------------------------------------------------------------

def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from None


def _is_dd_text(text: str) -> bool:
    return text.lstrip().startswith("quidd v1")


def _load(path: str, mgr: Manager, want: str | None) -> QuIDD:
    """Build a QuIDD from a circuit file or a serialized diagram."""
    text = _read(path)
    try:
        if _is_dd_text(text):
            root, kind, n = mgr.loads(text)
            if want is not None and kind != want:
                raise UsageError(f"{path}: holds a {kind} diagram, expected {want}")
            return QuIDD(mgr, root, n, kind)
        circ = C.parse_circuit(text)
    except (C.CircuitParseError, DDFormatError) as exc:
        raise UsageError(f"{path}: {exc}") from None
    kind = want or (STATE if C.has_init_line(text) else OPERATOR)
    if kind == STATE:
        return C.build_state(circ, mgr)
    return C.build_operator(circ, mgr)


def _wanted_kind(args) -> str | None:
    if args.kind != "auto":
        return args.kind
    if args.method in STATE_ONLY:
        return STATE
    if args.method in OPERATOR_ONLY:
        return OPERATOR
    return None


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------

def cmd_check(args) -> int:
    mgr = Manager()
    want = _wanted_kind(args)
    t0 = time.perf_counter()
    a = _load(args.a, mgr, want)
    # the second file follows the first unless the kind was forced
    b = _load(args.b, mgr, want or a.kind)
    build_ms = (time.perf_counter() - t0) * 1e3
    if a.kind != b.kind:
        raise UsageError(f"kind mismatch: {a.kind} vs {b.kind}")
    if a.n_qubits != b.n_qubits:
        raise UsageError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")
    if args.method in STATE_ONLY and a.kind != STATE:
        raise UsageError(f"method {args.method} needs states")
    if args.method in OPERATOR_ONLY and a.kind != OPERATOR:
        raise UsageError(f"method {args.method} needs operators")

    # library phases map the second operand onto the first; report the
    # factor that carries file A onto file B
    t1 = time.perf_counter()
    if args.method == "auto":
        v = E.auto_check(b, a, args.level)
    else:
        v = E.METHODS[args.method](b, a)
    check_ms = (time.perf_counter() - t1) * 1e3

    phases_file = None
    if v.phases is not None and args.phases_out:
        Path(args.phases_out).write_text(mgr.dumps(v.phases.root, STATE, v.phases.n_qubits))
        phases_file = args.phases_out
    report = {
        "command": "check",
        "method": v.method,
        "level": args.level,
        "verdict": v.outcome.value,
        "equivalent": v.equivalent,
        "phase": _cplx(v.phase),
        "phases": [_cplx(z) for z in v.phase_values] if v.phase_values else None,
        "phases_file": phases_file,
        "side": v.side.value if v.side else None,
        "also_right": v.also_right,
        "kind": a.kind,
        "qubits": a.n_qubits,
        "nodes_a": a.node_count,
        "nodes_b": b.node_count,
        "build_ms": build_ms,
        "check_ms": check_ms,
    }
    _emit(report, args.json, args.quiet)
    return EXIT_OK if v.passed else EXIT_DIFFERENT


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def parse_sizes(spec: str) -> list[int]:
    """``8..64``, ``8..64:8`` or ``3,5,9``."""
    spec = spec.strip()
    try:
        if ".." in spec:
            rng, _, step = spec.partition(":")
            lo, _, hi = rng.partition("..")
            lo, hi = int(lo), int(hi)
            step = int(step) if step else 1
            if step < 1 or hi < lo:
                raise ValueError
            return list(range(lo, hi + 1, step))
        sizes = [int(s) for s in spec.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad --sizes {spec!r}; use a..b[:step] or a comma list") from None
    if not sizes:
        raise UsageError("--sizes is empty")
    return sizes


def fit(xs, ys, degree: int) -> dict:
    """Least-squares polynomial fit with its coefficient of determination."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if len(x) <= degree:
        return {"coeffs": None, "r2": None}
    coeffs = np.polyfit(x, y, degree)
    resid = y - np.polyval(coeffs, x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return {"coeffs": [float(c) for c in coeffs], "r2": r2}


def _timed(fn, *a, repeats=1, reset=None):
    best, out = math.inf, None
    for _ in range(repeats):
        if reset:
            reset()
        t = time.perf_counter()
        out = fn(*a)
        best = min(best, time.perf_counter() - t)
    return out, best * 1e3


THETA = 0.345


def _bench_row(suite: str, n: int, repeats: int) -> dict:
    mgr = Manager()
    t = time.perf_counter()
    if suite == "grover":
        a = C.build_state(C.grover_iter(n), mgr)
        b = scalar_ops(a, cmath.exp(1j * THETA))
        methods = ("nodecount", "gprc", "inner")
    elif suite == "epr":
        b = C.build_state(C.remote_epr(n), mgr)
        a = C.remote_epr_target(n, mgr)
        methods = ("elemdiv", "modinner", "moddd", "merge")
    elif suite == "hamiltonian":
        a = C.build_operator(C.hamiltonian_zz(n, 0.3), mgr)
        b = C.build_operator(C.hamiltonian_zz(n, 0.9), mgr)
        methods = ("rpdiv", "moddd", "merge", "modmatrix")
    elif suite == "qft":
        a = C.inverse_qft(n, mgr)
        b = scalar_ops(a, cmath.exp(1j * THETA))
        methods = ("nodecount", "gprc")
    elif suite == "modexp":
        a = C.modexp_state(n, 7, mgr)
        b = scalar_ops(a, cmath.exp(1j * THETA))
        methods = ("nodecount", "gprc", "inner")
    else:
        raise UsageError(f"unknown suite {suite!r}")
    build_ms = (time.perf_counter() - t) * 1e3
    row = {"n": n, "qubits": a.n_qubits, "nodes": a.node_count,
           "build_ms": build_ms, "check_ms": {}, "verdicts": {}}
    for m in methods:
        v, ms = _timed(E.METHODS[m], a, b, repeats=repeats, reset=mgr.clear_cache)
        row["check_ms"][m] = ms
        row["verdicts"][m] = v.outcome.value
    return row


SUITES = ("grover", "epr", "hamiltonian", "qft", "modexp")


def cmd_bench(args) -> int:
    sizes = parse_sizes(args.sizes)
    try:
        rows = [_bench_row(args.suite, n, args.repeats) for n in sizes]
    except GateError as exc:
        raise UsageError(str(exc)) from None
    xs = [r["n"] for r in rows]
    nodes = [r["nodes"] for r in rows]
    fits = {"nodes_linear": fit(xs, nodes, 1),
            "nodes_log2_linear": fit(xs, np.log2(nodes), 1),
            "check_ms": {}}
    for m in rows[0]["check_ms"]:
        ys = [r["check_ms"][m] for r in rows]
        fits["check_ms"][m] = {"linear": fit(xs, ys, 1), "quadratic": fit(xs, ys, 2)}
    report = {"command": "bench", "suite": args.suite, "rows": rows, "fits": fits}
    if not args.quiet:
        if args.json:
            print(json.dumps(report, sort_keys=True))
        else:
            for r in rows:
                checks = " ".join(f"{m}={ms:.3f}ms/{r['verdicts'][m]}"
                                  for m, ms in r["check_ms"].items())
                print(f"n={r['n']:<5d} nodes={r['nodes']:<8d} build={r['build_ms']:.1f}ms {checks}")
            lin = fits["nodes_linear"]
            if lin["r2"] is not None:
                print(f"nodes ~ {lin['coeffs'][0]:.4g} n + {lin['coeffs'][1]:.4g}  (R^2 {lin['r2']:.5f})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# dd
# ---------------------------------------------------------------------------

def cmd_dd(args) -> int:
    mgr = Manager()
    if args.action == "serialize":
        want = None if args.kind == "auto" else args.kind
        q = _load(args.input, mgr, want)
        Path(args.output).write_text(mgr.dumps(q.root, q.kind, q.n_qubits))
        if not args.quiet:
            print(f"wrote {args.output}: {q.kind}, {q.n_qubits} qubits, {q.node_count} nodes")
        return EXIT_OK
    text = _read(args.input)
    try:
        root, kind, n = mgr.loads(text)
    except DDFormatError as exc:
        raise UsageError(f"{args.input}: {exc}") from None
    q = QuIDD(mgr, root, n, kind)
    info = {"command": "dd", "kind": kind, "qubits": n, "nodes": q.node_count,
            "terminals": [_cplx(mgr.value(t)) for t in mgr.terminals(root)]}
    if not args.quiet:
        print(json.dumps(info, sort_keys=True) if args.json else
              f"{kind}, {n} qubits, {q.node_count} nodes")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quidd", description="QuIDD equivalence checking.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="compare two circuits or serialized diagrams")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--level", choices=E.LEVELS, default="global")
    c.add_argument("--method", choices=METHOD_CHOICES, default="auto")
    c.add_argument("--as", dest="kind", choices=("auto", STATE, OPERATOR), default="auto",
                   help="build circuits as states or operators (auto: state iff 'init' present)")
    c.add_argument("--phases-out", metavar="PATH",
                   help="write the relative-phase vector as a serialized diagram")
    c.add_argument("--json", action="store_true")
    c.add_argument("--quiet", action="store_true")
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("bench", help="run a scaling suite")
    b.add_argument("suite", choices=SUITES)
    b.add_argument("--sizes", required=True, help="a..b[:step] or comma list")
    b.add_argument("--repeats", type=int, default=3, help="timing repeats (minimum kept)")
    b.add_argument("--json", action="store_true")
    b.add_argument("--quiet", action="store_true")
    b.set_defaults(func=cmd_bench)

    d = sub.add_parser("dd", help="serialize or inspect diagrams")
    d.add_argument("action", choices=("serialize", "deserialize"))
    d.add_argument("input")
    d.add_argument("output", nargs="?")
    d.add_argument("--as", dest="kind", choices=("auto", STATE, OPERATOR), default="auto")
    d.add_argument("--json", action="store_true")
    d.add_argument("--quiet", action="store_true")
    d.set_defaults(func=cmd_dd)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "dd" and args.action == "serialize" and not args.output:
            raise UsageError("dd serialize needs an output path")
        return args.func(args)
    except UsageError as exc:
        print(f"quidd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ShapeError, GateError) as exc:
        print(f"quidd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DDError, ZeroDivisionError, FloatingPointError, OverflowError) as exc:
        print(f"quidd: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
