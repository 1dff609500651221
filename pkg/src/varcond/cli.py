"""varcond: Euler-Lagrange equations and second-order extremum tests for
variational problems given as ``.vp`` files.

Usage:
    varcond euler-lagrange FILE [--json]
    varcond hessian FILE [--json]
    varcond classify FILE [--json] [--grid g1,...,gn] [--oracle] [--require-critical]
    varcond second-variation FILE [--json] [--trials T] [--seed S]

Exit codes: 0 ok, 1 usage, 2 parse error, 3 numeric/domain error,
4 candidate not critical under ``classify --require-critical``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .analysis import NOT_CRITICAL, ClassificationReport, OracleRecord, Problem, classify, second_variation_oracle
from .errors import NumericError, ParseError
from .expr import to_text
from .hessian import build_hessian
from .parser import parse_grid, parse_problem
from .varops import euler_lagrange_system

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_NUMERIC = 3
EXIT_NOT_CRITICAL = 4

SCHEMA_KEYS = ("problem", "residuals", "points", "verdicts", "flags", "oracle")
EVIDENCE_NOTE = "verdicts are sampled evidence on the grid, not a proof for every x in the domain"


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- serialization -------------------------------------------------------------


def _real(v: float) -> str:
    v = float(v)
    if math.isnan(v) or math.isinf(v):
        return "null"
    text = format(v, ".17g")
    # keep reals distinguishable from integers after a round trip
    return text if any(ch in text for ch in ".en") else text + ".0"


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with reals at 17 significant digits and insertion key order."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _real(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def problem_dict(p: Problem) -> dict:
    spec = p.spec
    indep = [spec.indep_name(i) for i in range(1, spec.n + 1)]
    dep = [spec.dep_names[j] if spec.dep_names else f"u{j + 1}" for j in range(spec.m)]
    return {
        "independent": indep,
        "dependent": dep,
        "order": spec.s,
        "lagrangian": to_text(p.lagrangian, spec),
        "domain": [[a, b] for a, b in p.domain.bounds],
        "candidate": [to_text(e, spec) for e in p.candidate],
        "numerics": {
            "grid": list(p.numerics.grid),
            "quad_nodes": p.numerics.quad_nodes,
            "tol_pd": p.numerics.tol_pd,
            "tol_residual": p.numerics.tol_residual,
            "seed": p.numerics.seed,
        },
    }


def oracle_dict(o: OracleRecord | None):
    if o is None:
        return None
    return {
        "fd_second": o.fd_second,
        "quadratic_form": o.quadratic_form,
        "rel_gap": o.rel_gap,
        "first_variation": o.first_variation,
        "seed": o.seed,
        "step": o.step,
        "trials": [
            {
                "fd_second": t.fd_second,
                "quadratic_form": t.quadratic_form,
                "rel_gap": t.rel_gap,
                "first_variation": t.first_variation,
            }
            for t in o.trials
        ],
    }


def report_dict(r: ClassificationReport) -> dict:
    return {
        "problem": problem_dict(r.problem),
        "residuals": list(r.residuals),
        "points": [
            {
                "x": list(pt.x),
                "lambda_min": pt.lambda_min,
                "lambda_max": pt.lambda_max,
                "definiteness": pt.definiteness.value,
                "B": list(pt.B),
            }
            for pt in r.points
        ],
        "verdicts": {"sufficient": r.verdict_sufficient.value, "necessary": r.verdict_necessary.value},
        "flags": list(r.flags),
        "oracle": oracle_dict(r.oracle),
    }


def _table(header, rows) -> list[str]:
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in rows]
    return lines


def _g(v) -> str:
    return format(float(v), ".6g")


def _oracle_lines(o: OracleRecord) -> list[str]:
    lines = [f"second-variation oracle (seed {o.seed}, step {_g(o.step)}, {len(o.trials)} trials)"]
    rows = [
        [str(i), _real(t.fd_second), _real(t.quadratic_form), _g(t.rel_gap), _g(t.first_variation)]
        for i, t in enumerate(o.trials)
    ]
    lines += _table(["trial", "FD f''(0)", "quadratic form", "rel gap", "first variation"], rows)
    lines.append(f"max rel gap: {_g(o.rel_gap)}")
    lines.append(f"max |first variation| (boundary-vanishing perturbations): {_g(o.first_variation)}")
    return lines


def emit_report(r: ClassificationReport, as_json: bool = False) -> str:
    if as_json:
        return dumps(report_dict(r)) + "\n"
    p = r.problem
    spec = p.spec
    names = problem_dict(p)
    out = [
        f"problem: n={spec.n} m={spec.m} s={spec.s}",
        f"lagrangian: {names['lagrangian']}",
    ]
    for name, cand in zip(names["dependent"], names["candidate"]):
        out.append(f"candidate: {name} = {cand}")
    out.append("")
    out.append("Euler-Lagrange residuals (max |.| over grid):")
    for name, res in zip(names["dependent"], r.residuals):
        out.append(f"  {name}: {_g(res)}")
    if NOT_CRITICAL in r.flags:
        out.append(f"  candidate is NOT critical (tol_residual = {_g(p.numerics.tol_residual)})")
    out.append("")
    header = names["independent"] + ["lambda_min", "lambda_max", "definiteness"] + [f"B_{l}" for l in range(spec.s + 1)]
    rows = [
        [_g(v) for v in pt.x] + [_g(pt.lambda_min), _g(pt.lambda_max), pt.definiteness.value] + [_g(b) for b in pt.B]
        for pt in r.points
    ]
    out += _table(header, rows)
    out.append("")
    out.append(f"sufficient condition: {r.verdict_sufficient.value}")
    bad = r.first_offending_point()
    if bad is not None:
        out.append(
            f"  first offending point x = ({', '.join(_g(v) for v in bad.x)}): "
            f"{bad.definiteness.value}, lambda_min = {_real(bad.lambda_min)}, lambda_max = {_real(bad.lambda_max)}"
        )
    out.append(f"necessary condition: {r.verdict_necessary.value}")
    if r.flags:
        out.append(f"flags: {', '.join(r.flags)}")
    out.append(f"note: {EVIDENCE_NOTE}")
    if r.oracle is not None:
        out.append("")
        out += _oracle_lines(r.oracle)
    return "\n".join(out) + "\n"


# -- subcommands ---------------------------------------------------------------


def _euler_lagrange(p: Problem, args) -> tuple[str, int]:
    spec = p.spec
    system = euler_lagrange_system(p.lagrangian, spec)
    names = problem_dict(p)["dependent"]
    if args.json:
        body = {
            "problem": problem_dict(p),
            "max_order": system.max_order,
            "equations": {name: to_text(e, spec) for name, e in zip(names, system.equations)},
        }
        return dumps(body) + "\n", EXIT_OK
    lines = [f"delta L / delta {name} = {to_text(e, spec)}" for name, e in zip(names, system.equations)]
    return "\n".join(lines) + "\n", EXIT_OK


def _hessian(p: Problem, args) -> tuple[str, int]:
    spec = p.spec
    a = build_hessian(p.lagrangian, spec)
    mask = a.nonzero_mask()
    coords = [spec.coord_name(c) for c in spec.coordinates]
    nonzero = int(mask.sum())
    if args.json:
        body = {
            "problem": problem_dict(p),
            "dim": a.dim,
            "coordinates": coords,
            "block_sizes": [len(spec.order_table(l)) for l in range(spec.s + 1)],
            "nonzero": nonzero,
            "entries": [
                {"row": coords[r], "col": coords[c], "value": to_text(a.entries[r][c], spec)}
                for r in range(a.dim)
                for c in range(r, a.dim)
                if mask[r, c]
            ],
        }
        return dumps(body) + "\n", EXIT_OK
    sizes = [len(spec.order_table(l)) for l in range(spec.s + 1)]
    out = [
        f"A is {a.dim} x {a.dim}: {spec.m} x {spec.m} blocks A^(j,j'), each split into "
        f"{spec.s + 1} x {spec.s + 1} sub-blocks A^(j,j')_(k,k') of size p_k x p_k'",
        f"p_k for k = 0..{spec.s}: {', '.join(map(str, sizes))}",
        f"coordinates: {', '.join(coords)}",
        f"structural nonzeros: {nonzero} of {a.dim * a.dim}",
        "",
        "sparsity (X nonzero, . zero):",
    ]
    width = len(str(a.dim - 1))
    for r in range(a.dim):
        out.append(f"  {str(r).rjust(width)} " + "".join("X" if mask[r, c] else "." for c in range(a.dim)) + f"  {coords[r]}")
    out.append("")
    out.append("entries (upper triangle, nonzero):")
    for r in range(a.dim):
        for c in range(r, a.dim):
            e = a.entries[r][c]
            if mask[r, c]:
                out.append(f"  d2L/d{coords[r]} d{coords[c]} = {to_text(e, spec)}")
    if not nonzero:
        out.append("  (none)")
    return "\n".join(out) + "\n", EXIT_OK


def _classify(p: Problem, args) -> tuple[str, int]:
    report = classify(p, oracle_trials=args.trials if args.oracle else 0, seed=args.seed)
    code = EXIT_NOT_CRITICAL if args.require_critical and NOT_CRITICAL in report.flags else EXIT_OK
    return emit_report(report, args.json), code


def _second_variation(p: Problem, args) -> tuple[str, int]:
    record = second_variation_oracle(p, args.trials, args.seed)
    if args.json:
        return dumps({"problem": problem_dict(p), "oracle": oracle_dict(record)}) + "\n", EXIT_OK
    return "\n".join(_oracle_lines(record)) + "\n", EXIT_OK


COMMANDS = {
    "euler-lagrange": _euler_lagrange,
    "hessian": _hessian,
    "classify": _classify,
    "second-variation": _second_variation,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="varcond", description="Second-order extremum conditions for variational problems.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("file", metavar="FILE")
        cmd.add_argument("--json", action="store_true", help="emit JSON")
        cmd.add_argument("--seed", type=int, default=None, help="oracle seed (default: file's seed, 42)")
        cmd.add_argument("--trials", type=int, default=8, help="oracle trials (default 8)")
        cmd.add_argument("--grid", default=None, help="grid counts g1,...,gn")
        cmd.add_argument("--quad-nodes", type=int, default=None)
        cmd.add_argument("--tol-pd", type=float, default=None)
        cmd.add_argument("--tol-residual", type=float, default=None)
        cmd.add_argument("--oracle", action="store_true", help="classify: also run the second-variation oracle")
        cmd.add_argument("--require-critical", action="store_true", help="classify: exit 4 if the candidate is not critical")
    return parser


def _load(args) -> Problem:
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read problem file: {exc.strerror}") from None
    p = parse_problem(text)
    changes = {}
    if args.grid is not None:
        try:
            changes["grid"] = parse_grid(args.grid.replace(",", " ").split(), p.spec.n)
        except ParseError as exc:
            raise UsageError(f"--grid: {exc.message}") from None
    if args.quad_nodes is not None:
        changes["quad_nodes"] = args.quad_nodes
    if args.tol_pd is not None:
        changes["tol_pd"] = args.tol_pd
    if args.tol_residual is not None:
        changes["tol_residual"] = args.tol_residual
    if args.seed is not None:
        changes["seed"] = args.seed
    if changes:
        try:
            p = p.with_numerics(**changes)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        if args.trials < 1:
            raise UsageError("--trials must be >= 1")
    except UsageError as exc:
        print(f"varcond: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    try:
        problem = _load(args)
        text, code = COMMANDS[args.command](problem, args)
    except UsageError as exc:
        print(f"varcond: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except ParseError as exc:
        where = f"{args.file}:{exc.line}" if exc.line is not None else args.file
        print(f"{where}: parse error: {exc.message}", file=stderr)
        return EXIT_PARSE
    except NumericError as exc:
        print(f"{args.file}: numeric error: {exc}", file=stderr)
        return EXIT_NUMERIC
    stdout.write(text)
    if code == EXIT_NOT_CRITICAL:
        print(f"{args.file}: candidate is not a critical point", file=stderr)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
