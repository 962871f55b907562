"""Command-line driver.

Subcommands: check, eval, ad, grad, opt, emit, bench.  All failures exit
nonzero with a message on stderr; a strategy that merely fails to apply in
``opt`` exits with code 2 to distinguish it from parse, type or engine
errors (exit 1).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench as benchmod
from .dual import dual_term
from .fastinterp import CompileError, eval_compiled
from .futhark import EmitOptions, emit
from .interp import (
    ArrayV, ClosureV, EvalError, FinV, IntV, OpCounter, PairV, RealV, Value,
    apply_value, eval_term,
)
from .lang import Array, Fin, Int, Real, Term, TypeCheckError, typecheck
from .rules import default_pipeline, default_registry
from .strategy import StrategyEngineError, parse_strategy, run
from .syntax import ParseError, parse_term, print_term, print_type


class CliError(Exception):
    def __init__(self, message: str, code: int = 1):
        self.code = code
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are ordinary failures (exit 1)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Values on the command line
# ---------------------------------------------------------------------------


def parse_number_list(text: str) -> list[float]:
    """Bracketed comma-separated decimals, e.g. [2,3,4]."""
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise CliError(f"expected a bracketed list like [1,2,3], got {text!r}")
    inner = text[1:-1].strip()
    if not inner:
        raise CliError("empty value list")
    try:
        return [float(part) for part in inner.split(",")]
    except ValueError as exc:
        raise CliError(f"bad value list {text!r}: {exc}") from None


def literal_to_value(text: str, ty) -> Value:
    """Coerce a command-line literal to a value of the given type."""
    match ty:
        case Real():
            try:
                return RealV(float(text))
            except ValueError:
                raise CliError(f"expected a real literal, got {text!r}") from None
        case Int():
            try:
                return IntV(int(text))
            except ValueError:
                raise CliError(f"expected an int literal, got {text!r}") from None
        case Fin(n):
            try:
                i = int(text)
            except ValueError:
                raise CliError(f"expected an index literal, got {text!r}") from None
            if not 0 <= i < n:
                raise CliError(f"index {i} out of bound {n}")
            return FinV(i, n)
        case Array(n, elem) if elem == Real():
            values = parse_number_list(text)
            if len(values) != n:
                raise CliError(f"expected {n} values, got {len(values)}")
            return ArrayV(tuple(RealV(v) for v in values))
    raise CliError(f"cannot build a {ty} from a command-line literal")


def format_value(v: Value) -> str:
    match v:
        case RealV(x):
            return repr(x)
        case IntV(k):
            return str(k)
        case FinV(i, _):
            return str(i)
        case ArrayV(items):
            return "[" + ", ".join(format_value(x) for x in items) + "]"
        case PairV(a, b):
            return f"({format_value(a)}, {format_value(b)})"
        case ClosureV():
            return "<function>"
    return repr(v)


def format_counts(ctr: OpCounter) -> str:
    parts = [f"{k}={v}" for k, v in ctr.as_dict().items()]
    return "ops: " + " ".join(parts) + f" total={ctr.total()}"


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _load_term(path: str) -> Term:
    try:
        src = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from None
    return parse_term(src)


def _evaluate(term: Term, env: dict | None = None):
    try:
        return eval_compiled(term, env)
    except CompileError:
        return eval_term(term, env)


def _strategy_from_args(args) -> "tuple":
    registry = default_registry()
    if getattr(args, "strategy", None):
        return parse_strategy(args.strategy), registry
    return default_pipeline(), registry


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    term = _load_term(args.file)
    print(print_type(typecheck(term)))
    return 0


def cmd_eval(args) -> int:
    term = _load_term(args.file)
    typecheck(term)
    if args.args:
        value, ctr = eval_term(term)
        for literal in args.args:
            if not isinstance(value, ClosureV):
                raise CliError("term is fully applied; too many --args")
            arg_value = literal_to_value(literal, value.ty)
            value, ctr = apply_value(value, arg_value, ctr)
    else:
        value, ctr = _evaluate(term)
    print(format_value(value))
    print(format_counts(ctr))
    return 0


def cmd_ad(args) -> int:
    term = _load_term(args.file)
    typecheck(term)
    print(print_term(dual_term(term)))
    return 0


def cmd_grad(args) -> int:
    loss = _load_term(args.file)
    ty = typecheck(loss)
    try:
        a = ty.dom.n
        b = ty.cod.dom.n
        n = ty.cod.cod.dom.n
    except AttributeError:
        raise CliError(f"loss must take three real arrays, has type {print_type(ty)}") from None
    params = parse_number_list(args.params)
    if len(params) != n:
        raise CliError(f"--params must supply {n} values, got {len(params)}")
    x = parse_number_list(args.x) if args.x else None
    y = parse_number_list(args.y) if args.y else None
    if x is not None and len(x) != a:
        raise CliError(f"--x must supply {a} values, got {len(x)}")
    if y is not None and len(y) != b:
        raise CliError(f"--y must supply {b} values, got {len(y)}")

    term = benchmod.gradient_program(loss)
    if args.optimize or args.strategy:
        strategy, registry = _strategy_from_args(args)
        rewritten = run(strategy, term, registry)
        if rewritten is None:
            raise CliError("optimization strategy failed", code=2)
        term = rewritten
    env = benchmod.gradient_env(a, b, n, params, x, y)
    value, ctr = _evaluate(term, env)
    print(format_value(value))
    print(format_counts(ctr))
    return 0


def cmd_opt(args) -> int:
    term = _load_term(args.file)
    typecheck(term)
    strategy, registry = _strategy_from_args(args)
    rewritten = run(strategy, term, registry)
    if rewritten is None:
        print("FAILED")
        return 2
    print(print_term(rewritten))
    return 0


def cmd_emit(args) -> int:
    term = _load_term(args.file)
    typecheck(term)
    if args.optimize:
        strategy, registry = _strategy_from_args(args)
        rewritten = run(strategy, term, registry)
        if rewritten is None:
            raise CliError("optimization strategy failed", code=2)
        term = rewritten
    print(emit(term, EmitOptions(entry_point=args.entry)), end="")
    return 0


def cmd_bench(args) -> int:
    if args.target != "vectorsum":
        raise CliError(f"unknown benchmark {args.target!r}")
    sizes = [int(part) for part in args.sizes.split(",") if part]
    report = benchmod.bench_vector_sum(sizes)
    print(report.table())
    print()
    for line in report.machine_lines():
        print(line)
    csv_path, plot_path = args.csv, args.plot
    if args.report_dir:
        outdir = Path(args.report_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        csv_path = csv_path or outdir / "vectorsum_ops.csv"
        plot_path = plot_path or outdir / "vectorsum_ops.png"
    if csv_path:
        benchmod.write_csv(report, csv_path)
        print(f"wrote {csv_path}", file=sys.stderr)
    if plot_path:
        benchmod.plot_report(report, plot_path)
        print(f"wrote {plot_path}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="arrayad",
                     description="A functional array language with dual-number "
                                 "differentiation and strategy-driven rewriting.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="type-check a term file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("eval", help="evaluate a term file")
    p.add_argument("file")
    p.add_argument("--args", nargs="*", default=[],
                   help="value literals applied to a function-typed term")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("ad", help="print the dual-numbers transform of a term")
    p.add_argument("file")
    p.set_defaults(fn=cmd_ad)

    p = sub.add_parser("grad", help="evaluate the gradient of a loss term")
    p.add_argument("file")
    p.add_argument("--params", required=True, help="parameter values, e.g. [2,3,4]")
    p.add_argument("--x", help="data input values")
    p.add_argument("--y", help="data output values")
    p.add_argument("--optimize", action="store_true",
                   help="run the default pipeline before evaluating")
    p.add_argument("--strategy", help="optimize with a custom strategy expression")
    p.set_defaults(fn=cmd_grad)

    p = sub.add_parser("opt", help="rewrite a term with a strategy")
    p.add_argument("file")
    p.add_argument("--strategy", required=True)
    p.set_defaults(fn=cmd_opt)

    p = sub.add_parser("emit", help="emit Futhark-syntax text")
    p.add_argument("file")
    p.add_argument("--optimize", action="store_true")
    p.add_argument("--strategy")
    p.add_argument("--entry", default="main")
    p.set_defaults(fn=cmd_emit)

    p = sub.add_parser("bench", help="run the vector-sum gradient benchmark")
    p.add_argument("target", choices=["vectorsum"])
    p.add_argument("--sizes", default="256,512,1024,2048,4096")
    p.add_argument("--csv", help="also write rows to this CSV file")
    p.add_argument("--plot", help="also render a log-log figure to this file")
    p.add_argument("--report-dir",
                   help="write vectorsum_ops.csv and vectorsum_ops.png here")
    p.set_defaults(fn=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits; keep main embeddable
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ParseError, TypeCheckError, EvalError, CompileError,
            StrategyEngineError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
