"""Futhark-syntax code emission.

Produces deterministic, self-contained program text with one entry point.
Free variables and any top-level lambda parameters become entry parameters;
sized arrays map to sized Futhark arrays, reals to f64, ints and indices to
i64.  Comparisons keep the language's 1/0 integer encoding via i64.bool.

The emitted text is meant for an external Futhark toolchain; nothing here
invokes one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lang import (
    App, Arrow, Array, BinOp, Build, CFin, CInt, CReal, Fin, FinToInt, Fst,
    Get, If, IFold, Int, IntToReal, Lam, Let, MkPair, Pair, Real, Snd, Term,
    Type, Var, free_vars, typecheck,
)

_ARITH = {"add": "+", "mul": "*", "sub": "-", "div": "/"}
_CMP = {"lt": "<", "eq": "=="}


@dataclass(frozen=True)
class EmitOptions:
    """Emission settings: entry name and documented array-size bindings.

    The scalar width is fixed at 64 bits to match the evaluator.
    """

    entry_point: str = "main"
    sizes: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        for name, n in self.sizes:
            if n < 1:
                raise ValueError(f"size binding {name}={n} must be positive")


def futhark_type(ty: Type) -> str:
    match ty:
        case Real():
            return "f64"
        case Int() | Fin(_):
            return "i64"
        case Array(n, elem):
            return f"[{n}]{futhark_type(elem)}"
        case Pair(left, right):
            return f"({futhark_type(left)}, {futhark_type(right)})"
        case Arrow(dom, cod):
            return f"({futhark_type(dom)} -> {futhark_type(cod)})"
    raise ValueError(f"cannot emit type {ty}")


class _Emit:
    def __init__(self):
        self.serial = 0
        self.taken: set[str] = set()

    def mangle(self, name: str) -> str:
        base = "v_" + "".join(c if c.isalnum() or c == "_" else "_" for c in name)
        cand = base
        k = 0
        while cand in self.taken:
            k += 1
            cand = f"{base}_{k}"
        self.taken.add(cand)
        return cand

    def temp(self, prefix: str) -> str:
        self.serial += 1
        return f"{prefix}{self.serial}"


def _lit_f64(v: float) -> str:
    text = f"{v!r}f64"
    return f"({text})" if v < 0 else text


def _lit_i64(k: int) -> str:
    text = f"{k}i64"
    return f"({text})" if k < 0 else text


def _term(t: Term, scope: dict, em: _Emit) -> str:
    match t:
        case Var(name, ty):
            return scope[(name, ty)]
        case CReal(v):
            return _lit_f64(v)
        case CInt(k):
            return _lit_i64(k)
        case CFin(i, _):
            return _lit_i64(i)
        case App(f, a):
            return f"({_term(f, scope, em)}) ({_term(a, scope, em)})"
        case Lam(x, ty, b):
            inner = dict(scope)
            name = em.mangle(x)
            inner[(x, ty)] = name
            return f"(\\({name}: {futhark_type(ty)}) -> {_term(b, inner, em)})"
        case Let(x, ty, e0, b):
            bound = _term(e0, scope, em)
            inner = dict(scope)
            name = em.mangle(x)
            inner[(x, ty)] = name
            return f"(let {name}: {futhark_type(ty)} = {bound} in {_term(b, inner, em)})"
        case If(c, a, b):
            return (f"(if ({_term(c, scope, em)}) != 0i64 "
                    f"then {_term(a, scope, em)} else {_term(b, scope, em)})")
        case IFold(n, f, x):
            acc = em.temp("acc")
            idx = em.temp("i")
            step = _term(f, scope, em)
            init = _term(x, scope, em)
            return (f"(loop {acc} = ({init}) for {idx} < {n} "
                    f"do ({step}) {acc} {idx})")
        case MkPair(a, b):
            return f"({_term(a, scope, em)}, {_term(b, scope, em)})"
        case Fst(p):
            return f"({_term(p, scope, em)}).0"
        case Snd(p):
            return f"({_term(p, scope, em)}).1"
        case Build(n, g):
            return f"(tabulate {n} ({_term(g, scope, em)}))"
        case Get(_, arr, idx):
            ie = _term(idx, scope, em)
            if isinstance(arr, Var):
                return f"{scope[(arr.name, arr.ty)]}[{ie}]"
            tmp = em.temp("a")
            return f"(let {tmp} = {_term(arr, scope, em)} in {tmp}[{ie}])"
        case BinOp(op, a, b):
            ae, be = _term(a, scope, em), _term(b, scope, em)
            if op in _ARITH:
                return f"(({ae}) {_ARITH[op]} ({be}))"
            return f"(i64.bool (({ae}) {_CMP[op]} ({be})))"
        case FinToInt(a):
            return f"({_term(a, scope, em)})"
        case IntToReal(a):
            return f"(f64.i64 ({_term(a, scope, em)}))"
    raise ValueError(f"cannot emit {t!r}")


def emit(t: Term, opts: EmitOptions | None = None) -> str:
    """Emit a well-typed term as a Futhark-syntax program."""
    opts = opts or EmitOptions()
    typecheck(t)
    em = _Emit()
    scope: dict = {}
    params: list[str] = []

    for key in sorted(free_vars(t), key=lambda k: (k[0], str(k[1]))):
        name = em.mangle(key[0])
        scope[key] = name
        params.append(f"({name}: {futhark_type(key[1])})")

    # peel top-level lambdas into entry parameters
    body = t
    while isinstance(body, Lam):
        name = em.mangle(body.name)
        scope[(body.name, body.ty)] = name
        params.append(f"({name}: {futhark_type(body.ty)})")
        body = body.body

    result_ty = futhark_type(typecheck(body))
    text = _term(body, scope, em)

    lines = ["-- arrayad emission (f64 scalars)"]
    if opts.sizes:
        sizes = ", ".join(f"{n}={v}" for n, v in opts.sizes)
        lines.append(f"-- sizes: {sizes}")
    param_text = (" " + " ".join(params)) if params else ""
    lines.append(f"entry {opts.entry_point}{param_text}: {result_ty} =")
    lines.append(f"  {text}")
    return "\n".join(lines) + "\n"
