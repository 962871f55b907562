"""Reference big-step interpreter with a primitive-operation counter.

This is the semantic oracle for the whole toolkit: call-by-value, eager
arrays, 64-bit floats.  Evaluation of a closed well-typed term can only fail
with division by zero.  The counter records how much primitive work an
evaluation performed; it is the portable stand-in for wall-clock time when
comparing optimized against unoptimized programs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .lang import (
    App, BinOp, Build, CFin, CInt, CReal, FinToInt, Fst, Get, If, IFold,
    IntToReal, Lam, Let, MkPair, Snd, Term, Type, Var, free_vars,
)


class EvalError(Exception):
    pass


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RealV:
    x: float


@dataclass(frozen=True)
class IntV:
    k: int


@dataclass(frozen=True)
class FinV:
    i: int
    n: int

    def __post_init__(self):
        if not 0 <= self.i < self.n:
            raise ValueError(f"fin value {self.i} out of bound {self.n}")


@dataclass(frozen=True)
class ArrayV:
    items: tuple


@dataclass(frozen=True)
class PairV:
    a: "Value"
    b: "Value"


@dataclass(frozen=True, eq=False)
class ClosureV:
    name: str
    ty: Type
    body: Term
    env: dict


Value = RealV | IntV | FinV | ArrayV | PairV | ClosureV


@dataclass
class OpCounter:
    """Primitive operations executed during one evaluation.

    arrayAllocElems counts the total number of elements materialized by
    builds; loopIterations counts ifold steps.  Conversions, branching and
    binding cost nothing.
    """

    real_arith: int = 0
    comparisons: int = 0
    array_reads: int = 0
    array_alloc_elems: int = 0
    loop_iterations: int = 0

    def total(self) -> int:
        return (self.real_arith + self.comparisons + self.array_reads
                + self.array_alloc_elems + self.loop_iterations)

    def as_dict(self) -> dict[str, int]:
        return {
            "realArith": self.real_arith,
            "comparisons": self.comparisons,
            "arrayReads": self.array_reads,
            "arrayAllocElems": self.array_alloc_elems,
            "loopIterations": self.loop_iterations,
        }


Env = dict  # (name, Type) -> Value


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def eval_term(t: Term, env: Env | None = None) -> tuple[Value, OpCounter]:
    """Evaluate t under env (mapping (name, type) pairs to values)."""
    ctr = OpCounter()
    return _ev(t, env or {}, ctr), ctr


def eval_closed(t: Term) -> tuple[Value, OpCounter]:
    """Evaluate a term with no free variables."""
    fv = free_vars(t)
    if fv:
        names = ", ".join(sorted(n for (n, _) in fv))
        raise EvalError(f"term has free variables: {names}")
    return eval_term(t, {})


def apply_value(f: Value, arg: Value, ctr: OpCounter | None = None) -> tuple[Value, OpCounter]:
    """Apply a closure value to an argument value."""
    ctr = ctr if ctr is not None else OpCounter()
    return _apply(f, arg, ctr), ctr


def _apply(f: Value, arg: Value, ctr: OpCounter) -> Value:
    if not isinstance(f, ClosureV):
        raise EvalError(f"cannot apply non-function value {f!r}")
    env = dict(f.env)
    env[(f.name, f.ty)] = arg
    return _ev(f.body, env, ctr)


def _ev(t: Term, env: Env, ctr: OpCounter) -> Value:
    match t:
        case Var(name, ty):
            try:
                return env[(name, ty)]
            except KeyError:
                raise EvalError(f"unbound variable {name} : {ty}") from None
        case CReal(v):
            return RealV(v)
        case CInt(k):
            return IntV(k)
        case CFin(i, n):
            return FinV(i, n)
        case Lam(name, ty, body):
            return ClosureV(name, ty, body, env)
        case App(f, a):
            fv = _ev(f, env, ctr)
            av = _ev(a, env, ctr)
            return _apply(fv, av, ctr)
        case Let(name, ty, e0, body):
            v0 = _ev(e0, env, ctr)
            inner = dict(env)
            inner[(name, ty)] = v0
            return _ev(body, inner, ctr)
        case If(c, a, b):
            cv = _ev(c, env, ctr)
            return _ev(a if cv.k != 0 else b, env, ctr)
        case IFold(n, f, x):
            fv = _ev(f, env, ctr)
            acc = _ev(x, env, ctr)
            for i in range(n):
                ctr.loop_iterations += 1
                acc = _apply(_apply(fv, acc, ctr), FinV(i, n), ctr)
            return acc
        case MkPair(a, b):
            return PairV(_ev(a, env, ctr), _ev(b, env, ctr))
        case Fst(p):
            return _ev(p, env, ctr).a
        case Snd(p):
            return _ev(p, env, ctr).b
        case Build(n, g):
            gv = _ev(g, env, ctr)
            items = tuple(_apply(gv, FinV(i, n), ctr) for i in range(n))
            ctr.array_alloc_elems += n
            return ArrayV(items)
        case Get(_, arr, idx):
            av = _ev(arr, env, ctr)
            iv = _ev(idx, env, ctr)
            ctr.array_reads += 1
            return av.items[iv.i]
        case BinOp(op, a, b):
            av = _ev(a, env, ctr)
            bv = _ev(b, env, ctr)
            if op == "eq":
                ctr.comparisons += 1
                return IntV(1 if av.k == bv.k else 0)
            if op == "lt":
                ctr.comparisons += 1
                return IntV(1 if av.x < bv.x else 0)
            ctr.real_arith += 1
            if op == "add":
                return RealV(av.x + bv.x)
            if op == "mul":
                return RealV(av.x * bv.x)
            if op == "sub":
                return RealV(av.x - bv.x)
            if bv.x == 0.0:
                raise EvalError("division by zero")
            return RealV(av.x / bv.x)
        case FinToInt(a):
            return IntV(_ev(a, env, ctr).i)
        case IntToReal(a):
            return RealV(float(_ev(a, env, ctr).k))
    raise EvalError(f"cannot evaluate {t!r}")


# ---------------------------------------------------------------------------
# Value comparison helpers
# ---------------------------------------------------------------------------


def values_equal(v1: Value, v2: Value) -> bool:
    """Exact equality (floats compared with ==, so -0.0 equals 0.0)."""
    return values_close(v1, v2, rel=0.0)


def values_close(v1: Value, v2: Value, rel: float = 1e-12) -> bool:
    """Equality up to a relative tolerance on the real leaves."""
    match v1, v2:
        case RealV(a), RealV(b):
            if a == b:
                return True
            return math.isclose(a, b, rel_tol=rel, abs_tol=rel)
        case IntV(a), IntV(b):
            return a == b
        case FinV(i1, n1), FinV(i2, n2):
            return (i1, n1) == (i2, n2)
        case ArrayV(xs), ArrayV(ys):
            return len(xs) == len(ys) and all(
                values_close(x, y, rel) for x, y in zip(xs, ys))
        case PairV(a1, b1), PairV(a2, b2):
            return values_close(a1, a2, rel) and values_close(b1, b2, rel)
    return False
