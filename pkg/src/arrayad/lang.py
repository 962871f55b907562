"""Core language: types, terms, the type checker, and free-variable analysis.

The object language is a simply typed functional array language.  Array and
index types carry their sizes, so array reads cannot go out of bounds in a
well-typed term.  Variables are identified by name *and* type: two variable
occurrences denote the same variable exactly when both components match, so
the checker needs no context.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, fields, replace
from typing import Iterator, Union

# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Real:
    def __str__(self) -> str:
        return "real"


@dataclass(frozen=True)
class Int:
    def __str__(self) -> str:
        return "int"


@dataclass(frozen=True)
class Fin:
    """Indices 0..n-1; uninhabited bounds are rejected outright."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"fin bound must be >= 1, got {self.n}")

    def __str__(self) -> str:
        return f"(fin {self.n})"


@dataclass(frozen=True)
class Array:
    n: int
    elem: "Type"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"array size must be >= 1, got {self.n}")

    def __str__(self) -> str:
        return f"(array {self.n} {self.elem})"


@dataclass(frozen=True)
class Pair:
    left: "Type"
    right: "Type"

    def __str__(self) -> str:
        return f"(pair {self.left} {self.right})"


@dataclass(frozen=True)
class Arrow:
    dom: "Type"
    cod: "Type"

    def __str__(self) -> str:
        return f"(-> {self.dom} {self.cod})"


Type = Union[Real, Int, Fin, Array, Pair, Arrow]

REAL = Real()
INT = Int()

# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

ARITH_OPS = ("add", "mul", "sub", "div")
CMP_OPS = ("lt", "eq")
BIN_OPS = ARITH_OPS + CMP_OPS


@dataclass(frozen=True)
class Var:
    name: str
    ty: Type


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Lam:
    name: str
    ty: Type
    body: "Term"


@dataclass(frozen=True)
class Let:
    name: str
    ty: Type
    bound: "Term"
    body: "Term"


@dataclass(frozen=True)
class If:
    """Branch on an int condition: nonzero takes the first branch."""

    cond: "Term"
    then: "Term"
    orelse: "Term"


@dataclass(frozen=True)
class IFold:
    """Bounded iteration: step receives the accumulator, then the index."""

    n: int
    step: "Term"
    init: "Term"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"ifold bound must be >= 1, got {self.n}")


@dataclass(frozen=True)
class CReal:
    value: float


@dataclass(frozen=True)
class CInt:
    value: int


@dataclass(frozen=True)
class CFin:
    value: int
    bound: int

    def __post_init__(self):
        if not 0 <= self.value < self.bound:
            raise ValueError(f"fin literal {self.value} out of bound {self.bound}")


@dataclass(frozen=True)
class MkPair:
    a: "Term"
    b: "Term"


@dataclass(frozen=True)
class Fst:
    pair: "Term"


@dataclass(frozen=True)
class Snd:
    pair: "Term"


@dataclass(frozen=True)
class Build:
    n: int
    gen: "Term"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"build size must be >= 1, got {self.n}")


@dataclass(frozen=True)
class Get:
    n: int
    arr: "Term"
    idx: "Term"


@dataclass(frozen=True)
class BinOp:
    op: str
    a: "Term"
    b: "Term"

    def __post_init__(self):
        if self.op not in BIN_OPS:
            raise ValueError(f"unknown operator {self.op!r}")


@dataclass(frozen=True)
class FinToInt:
    arg: "Term"


@dataclass(frozen=True)
class IntToReal:
    arg: "Term"


Term = Union[
    Var, App, Lam, Let, If, IFold, CReal, CInt, CFin,
    MkPair, Fst, Snd, Build, Get, BinOp, FinToInt, IntToReal,
]

_LEAVES = (Var, CReal, CInt, CFin)


def children(t: Term) -> tuple[Term, ...]:
    """Immediate subterms, in declaration order (binders scope the last one)."""
    match t:
        case App(f, a):
            return (f, a)
        case Lam(_, _, b):
            return (b,)
        case Let(_, _, e0, b):
            return (e0, b)
        case If(c, a, b):
            return (c, a, b)
        case IFold(_, f, x):
            return (f, x)
        case MkPair(a, b):
            return (a, b)
        case Fst(p) | Snd(p):
            return (p,)
        case Build(_, g):
            return (g,)
        case Get(_, arr, i):
            return (arr, i)
        case BinOp(_, a, b):
            return (a, b)
        case FinToInt(a) | IntToReal(a):
            return (a,)
        case _:
            return ()


def rebuild(t: Term, kids: tuple[Term, ...]) -> Term:
    """Reassemble a node with new children (same shape as ``children``)."""
    names = [f.name for f in fields(t) if f.name in _CHILD_FIELDS[type(t)]]
    assert len(names) == len(kids)
    return replace(t, **dict(zip(names, kids)))


_CHILD_FIELDS = {
    Var: (), CReal: (), CInt: (), CFin: (),
    App: ("fn", "arg"),
    Lam: ("body",),
    Let: ("bound", "body"),
    If: ("cond", "then", "orelse"),
    IFold: ("step", "init"),
    MkPair: ("a", "b"),
    Fst: ("pair",),
    Snd: ("pair",),
    Build: ("gen",),
    Get: ("arr", "idx"),
    BinOp: ("a", "b"),
    FinToInt: ("arg",),
    IntToReal: ("arg",),
}


def subterms(t: Term) -> Iterator[Term]:
    """All nodes of t, preorder."""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


# ---------------------------------------------------------------------------
# Type checking
# ---------------------------------------------------------------------------


class TypeCheckError(Exception):
    """A typing violation, located by the child-index path from the root."""

    def __init__(self, kind: str, path: tuple[int, ...], message: str,
                 expected: Type | None = None, actual: Type | None = None):
        self.kind = kind
        self.path = path
        self.expected = expected
        self.actual = actual
        super().__init__(f"{kind} at path {list(path)}: {message}")


def typecheck(t: Term) -> Type:
    """Return the unique type of t, or raise TypeCheckError.

    Violations are reported leftmost-innermost: children are checked before
    the node that combines them.
    """
    return _check(t, ())


def _mismatch(path, msg, expected=None, actual=None):
    return TypeCheckError("mismatch", path, msg, expected, actual)


def _check(t: Term, path: tuple[int, ...]) -> Type:
    match t:
        case Var(_, ty):
            return ty
        case CReal(_):
            return REAL
        case CInt(_):
            return INT
        case CFin(_, bound):
            return Fin(bound)
        case App(f, a):
            fty = _check(f, path + (0,))
            aty = _check(a, path + (1,))
            if not isinstance(fty, Arrow):
                raise _mismatch(path, f"applied term has type {fty}, not a function",
                                actual=fty)
            if fty.dom != aty:
                raise _mismatch(path, f"argument type {aty} does not match domain {fty.dom}",
                                expected=fty.dom, actual=aty)
            return fty.cod
        case Lam(_, ty, b):
            return Arrow(ty, _check(b, path + (0,)))
        case Let(_, ty, e0, b):
            bty = _check(e0, path + (0,))
            if bty != ty:
                raise _mismatch(path, f"let binds {ty} but bound term has type {bty}",
                                expected=ty, actual=bty)
            return _check(b, path + (1,))
        case If(c, a, b):
            cty = _check(c, path + (0,))
            aty = _check(a, path + (1,))
            bty = _check(b, path + (2,))
            if cty != INT:
                raise _mismatch(path, f"condition has type {cty}, expected int",
                                expected=INT, actual=cty)
            if aty != bty:
                raise _mismatch(path, f"branches disagree: {aty} vs {bty}",
                                expected=aty, actual=bty)
            return aty
        case IFold(n, f, x):
            fty = _check(f, path + (0,))
            xty = _check(x, path + (1,))
            want = Arrow(xty, Arrow(Fin(n), xty))
            if fty != want:
                raise _mismatch(path, f"ifold step has type {fty}, expected {want}",
                                expected=want, actual=fty)
            return xty
        case MkPair(a, b):
            return Pair(_check(a, path + (0,)), _check(b, path + (1,)))
        case Fst(p):
            pty = _check(p, path + (0,))
            if not isinstance(pty, Pair):
                raise _mismatch(path, f"fst of non-pair type {pty}", actual=pty)
            return pty.left
        case Snd(p):
            pty = _check(p, path + (0,))
            if not isinstance(pty, Pair):
                raise _mismatch(path, f"snd of non-pair type {pty}", actual=pty)
            return pty.right
        case Build(n, g):
            gty = _check(g, path + (0,))
            if not isinstance(gty, Arrow) or gty.dom != Fin(n):
                raise _mismatch(path, f"build generator has type {gty}, expected (-> (fin {n}) _)",
                                actual=gty)
            return Array(n, gty.cod)
        case Get(n, arr, idx):
            aty = _check(arr, path + (0,))
            ity = _check(idx, path + (1,))
            if not isinstance(aty, Array) or aty.n != n:
                raise _mismatch(path, f"geti expects (array {n} _), got {aty}", actual=aty)
            if ity != Fin(n):
                raise _mismatch(path, f"index type {ity} does not match array size {n}",
                                expected=Fin(n), actual=ity)
            return aty.elem
        case BinOp(op, a, b):
            aty = _check(a, path + (0,))
            bty = _check(b, path + (1,))
            operand = INT if op == "eq" else REAL
            if aty != operand or bty != operand:
                raise _mismatch(path, f"{op} expects two {operand} operands, got {aty}, {bty}",
                                expected=operand,
                                actual=aty if aty != operand else bty)
            return INT if op in CMP_OPS else REAL
        case FinToInt(a):
            aty = _check(a, path + (0,))
            if not isinstance(aty, Fin):
                raise _mismatch(path, f"fin2int of non-index type {aty}", actual=aty)
            return INT
        case IntToReal(a):
            aty = _check(a, path + (0,))
            if aty != INT:
                raise _mismatch(path, f"int2real of non-int type {aty}",
                                expected=INT, actual=aty)
            return REAL
    raise _mismatch(path, f"unrecognized term {t!r}")


# ---------------------------------------------------------------------------
# Variables
# ---------------------------------------------------------------------------

VarKey = tuple[str, Type]


def free_vars(t: Term) -> Counter:
    """Multiset of free (name, type) occurrences."""
    acc: Counter = Counter()
    _free(t, acc)
    return acc


def _free(t: Term, acc: Counter) -> None:
    match t:
        case Var(name, ty):
            acc[(name, ty)] += 1
        case Lam(name, ty, b):
            inner: Counter = Counter()
            _free(b, inner)
            inner.pop((name, ty), None)
            acc.update(inner)
        case Let(name, ty, e0, b):
            _free(e0, acc)
            inner = Counter()
            _free(b, inner)
            inner.pop((name, ty), None)
            acc.update(inner)
        case _:
            for c in children(t):
                _free(c, acc)


def count_free(t: Term, name: str, ty: Type) -> int:
    return free_vars(t)[(name, ty)]


def all_names(t: Term) -> set[str]:
    """Every variable name occurring in t, bound or free, binder or use."""
    names: set[str] = set()
    for node in subterms(t):
        match node:
            case Var(name, _) | Lam(name, _, _) | Let(name, _, _, _):
                names.add(name)
    return names


def replace_var(old: str, new: str, ty: Type, t: Term) -> Term:
    """Rename free occurrences of var(old, ty) to var(new, ty).

    Stops at binders that rebind exactly (old, ty); performs no
    capture-avoidance of its own (callers supply fresh names).
    """
    match t:
        case Var(name, vty):
            return Var(new, ty) if (name, vty) == (old, ty) else t
        case Lam(name, bty, b):
            if (name, bty) == (old, ty):
                return t
            return Lam(name, bty, replace_var(old, new, ty, b))
        case Let(name, bty, e0, b):
            e0r = replace_var(old, new, ty, e0)
            if (name, bty) == (old, ty):
                return Let(name, bty, e0r, b)
            return Let(name, bty, e0r, replace_var(old, new, ty, b))
        case _:
            kids = children(t)
            if not kids:
                return t
            return rebuild(t, tuple(replace_var(old, new, ty, c) for c in kids))
