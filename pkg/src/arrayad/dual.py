"""Forward-mode differentiation as a dual-numbers term transformation.

Every real becomes a (primal, tangent) pair; arithmetic is rewritten to
propagate both components, and everything else keeps its shape.  On top of
the transformation sit the gradient builders: one-hot direction vectors, the
directional derivative of a loss term, and the full gradient, which runs one
directional derivative per parameter.
"""

from __future__ import annotations

from .lang import (
    REAL,
    App, Array, Arrow, BinOp, Build, CFin, CInt, CReal, Fin, FinToInt, Fst,
    Get, If, IFold, IntToReal, Lam, Let, MkPair, Pair, Snd, Term, Type, Var,
    all_names, subterms, typecheck,
)

DUAL_REAL = Pair(REAL, REAL)


def dual_type(ty: Type) -> Type:
    """real becomes real x real; other constructors transform pointwise."""
    match ty:
        case Pair(a, b):
            return Pair(dual_type(a), dual_type(b))
        case Array(n, elem):
            return Array(n, dual_type(elem))
        case Arrow(dom, cod):
            return Arrow(dual_type(dom), dual_type(cod))
        case _ if ty == REAL:
            return DUAL_REAL
        case _:
            return ty  # int and fin carry no derivative


class _Namer:
    """Deterministic fresh names for operand bindings inside one transform."""

    def __init__(self):
        self.k = 0

    def pick(self, avoid: set[str]) -> str:
        while True:
            name = f"_d{self.k}"
            self.k += 1
            if name not in avoid:
                return name


def dual_term(t: Term) -> Term:
    """Transform a well-typed term; commutes with dual_type on types."""
    return _dual(t, _Namer())


def _has_structure(t: Term) -> bool:
    # Operands holding loops, branches or allocations are let-bound rather
    # than inlined twice, so the transform never duplicates those nodes.
    return any(isinstance(s, (If, IFold, Build)) for s in subterms(t))


def _dual_arith(op: str, da: Term, db: Term, namer: _Namer) -> Term:
    binds: list[tuple[str, Term]] = []
    avoid = all_names(da) | all_names(db)

    def operand(d: Term) -> Term:
        if not _has_structure(d):
            return d
        name = namer.pick(avoid)
        avoid.add(name)
        binds.append((name, d))
        return Var(name, DUAL_REAL)

    ra = operand(da)
    rb = operand(db)
    a1, a2 = Fst(ra), Snd(ra)
    b1, b2 = Fst(rb), Snd(rb)
    if op == "add":
        core: Term = MkPair(BinOp("add", a1, b1), BinOp("add", a2, b2))
    elif op == "sub":
        core = MkPair(BinOp("sub", a1, b1), BinOp("sub", a2, b2))
    elif op == "mul":
        core = MkPair(
            BinOp("mul", a1, b1),
            BinOp("add", BinOp("mul", a1, b2), BinOp("mul", a2, b1)))
    else:  # div: quotient rule
        core = MkPair(
            BinOp("div", a1, b1),
            BinOp("div",
                  BinOp("sub", BinOp("mul", a2, b1), BinOp("mul", a1, b2)),
                  BinOp("mul", b1, b1)))
    for name, bound in reversed(binds):
        core = Let(name, DUAL_REAL, bound, core)
    return core


def _dual(t: Term, namer: _Namer) -> Term:
    match t:
        case Var(x, ty):
            return Var(x, dual_type(ty))
        case Lam(x, ty, b):
            return Lam(x, dual_type(ty), _dual(b, namer))
        case Let(x, ty, e0, b):
            return Let(x, dual_type(ty), _dual(e0, namer), _dual(b, namer))
        case App(f, a):
            return App(_dual(f, namer), _dual(a, namer))
        case If(c, a, b):
            return If(_dual(c, namer), _dual(a, namer), _dual(b, namer))
        case IFold(n, f, x):
            return IFold(n, _dual(f, namer), _dual(x, namer))
        case CReal(v):
            return MkPair(CReal(v), CReal(0.0))
        case CInt(_) | CFin(_, _):
            return t
        case MkPair(a, b):
            return MkPair(_dual(a, namer), _dual(b, namer))
        case Fst(p):
            return Fst(_dual(p, namer))
        case Snd(p):
            return Snd(_dual(p, namer))
        case Build(n, g):
            return Build(n, _dual(g, namer))
        case Get(n, arr, idx):
            return Get(n, _dual(arr, namer), _dual(idx, namer))
        case BinOp("eq", a, b):
            return BinOp("eq", _dual(a, namer), _dual(b, namer))
        case BinOp("lt", a, b):
            # comparisons discard the tangents and compare primals
            return BinOp("lt", Fst(_dual(a, namer)), Fst(_dual(b, namer)))
        case BinOp(op, a, b):
            return _dual_arith(op, _dual(a, namer), _dual(b, namer), namer)
        case FinToInt(a):
            return FinToInt(_dual(a, namer))
        case IntToReal(a):
            return MkPair(IntToReal(_dual(a, namer)), CReal(0.0))
    raise ValueError(f"cannot transform {t!r}")


# ---------------------------------------------------------------------------
# Gradient builders (host level)
# ---------------------------------------------------------------------------


def _pick_name(base: str, avoid: set[str]) -> str:
    if base not in avoid:
        return base
    k = 0
    while f"{base}{k}" in avoid:
        k += 1
    return f"{base}{k}"


def _bound_array(arr: Term, ty: Array, base: str):
    """Splice variables directly; bind anything else once via a let."""
    if isinstance(arr, Var):
        return arr, None
    name = _pick_name(base, all_names(arr))
    return Var(name, ty), (name, ty, arr)


def _wrap(binding, body: Term) -> Term:
    if binding is None:
        return body
    name, ty, bound = binding
    return Let(name, ty, bound, body)


def _expect_array(t: Term, what: str) -> Array:
    ty = typecheck(t)
    if not isinstance(ty, Array):
        raise ValueError(f"{what} must have an array type, got {ty}")
    return ty


def add_zeroes(arr: Term) -> Term:
    """Pair every element of a real array with a zero tangent."""
    ty = _expect_array(arr, "add_zeroes argument")
    if ty.elem != REAL:
        raise ValueError(f"add_zeroes expects real elements, got {ty.elem}")
    n = ty.n
    ref, binding = _bound_array(arr, ty, "_az")
    i = _pick_name("_i", all_names(arr))
    body = Lam(i, Fin(n), MkPair(Get(n, ref, Var(i, Fin(n))), CReal(0.0)))
    return _wrap(binding, Build(n, body))


def zip_arrays(v1: Term, v2: Term) -> Term:
    """Combine two equal-length arrays into one array of pairs."""
    t1 = _expect_array(v1, "zip first argument")
    t2 = _expect_array(v2, "zip second argument")
    if t1.n != t2.n:
        raise ValueError(f"zip length mismatch: {t1.n} vs {t2.n}")
    n = t1.n
    r1, b1 = _bound_array(v1, t1, "_za")
    r2, b2 = _bound_array(v2, t2, "_zb")
    avoid = all_names(v1) | all_names(v2) | {r1.name, r2.name}
    i = _pick_name("_i", avoid)
    iv = Var(i, Fin(n))
    body = Lam(i, Fin(n), MkPair(Get(n, r1, iv), Get(n, r2, iv)))
    return _wrap(b1, _wrap(b2, Build(n, body)))


def one_hot(n: int, idx: Term) -> Term:
    """The standard basis vector with a 1.0 at the given index."""
    ity = typecheck(idx)
    if ity != Fin(n):
        raise ValueError(f"one_hot index must have type (fin {n}), got {ity}")
    if isinstance(idx, (Var, CFin)):
        ref, binding = idx, None
    else:
        name = _pick_name("_oh", all_names(idx))
        ref, binding = Var(name, Fin(n)), (name, Fin(n), idx)
    j = _pick_name("_j", all_names(idx) | ({ref.name} if isinstance(ref, Var) else set()))
    guard = BinOp("eq", FinToInt(ref), FinToInt(Var(j, Fin(n))))
    body = Lam(j, Fin(n), If(guard, CReal(1.0), CReal(0.0)))
    return _wrap(binding, Build(n, body))


def _loss_shape(loss: Term) -> tuple[int, int, int]:
    ty = typecheck(loss)
    match ty:
        case Arrow(Array(a, xe), Arrow(Array(b, ye), Arrow(Array(n, pe), r))) \
                if xe == REAL and ye == REAL and pe == REAL and r == REAL:
            return a, b, n
    raise ValueError(
        f"loss must have type (-> (array a real) (-> (array b real) "
        f"(-> (array n real) real))), got {ty}")


def _check_arg(t: Term, size: int, what: str) -> None:
    ty = typecheck(t)
    if ty != Array(size, REAL):
        raise ValueError(f"{what} must have type (array {size} real), got {ty}")


def loss_diff(loss: Term, x: Term, y: Term, p: Term, pbar: Term) -> Term:
    """Directional derivative of loss at p along pbar (a term of type real).

    The loss's data arguments ride along with zero tangents; the parameters
    are zipped with the direction so each tangent seeds one input direction.
    """
    a, b, n = _loss_shape(loss)
    _check_arg(x, a, "x")
    _check_arg(y, b, "y")
    _check_arg(p, n, "p")
    _check_arg(pbar, n, "pbar")
    dloss = dual_term(loss)
    applied = App(App(App(dloss, add_zeroes(x)), add_zeroes(y)),
                  zip_arrays(p, pbar))
    return Snd(applied)


def loss_grad(loss: Term, x: Term, y: Term, p: Term) -> Term:
    """Full gradient: one directional derivative per one-hot direction.

    The resulting term runs the differentiated loss once per parameter, which
    is what the rewrite pipeline later collapses.
    """
    a, b, n = _loss_shape(loss)
    _check_arg(x, a, "x")
    _check_arg(y, b, "y")
    _check_arg(p, n, "p")
    avoid = all_names(loss) | all_names(x) | all_names(y) | all_names(p)
    i = _pick_name("_g", avoid)
    entry = loss_diff(loss, x, y, p, one_hot(n, Var(i, Fin(n))))
    return Build(n, Lam(i, Fin(n), entry))
