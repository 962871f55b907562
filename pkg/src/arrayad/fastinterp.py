"""Compiled evaluator: translates a term to Python source and runs it.

Same call-by-value semantics and operation counts as ``interp.eval_term``,
but benchmark-scale fast: loops become native Python loops and statically
countable subterms have their counter updates hoisted out of hot paths.  The
test suite cross-validates values and counters against the reference
interpreter; use this engine for large inputs, the reference one as the
oracle.

Restrictions (CompileError): environment values and the result must be
first-order (no closures cross the boundary).  Functions are fully supported
inside a program.
"""

from __future__ import annotations

from .lang import (
    App, Arrow, Array, BinOp, Build, CFin, CInt, CReal, Fin, FinToInt, Fst,
    Get, If, IFold, Int, IntToReal, Lam, Let, MkPair, Pair, Real, Snd, Term,
    Type, Var, free_vars, typecheck,
)
from .interp import (
    ArrayV, ClosureV, EvalError, FinV, IntV, OpCounter, PairV, RealV, Value,
)


class CompileError(Exception):
    pass


# counter slots: 0 realArith, 1 comparisons, 2 arrayReads, 3 allocElems, 4 loops
_ZERO = (0, 0, 0, 0, 0)


def _cadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _cscale(c, k):
    return tuple(x * k for x in c)


class _NotExpr(Exception):
    """Subterm cannot be compiled to a single statically-counted expression."""


class _Emitter:
    def __init__(self):
        self.lines: list[str] = []
        self.depth = 1
        self.serial = 0

    def fresh(self, prefix: str) -> str:
        self.serial += 1
        return f"{prefix}{self.serial}"

    def put(self, line: str) -> None:
        self.lines.append("    " * self.depth + line)

    def flush(self, counts) -> None:
        for slot, k in enumerate(counts):
            if k:
                self.put(f"_c[{slot}] += {k}")

    def source(self) -> str:
        return "def _program(_args, _c):\n" + "\n".join(self.lines) + "\n"


def _binop_expr(op: str, a: str, b: str) -> str:
    if op == "add":
        return f"({a} + {b})"
    if op == "mul":
        return f"({a} * {b})"
    if op == "sub":
        return f"({a} - {b})"
    if op == "div":
        return f"({a} / {b})"
    if op == "lt":
        return f"(1 if {a} < {b} else 0)"
    return f"(1 if {a} == {b} else 0)"


def _expr(t: Term, scope: dict, em: _Emitter) -> tuple[str, tuple]:
    """Compile to a pure expression plus its static operation counts."""
    match t:
        case Var(name, ty):
            return scope[(name, ty)], _ZERO
        case CReal(v):
            return repr(v), _ZERO
        case CInt(k):
            return repr(k), _ZERO
        case CFin(i, _):
            return repr(i), _ZERO
        case BinOp(op, a, b):
            ae, ac = _expr(a, scope, em)
            be, bc = _expr(b, scope, em)
            slot = 1 if op in ("lt", "eq") else 0
            bump = tuple(1 if s == slot else 0 for s in range(5))
            return _binop_expr(op, ae, be), _cadd(_cadd(ac, bc), bump)
        case MkPair(a, b):
            ae, ac = _expr(a, scope, em)
            be, bc = _expr(b, scope, em)
            return f"({ae}, {be})", _cadd(ac, bc)
        case Fst(p):
            pe, pc = _expr(p, scope, em)
            return f"{pe}[0]", pc
        case Snd(p):
            pe, pc = _expr(p, scope, em)
            return f"{pe}[1]", pc
        case Get(_, arr, idx):
            ae, ac = _expr(arr, scope, em)
            ie, ic = _expr(idx, scope, em)
            return f"{ae}[{ie}]", _cadd(_cadd(ac, ic), (0, 0, 1, 0, 0))
        case FinToInt(a):
            return _expr(a, scope, em)
        case IntToReal(a):
            ae, ac = _expr(a, scope, em)
            return f"float({ae})", ac
        case If(c, a, b):
            ce, cc = _expr(c, scope, em)
            ae, ac = _expr(a, scope, em)
            be, bc = _expr(b, scope, em)
            if ac != bc:
                raise _NotExpr  # branch costs differ; needs runtime counting
            return f"(({ae}) if ({ce}) != 0 else ({be}))", _cadd(cc, ac)
        case Build(n, Lam(j, jty, body)):
            loopv = em.fresh("_i")
            inner = dict(scope)
            inner[(j, jty)] = loopv
            be, bc = _expr(body, inner, em)
            counts = _cadd(_cscale(bc, n), (0, 0, 0, n, 0))
            return f"[{be} for {loopv} in range({n})]", counts
    raise _NotExpr


def _stmt(t: Term, scope: dict, em: _Emitter) -> str:
    """Compile to statements; returns the expression naming the result."""
    try:
        e, counts = _expr(t, scope, em)
    except _NotExpr:
        pass
    else:
        em.flush(counts)
        return e

    match t:
        case Lam(x, xty, body):
            fn = em.fresh("_f")
            param = em.fresh("_p")
            captured = sorted({scope[k] for k in free_vars(t) if k in scope})
            defaults = "".join(f", {name}={name}" for name in captured)
            em.put(f"def {fn}({param}{defaults}):")
            em.depth += 1
            inner = dict(scope)
            inner[(x, xty)] = param
            ret = _stmt(body, inner, em)
            em.put(f"return {ret}")
            em.depth -= 1
            return fn
        case App(f, a):
            fe = _stmt(f, scope, em)
            ae = _stmt(a, scope, em)
            tmp = em.fresh("_t")
            em.put(f"{tmp} = ({fe})({ae})")
            return tmp
        case Let(x, xty, e0, body):
            e0e = _stmt(e0, scope, em)
            v = em.fresh("_v")
            em.put(f"{v} = {e0e}")
            inner = dict(scope)
            inner[(x, xty)] = v
            return _stmt(body, inner, em)
        case If(c, a, b):
            ce = _stmt(c, scope, em)
            tmp = em.fresh("_t")
            em.put(f"if ({ce}) != 0:")
            em.depth += 1
            ae = _stmt(a, scope, em)
            em.put(f"{tmp} = {ae}")
            em.depth -= 1
            em.put("else:")
            em.depth += 1
            be = _stmt(b, scope, em)
            em.put(f"{tmp} = {be}")
            em.depth -= 1
            return tmp
        case IFold(n, step, init):
            inite = _stmt(init, scope, em)
            acc = em.fresh("_a")
            em.put(f"{acc} = {inite}")
            loopv = em.fresh("_i")
            match step:
                case Lam(a1, t1, Lam(a2, t2, body)):
                    inner = dict(scope)
                    inner[(a1, t1)] = acc
                    inner[(a2, t2)] = loopv
                    try:
                        be, bc = _expr(body, inner, em)
                    except _NotExpr:
                        em.put(f"for {loopv} in range({n}):")
                        em.depth += 1
                        be = _stmt(body, inner, em)
                        em.put(f"{acc} = {be}")
                        em.depth -= 1
                    else:
                        em.put(f"for {loopv} in range({n}):")
                        em.depth += 1
                        em.put(f"{acc} = {be}")
                        em.depth -= 1
                        em.flush(_cscale(bc, n))
                case _:
                    fe = _stmt(step, scope, em)
                    sf = em.fresh("_s")
                    em.put(f"{sf} = {fe}")
                    em.put(f"for {loopv} in range({n}):")
                    em.depth += 1
                    em.put(f"{acc} = {sf}({acc})({loopv})")
                    em.depth -= 1
            em.flush((0, 0, 0, 0, n))
            return acc
        case Build(n, gen):
            match gen:
                case Lam(j, jty, body):
                    arr = em.fresh("_r")
                    ap = em.fresh("_ap")
                    loopv = em.fresh("_i")
                    em.put(f"{arr} = []")
                    em.put(f"{ap} = {arr}.append")
                    inner = dict(scope)
                    inner[(j, jty)] = loopv
                    em.put(f"for {loopv} in range({n}):")
                    em.depth += 1
                    be = _stmt(body, inner, em)
                    em.put(f"{ap}({be})")
                    em.depth -= 1
                case _:
                    ge = _stmt(gen, scope, em)
                    gf = em.fresh("_g")
                    em.put(f"{gf} = {ge}")
                    arr = em.fresh("_r")
                    loopv = em.fresh("_i")
                    em.put(f"{arr} = [{gf}({loopv}) for {loopv} in range({n})]")
            em.flush((0, 0, 0, n, 0))
            return arr
        case Fst(p):
            pe = _stmt(p, scope, em)
            return f"({pe})[0]"
        case Snd(p):
            pe = _stmt(p, scope, em)
            return f"({pe})[1]"
        case MkPair(a, b):
            ae = _stmt(a, scope, em)
            tmp = em.fresh("_t")
            em.put(f"{tmp} = {ae}")  # pin evaluation order before b's statements
            be = _stmt(b, scope, em)
            return f"({tmp}, {be})"
        case Get(_, arr, idx):
            ae = _stmt(arr, scope, em)
            tmp = em.fresh("_t")
            em.put(f"{tmp} = {ae}")
            ie = _stmt(idx, scope, em)
            em.flush((0, 0, 1, 0, 0))
            return f"{tmp}[{ie}]"
        case BinOp(op, a, b):
            ae = _stmt(a, scope, em)
            tmp = em.fresh("_t")
            em.put(f"{tmp} = {ae}")
            be = _stmt(b, scope, em)
            slot = 1 if op in ("lt", "eq") else 0
            em.flush(tuple(1 if s == slot else 0 for s in range(5)))
            return _binop_expr(op, tmp, be)
        case FinToInt(a):
            return _stmt(a, scope, em)
        case IntToReal(a):
            ae = _stmt(a, scope, em)
            return f"float({ae})"
    raise CompileError(f"cannot compile {t!r}")


# ---------------------------------------------------------------------------
# Raw <-> tagged value conversion
# ---------------------------------------------------------------------------


def _first_order(ty: Type) -> bool:
    match ty:
        case Arrow(_, _):
            return False
        case Array(_, elem):
            return _first_order(elem)
        case Pair(left, right):
            return _first_order(left) and _first_order(right)
        case _:
            return True


def value_to_raw(v: Value):
    match v:
        case RealV(x):
            return x
        case IntV(k):
            return k
        case FinV(i, _):
            return i
        case ArrayV(items):
            return [value_to_raw(x) for x in items]
        case PairV(a, b):
            return (value_to_raw(a), value_to_raw(b))
        case ClosureV():
            raise CompileError("closure values cannot cross the compiled boundary")
    raise CompileError(f"unsupported value {v!r}")


def raw_to_value(raw, ty: Type) -> Value:
    match ty:
        case Real():
            return RealV(raw)
        case Int():
            return IntV(raw)
        case Fin(n):
            return FinV(raw, n)
        case Array(n, elem):
            assert len(raw) == n
            return ArrayV(tuple(raw_to_value(x, elem) for x in raw))
        case Pair(left, right):
            return PairV(raw_to_value(raw[0], left), raw_to_value(raw[1], right))
    raise CompileError(f"cannot rebuild value of type {ty}")


# ---------------------------------------------------------------------------
# Public entry point
# ---------------------------------------------------------------------------


class CompiledProgram:
    def __init__(self, term: Term, result_type: Type, env_keys: list, fn, source: str):
        self.term = term
        self.result_type = result_type
        self.env_keys = env_keys
        self.source = source
        self._fn = fn

    def run(self, env: dict | None = None) -> tuple[Value, OpCounter]:
        env = env or {}
        args = []
        for key in self.env_keys:
            if key not in env:
                raise EvalError(f"unbound variable {key[0]} : {key[1]}")
            args.append(value_to_raw(env[key]))
        counts = [0, 0, 0, 0, 0]
        try:
            raw = self._fn(args, counts)
        except ZeroDivisionError:
            raise EvalError("division by zero") from None
        ctr = OpCounter(*counts)
        return raw_to_value(raw, self.result_type), ctr


def compile_term(t: Term) -> CompiledProgram:
    result_type = typecheck(t)
    if not _first_order(result_type):
        raise CompileError(f"result type {result_type} is not first-order")
    env_keys = sorted(free_vars(t), key=lambda k: (k[0], str(k[1])))
    for _, ty in env_keys:
        if not _first_order(ty):
            raise CompileError(f"free variable type {ty} is not first-order")
    em = _Emitter()
    scope = {}
    for pos, key in enumerate(env_keys):
        name = em.fresh("_v")
        em.put(f"{name} = _args[{pos}]")
        scope[key] = name
    ret = _stmt(t, scope, em)
    em.put(f"return {ret}")
    source = em.source()
    namespace: dict = {}
    exec(source, namespace)
    return CompiledProgram(t, result_type, env_keys, namespace["_program"], source)


def eval_compiled(t: Term, env: dict | None = None) -> tuple[Value, OpCounter]:
    """Drop-in fast variant of ``interp.eval_term`` for first-order terms."""
    return compile_term(t).run(env)
