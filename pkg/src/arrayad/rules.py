"""Named rewrite rules and the default optimization pipeline.

Every rule is a partial function applied at the root of a term: it returns a
rewritten term with a (possibly advanced) fresh-name counter, or None when
the root does not match.  All rules preserve the term's type and its value
under evaluation; they may change how much work evaluation performs, which
is the entire point.

The pipeline interleaves fusion (geti of build), beta and let inlining, pair
and branch simplification, and two loop-level rules: projection fission,
which splits the tangent component out of a pair-accumulator fold, and
one-hot collapse, which replaces a masked sum by its single surviving term.
Together these take the naive gradient of an array sum from quadratic to
linear cost.
"""

from __future__ import annotations

from .lang import (
    REAL,
    App, BinOp, Build, CFin, CInt, CReal, Fin, FinToInt, Fst, Get, If, IFold,
    Lam, Let, MkPair, Pair, Snd, Term, Var,
    all_names, children, count_free, free_vars, rebuild, replace_var, subterms,
)
from .strategy import (
    Normalize, Outcome, Rule, RuleFn, StrategyExpr, UnknownRuleError,
    lchoice_all,
)
from .subst import fresh_name, fresh_term, subst


class RuleRegistry:
    """Immutable-after-setup mapping from rule names to root rewrites."""

    def __init__(self):
        self._rules: dict[str, RuleFn] = {}

    def register(self, name: str, fn: RuleFn) -> None:
        if name in self._rules:
            raise ValueError(f"rule {name!r} registered twice")
        self._rules[name] = fn

    def get(self, name: str) -> RuleFn:
        try:
            return self._rules[name]
        except KeyError:
            raise UnknownRuleError(name) from None

    def names(self) -> list[str]:
        return sorted(self._rules)

    def __contains__(self, name: str) -> bool:
        return name in self._rules


# ---------------------------------------------------------------------------
# Fusion and inlining
# ---------------------------------------------------------------------------


def rule_get_build(t: Term, counter: int) -> Outcome:
    """Reading a freshly built array is just applying its generator."""
    match t:
        case Get(n, Build(m, gen), idx) if m == n:
            return App(gen, idx), counter
    return None


def rule_beta(t: Term, counter: int) -> Outcome:
    """Turn an applied lambda into a let; inlining rules decide the rest."""
    match t:
        case App(Lam(x, ty, body), arg):
            return Let(x, ty, arg, body), counter
    return None


def rule_let_subst(t: Term, counter: int) -> Outcome:
    """Inline a let unconditionally (may duplicate work)."""
    match t:
        case Let(x, ty, e0, body):
            return subst(x, ty, e0, body, counter)
    return None


def rule_let_subst_1(t: Term, counter: int) -> Outcome:
    """Inline a let whose variable occurs at most once (no duplication)."""
    match t:
        case Let(x, ty, e0, body) if count_free(body, x, ty) <= 1:
            return subst(x, ty, e0, body, counter)
    return None


def rule_let_subst_triv(t: Term, counter: int) -> Outcome:
    """Inline a let bound to a variable or literal, whatever the use count."""
    match t:
        case Let(x, ty, (Var() | CReal() | CInt() | CFin()) as e0, body):
            return subst(x, ty, e0, body, counter)
    return None


def rule_let_subst_build(t: Term, counter: int) -> Outcome:
    """Inline a let bound to a build literal so geti can fuse with it.

    Copies are syntactic; every copy that lands under a geti disappears
    again through get-build, which is how the gradient loops unblock.
    """
    match t:
        case Let(x, ty, Build() as e0, body):
            return subst(x, ty, e0, body, counter)
    return None


def rule_let_assoc(t: Term, counter: int) -> Outcome:
    """Flatten a let bound to a let: float the inner binding outward."""
    match t:
        case Let(x, xty, Let(y, yty, e1, e2), body):
            if (y, yty) in free_vars(body):
                avoid = all_names(e2) | {n for (n, _) in free_vars(body)} | {x}
                y2, counter = fresh_name(counter)
                while y2 in avoid:
                    y2, counter = fresh_name(counter)
                e2 = replace_var(y, y2, yty, e2)
                y = y2
            return Let(y, yty, e1, Let(x, xty, e2, body)), counter
    return None


def rule_fresh_term(t: Term, counter: int) -> Outcome:
    """Alpha-rename every bound variable to a fresh counter name."""
    return fresh_term(t, counter)


# ---------------------------------------------------------------------------
# Pairs
# ---------------------------------------------------------------------------


def rule_fst_pair(t: Term, counter: int) -> Outcome:
    match t:
        case Fst(MkPair(a, _)):
            return a, counter
    return None


def rule_snd_pair(t: Term, counter: int) -> Outcome:
    match t:
        case Snd(MkPair(_, b)):
            return b, counter
    return None


def rule_fst_let(t: Term, counter: int) -> Outcome:
    """Push a projection under a let so it can reach the pair inside."""
    match t:
        case Fst(Let(x, ty, e0, body)):
            return Let(x, ty, e0, Fst(body)), counter
    return None


def rule_snd_let(t: Term, counter: int) -> Outcome:
    match t:
        case Snd(Let(x, ty, e0, body)):
            return Let(x, ty, e0, Snd(body)), counter
    return None


# ---------------------------------------------------------------------------
# Arithmetic units and annihilators (literal constants only)
# ---------------------------------------------------------------------------


def rule_add_zero_l(t: Term, counter: int) -> Outcome:
    match t:
        case BinOp("add", CReal(v), e) if v == 0.0:
            return e, counter
    return None


def rule_add_zero_r(t: Term, counter: int) -> Outcome:
    match t:
        case BinOp("add", e, CReal(v)) if v == 0.0:
            return e, counter
    return None


def rule_mul_zero_l(t: Term, counter: int) -> Outcome:
    match t:
        case BinOp("mul", CReal(v) as zero, _) if v == 0.0:
            return zero, counter
    return None


def rule_mul_zero_r(t: Term, counter: int) -> Outcome:
    match t:
        case BinOp("mul", _, CReal(v) as zero) if v == 0.0:
            return zero, counter
    return None


def rule_mul_one_l(t: Term, counter: int) -> Outcome:
    match t:
        case BinOp("mul", CReal(v), e) if v == 1.0:
            return e, counter
    return None


def rule_mul_one_r(t: Term, counter: int) -> Outcome:
    match t:
        case BinOp("mul", e, CReal(v)) if v == 1.0:
            return e, counter
    return None


def _first_of(*fns: RuleFn) -> RuleFn:
    def combined(t: Term, counter: int) -> Outcome:
        for fn in fns:
            out = fn(t, counter)
            if out is not None:
                return out
        return None
    return combined


# ---------------------------------------------------------------------------
# Branch and comparison folding
# ---------------------------------------------------------------------------


def _effect_free(t: Term) -> bool:
    # Division is the only runtime effect (it can fail); everything else is
    # a pure total computation.
    return not any(isinstance(s, BinOp) and s.op == "div" for s in subterms(t))


def rule_eq_refl(t: Term, counter: int) -> Outcome:
    """Fold integer equality on literals or on syntactically equal operands."""
    match t:
        case BinOp("eq", CInt(m), CInt(k)):
            return CInt(1 if m == k else 0), counter
        case BinOp("eq", a, b) if a == b and _effect_free(a):
            return CInt(1), counter
    return None


def rule_if_const(t: Term, counter: int) -> Outcome:
    match t:
        case If(CInt(k), a, b):
            return (a if k != 0 else b), counter
    return None


# ---------------------------------------------------------------------------
# Loop-level rules
# ---------------------------------------------------------------------------


def rule_fold_onehot(t: Term, counter: int) -> Outcome:
    """Collapse a sum masked by a one-hot guard to its single live term.

    Matches an ifold accumulating add(acc, if i = j then e else 0) from 0,
    where j is the loop index and i is a free index of the same bound; the
    sum picks out exactly e[j := i].
    """
    match t:
        case IFold(n, Lam(acc, accty, Lam(j, jty, BinOp("add", lhs, rhs))),
                   CReal(z)) if z == 0.0 and jty == Fin(n) and accty == REAL:
            accvar = Var(acc, REAL)
            for accpart, guarded in ((lhs, rhs), (rhs, lhs)):
                if accpart != accvar:
                    continue
                match guarded:
                    case If(BinOp("eq", FinToInt(Var(u, uty)),
                                  FinToInt(Var(v, vty))), e, CReal(z2)) \
                            if z2 == 0.0 and uty == Fin(n) and vty == Fin(n):
                        if u == j and v != j:
                            i = v
                        elif v == j and u != j:
                            i = u
                        else:
                            continue
                        if count_free(e, acc, REAL):
                            continue
                        return subst(j, Fin(n), Var(i, Fin(n)), e, counter)
    return None


def _replace_projected_acc(t: Term, acc: str, accty, proj, new: Term) -> Term:
    """Rewrite proj(var acc) to new, stopping at binders that shadow acc."""
    if isinstance(t, proj) and t.pair == Var(acc, accty):
        return new
    match t:
        case Lam(x, ty, b):
            if (x, ty) == (acc, accty):
                return t
            return Lam(x, ty, _replace_projected_acc(b, acc, accty, proj, new))
        case Let(x, ty, e0, b):
            e0r = _replace_projected_acc(e0, acc, accty, proj, new)
            if (x, ty) == (acc, accty):
                return Let(x, ty, e0r, b)
            return Let(x, ty, e0r, _replace_projected_acc(b, acc, accty, proj, new))
        case _:
            kids = children(t)
            if not kids:
                return t
            return rebuild(t, tuple(
                _replace_projected_acc(c, acc, accty, proj, new) for c in kids))


def _fold_pair_fission(t: Term, counter: int, second: bool) -> Outcome:
    """Project one component out of a pair-accumulator fold.

    Valid when the kept component's step uses the accumulator only through
    its own projection, so its recurrence is self-contained.
    """
    proj = Snd if second else Fst
    if not isinstance(t, proj):
        return None
    match t.pair:
        case IFold(n, Lam(acc, Pair(lty, rty) as accty,
                          Lam(j, jty, MkPair(e1, e2))), MkPair(i1, i2)) \
                if jty == Fin(n):
            kept, init, kept_ty = (e2, i2, rty) if second else (e1, i1, lty)
            avoid = all_names(kept) | {j}
            name, counter = fresh_name(counter)
            while name in avoid:
                name, counter = fresh_name(counter)
            replaced = _replace_projected_acc(kept, acc, accty, proj,
                                              Var(name, kept_ty))
            if count_free(replaced, acc, accty):
                return None  # component also reads the other half; keep the pair
            return IFold(n, Lam(name, kept_ty, Lam(j, jty, replaced)), init), counter
    return None


def rule_fst_fold_pair(t: Term, counter: int) -> Outcome:
    return _fold_pair_fission(t, counter, second=False)


def rule_snd_fold_pair(t: Term, counter: int) -> Outcome:
    return _fold_pair_fission(t, counter, second=True)


# ---------------------------------------------------------------------------
# Registry and pipeline
# ---------------------------------------------------------------------------

_RULES: dict[str, RuleFn] = {
    "get-build": rule_get_build,
    "beta": rule_beta,
    "let-subst": rule_let_subst,
    "let-subst-1": rule_let_subst_1,
    "let-subst-triv": rule_let_subst_triv,
    "let-subst-build": rule_let_subst_build,
    "let-assoc": rule_let_assoc,
    "fresh-term": rule_fresh_term,
    "fst-pair": rule_fst_pair,
    "snd-pair": rule_snd_pair,
    "fst-let": rule_fst_let,
    "snd-let": rule_snd_let,
    "add-zero-l": rule_add_zero_l,
    "add-zero-r": rule_add_zero_r,
    "add-zero": _first_of(rule_add_zero_l, rule_add_zero_r),
    "mul-zero-l": rule_mul_zero_l,
    "mul-zero-r": rule_mul_zero_r,
    "mul-zero": _first_of(rule_mul_zero_l, rule_mul_zero_r),
    "mul-one-l": rule_mul_one_l,
    "mul-one-r": rule_mul_one_r,
    "mul-one": _first_of(rule_mul_one_l, rule_mul_one_r),
    "eq-refl": rule_eq_refl,
    "if-const": rule_if_const,
    "fold-onehot": rule_fold_onehot,
    "fst-fold-pair": rule_fst_fold_pair,
    "snd-fold-pair": rule_snd_fold_pair,
}

PIPELINE_RULES = (
    "get-build",
    "beta",
    "let-subst-1",
    "let-subst-triv",
    "let-subst-build",
    "let-assoc",
    "fst-let",
    "snd-let",
    "fst-pair",
    "snd-pair",
    "fst-fold-pair",
    "snd-fold-pair",
    "eq-refl",
    "if-const",
    "add-zero",
    "mul-zero",
    "mul-one",
    "fold-onehot",
)


def default_registry() -> RuleRegistry:
    reg = RuleRegistry()
    for name, fn in _RULES.items():
        reg.register(name, fn)
    return reg


def default_pipeline() -> StrategyExpr:
    """The documented optimization schedule: normalize over the fusion rules.

    Rule order is part of the contract; override it by passing any strategy
    expression of your own to the engine or the CLI.
    """
    return Normalize(lchoice_all(*(Rule(name) for name in PIPELINE_RULES)))
