"""Strategy language: combinators for controlled application of rewrite rules.

A strategy takes a term and a fresh-name counter and either fails or returns
a rewritten term together with a possibly advanced counter.  Rules apply at
the root only; traversals (``one``, ``topDown``) redirect strategies into
subterms, and ``normalize`` rewrites exhaustively.  A failing branch never
leaks counter increments: ``lchoice`` retries the right branch from the
original state.

``repeat`` and ``normalize`` cannot fail but may diverge; a fuel cap (default
100000 root applications) turns divergence into a ``FuelExhausted`` error,
which is distinct from strategy failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Callable, Optional

from .lang import Term, children, rebuild, typecheck
from .subst import fresh_name
from .syntax import ParseError

__all__ = [
    "Rule", "Id", "Fail", "Seq", "LChoice", "Repeat", "One", "TopDown",
    "Normalize", "StrategyExpr", "Outcome", "RuleFn",
    "StrategyEngineError", "UnknownRuleError", "FuelExhausted",
    "apply_strategy", "run", "parse_strategy", "print_strategy",
    "seq_all", "lchoice_all", "fresh_name", "DEFAULT_FUEL",
]

DEFAULT_FUEL = 100_000

Outcome = Optional[tuple[Term, int]]
RuleFn = Callable[[Term, int], Outcome]


class StrategyEngineError(Exception):
    """Engine-level failure, distinct from a strategy simply not applying."""


class UnknownRuleError(StrategyEngineError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no rule named {name!r} in the registry")


class FuelExhausted(StrategyEngineError):
    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"rewriting did not settle within {limit} applications")


# ---------------------------------------------------------------------------
# Strategy expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    name: str


@dataclass(frozen=True)
class Id:
    pass


@dataclass(frozen=True)
class Fail:
    pass


@dataclass(frozen=True)
class Seq:
    s1: "StrategyExpr"
    s2: "StrategyExpr"


@dataclass(frozen=True)
class LChoice:
    s1: "StrategyExpr"
    s2: "StrategyExpr"


@dataclass(frozen=True)
class Repeat:
    s: "StrategyExpr"


@dataclass(frozen=True)
class One:
    s: "StrategyExpr"


@dataclass(frozen=True)
class TopDown:
    s: "StrategyExpr"


@dataclass(frozen=True)
class Normalize:
    s: "StrategyExpr"


StrategyExpr = (
    Rule | Id | Fail | Seq | LChoice | Repeat | One | TopDown | Normalize
)


def seq_all(*ss: StrategyExpr) -> StrategyExpr:
    """Right-associated sequence of strategies."""
    return reduce(lambda a, b: Seq(b, a), reversed(ss))


def lchoice_all(*ss: StrategyExpr) -> StrategyExpr:
    """Right-associated left-choice chain."""
    return reduce(lambda a, b: LChoice(b, a), reversed(ss))


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


def apply_strategy(s: StrategyExpr, t: Term, state: int, registry, *,
                   fuel: int = DEFAULT_FUEL, check_types: bool = False) -> Outcome:
    """Apply s to t with the given counter; None signals failure."""
    return _apply(s, t, state, registry, fuel, check_types)


def run(s: StrategyExpr, t: Term, registry, *,
        fuel: int = DEFAULT_FUEL, check_types: bool = False) -> Term | None:
    """Apply s starting from counter 0 and discard the final counter."""
    out = _apply(s, t, 0, registry, fuel, check_types)
    return out[0] if out is not None else None


def _apply(s, t, state, registry, fuel, check):
    match s:
        case Id():
            return t, state
        case Fail():
            return None
        case Rule(name):
            fn = registry.get(name)
            out = fn(t, state)
            if out is not None and check:
                want = typecheck(t)
                got = typecheck(out[0])
                if want != got:
                    raise StrategyEngineError(
                        f"rule {name!r} changed type {want} to {got}")
            return out
        case Seq(s1, s2):
            out = _apply(s1, t, state, registry, fuel, check)
            if out is None:
                return None
            return _apply(s2, out[0], out[1], registry, fuel, check)
        case LChoice(s1, s2):
            out = _apply(s1, t, state, registry, fuel, check)
            if out is not None:
                return out
            return _apply(s2, t, state, registry, fuel, check)
        case Repeat(inner):
            return _repeat(inner, t, state, registry, fuel, check)
        case One(inner):
            return _one(inner, t, state, registry, fuel, check)
        case TopDown(inner):
            out = _apply(inner, t, state, registry, fuel, check)
            if out is not None:
                return out
            return _one(s, t, state, registry, fuel, check)
        case Normalize(inner):
            return _repeat(TopDown(inner), t, state, registry, fuel, check)
    raise StrategyEngineError(f"unknown strategy form {s!r}")


def _repeat(s, t, state, registry, fuel, check):
    steps = 0
    while True:
        out = _apply(s, t, state, registry, fuel, check)
        if out is None:
            return t, state
        steps += 1
        if steps > fuel:
            raise FuelExhausted(fuel)
        t, state = out


def _one(s, t, state, registry, fuel, check):
    kids = children(t)
    for pos, kid in enumerate(kids):
        out = _apply(s, kid, state, registry, fuel, check)
        if out is not None:
            new_kids = kids[:pos] + (out[0],) + kids[pos + 1:]
            return rebuild(t, new_kids), out[1]
    return None


# ---------------------------------------------------------------------------
# Surface syntax
# ---------------------------------------------------------------------------
#
#   strategy := seqpart ('<+' strategy)?
#   seqpart  := atom (';' seqpart)?
#   atom     := 'id' | 'fail' | comb '(' strategy ')' | '(' strategy ')' | RULE
#   comb     := 'repeat' | 'one' | 'topDown' | 'normalize'
#
# ';' binds tighter than '<+'; both associate to the right.

_COMBINATORS = {"repeat": Repeat, "one": One, "topDown": TopDown,
                "normalize": Normalize}


def _strategy_tokens(src: str) -> list[tuple[str, int]]:
    toks = []
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
        elif ch in "();":
            toks.append((ch, i))
            i += 1
        elif src.startswith("<+", i):
            toks.append(("<+", i))
            i += 2
        elif ch.isalnum() or ch in "_-":
            start = i
            while i < n and (src[i].isalnum() or src[i] in "_-"):
                i += 1
            toks.append((src[start:i], start))
        else:
            raise ParseError(f"unexpected character {ch!r} in strategy", 1, i + 1)
    return toks


class _StratParser:
    def __init__(self, src: str):
        self.toks = _strategy_tokens(src)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos][0] if self.pos < len(self.toks) else None

    def next(self, what):
        if self.pos >= len(self.toks):
            raise ParseError(f"unexpected end of strategy, expected {what}", 1, 0)
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, text):
        tok, at = self.next(repr(text))
        if tok != text:
            raise ParseError(f"expected {text!r}, found {tok!r}", 1, at + 1)

    def strategy(self) -> StrategyExpr:
        left = self.seqpart()
        if self.peek() == "<+":
            self.next("<+")
            return LChoice(left, self.strategy())
        return left

    def seqpart(self) -> StrategyExpr:
        left = self.atom()
        if self.peek() == ";":
            self.next(";")
            return Seq(left, self.seqpart())
        return left

    def atom(self) -> StrategyExpr:
        tok, at = self.next("strategy")
        if tok == "(":
            inner = self.strategy()
            self.expect(")")
            return inner
        if tok == "id":
            return Id()
        if tok == "fail":
            return Fail()
        if tok in _COMBINATORS:
            self.expect("(")
            inner = self.strategy()
            self.expect(")")
            return _COMBINATORS[tok](inner)
        if tok in ("<+", ";", ")"):
            raise ParseError(f"expected strategy, found {tok!r}", 1, at + 1)
        return Rule(tok)


def parse_strategy(src: str) -> StrategyExpr:
    p = _StratParser(src)
    s = p.strategy()
    if p.peek() is not None:
        tok, at = p.toks[p.pos]
        raise ParseError(f"trailing input {tok!r} in strategy", 1, at + 1)
    return s


def print_strategy(s: StrategyExpr) -> str:
    match s:
        case Rule(name):
            return name
        case Id():
            return "id"
        case Fail():
            return "fail"
        case Seq(a, b):
            return f"({print_strategy(a)} ; {print_strategy(b)})"
        case LChoice(a, b):
            return f"({print_strategy(a)} <+ {print_strategy(b)})"
        case Repeat(a):
            return f"repeat({print_strategy(a)})"
        case One(a):
            return f"one({print_strategy(a)})"
        case TopDown(a):
            return f"topDown({print_strategy(a)})"
        case Normalize(a):
            return f"normalize({print_strategy(a)})"
    raise ValueError(f"cannot print {s!r}")
