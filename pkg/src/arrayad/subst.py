"""Fresh-name generation and capture-avoiding substitution.

Rewriting threads a single non-negative counter through every operation that
may mint variable names; fresh names are ``"x" + str(counter)``.  Substitution
renames every bound variable of each substituted copy to counter-generated
names, and additionally renames binders in the target that would capture a
free variable of the replacement.  Name draws skip anything that occurs free
in the relevant scope, so user programs that already contain ``x0``-style
names cannot be captured either.
"""

from __future__ import annotations

from .lang import (
    Lam, Let, Term, Type, Var,
    all_names, children, count_free, free_vars, rebuild, replace_var,
)


def fresh_name(counter: int) -> tuple[str, int]:
    """Mint the next counter name: (``"x" + counter``, counter + 1)."""
    return f"x{counter}", counter + 1


def _fresh_avoiding(counter: int, avoid: set[str]) -> tuple[str, int]:
    name, counter = fresh_name(counter)
    while name in avoid:
        name, counter = fresh_name(counter)
    return name, counter


def fresh_term(t: Term, counter: int) -> tuple[Term, int]:
    """Alpha-rename every bound variable of t to a fresh counter name.

    Free variables are untouched.  A drawn name that happens to occur free in
    the binder's body is skipped rather than allowed to collide.
    """
    match t:
        case Var(_, _):
            return t, counter
        case Lam(y, a, b):
            b2, counter = fresh_term(b, counter)
            avoid = {n for (n, _) in free_vars(b2)} - {y}
            x, counter = _fresh_avoiding(counter, avoid)
            return Lam(x, a, replace_var(y, x, a, b2)), counter
        case Let(y, a, e0, b):
            e02, counter = fresh_term(e0, counter)
            b2, counter = fresh_term(b, counter)
            avoid = {n for (n, _) in free_vars(b2)} - {y}
            x, counter = _fresh_avoiding(counter, avoid)
            return Let(x, a, e02, replace_var(y, x, a, b2)), counter
        case _:
            kids = children(t)
            if not kids:
                return t, counter
            new = []
            for c in kids:
                c2, counter = fresh_term(c, counter)
                new.append(c2)
            return rebuild(t, tuple(new)), counter


def subst(name: str, ty: Type, replacement: Term, body: Term,
          counter: int) -> tuple[Term, int]:
    """Capture-avoiding substitution of replacement for free var(name, ty).

    Each substituted occurrence receives its own freshened copy of the
    replacement.  Binders in the body whose (name, type) collides with a free
    variable of the replacement are renamed before descending.  If the
    variable is not free in the body, the body is returned unchanged and the
    counter is not consumed.
    """
    key = (name, ty)
    rep_free = set(free_vars(replacement))
    rep_names = {n for (n, _) in rep_free}
    return _subst(key, replacement, rep_free, rep_names, body, counter)


def _subst(key, replacement, rep_free, rep_names, t: Term,
           counter: int) -> tuple[Term, int]:
    match t:
        case Var(n2, t2):
            if (n2, t2) == key:
                return fresh_term(replacement, counter)
            return t, counter
        case Lam(y, a, b):
            if (y, a) == key or not count_free(b, *key):
                return t, counter
            if (y, a) in rep_free:
                y2, counter = _fresh_avoiding(
                    counter, rep_names | all_names(b) | {key[0]})
                b = replace_var(y, y2, a, b)
                y = y2
            b2, counter = _subst(key, replacement, rep_free, rep_names, b, counter)
            return Lam(y, a, b2), counter
        case Let(y, a, e0, b):
            e02, counter = _subst(key, replacement, rep_free, rep_names, e0, counter)
            if (y, a) == key or not count_free(b, *key):
                return Let(y, a, e02, b), counter
            if (y, a) in rep_free:
                y2, counter = _fresh_avoiding(
                    counter, rep_names | all_names(b) | {key[0]})
                b = replace_var(y, y2, a, b)
                y = y2
            b2, counter = _subst(key, replacement, rep_free, rep_names, b, counter)
            return Let(y, a, e02, b2), counter
        case _:
            kids = children(t)
            if not kids:
                return t, counter
            new = []
            for c in kids:
                c2, counter = _subst(key, replacement, rep_free, rep_names, c, counter)
                new.append(c2)
            return rebuild(t, tuple(new)), counter
