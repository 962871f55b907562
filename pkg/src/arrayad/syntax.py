"""Textual surface syntax: a parenthesized prefix form for terms and types.

Grammar (terms)::

    (lam <name> <type> <term>)        (let <name> <type> <term> <term>)
    (app <term> <term>)               (if <term> <term> <term>)
    (ifold <n> <term> <term>)         (build <n> <term>)
    (geti <n> <term> <term>)          (pair <term> <term>)
    (fst <term>)  (snd <term>)        (add|mul|sub|div|lt|eq <term> <term>)
    (const <real>)  (int <integer>)   (fin <i> <n>)
    (fin2int <term>)  (int2real <term>)
    (var <name> <type>)

Types: ``real``, ``int``, ``(fin n)``, ``(array n <type>)``,
``(pair <type> <type>)``, ``(-> <type> <type>)``.

``parse_term(print_term(t))`` returns a term structurally equal to ``t``.
"""

from __future__ import annotations

from .lang import (
    BIN_OPS, INT, REAL,
    App, Array, Arrow, BinOp, Build, CFin, CInt, CReal, Fin, FinToInt, Fst,
    Get, If, IFold, IntToReal, Lam, Let, MkPair, Pair, Snd, Term, Type, Var,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"{message} (line {line}, col {col})")


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------


class _Token:
    __slots__ = ("text", "line", "col")

    def __init__(self, text: str, line: int, col: int):
        self.text = text
        self.line = line
        self.col = col


def _tokenize(src: str) -> list[_Token]:
    toks: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch.isspace():
            col += 1
            i += 1
        elif ch in "()":
            toks.append(_Token(ch, line, col))
            col += 1
            i += 1
        else:
            start, start_col = i, col
            while i < n and not src[i].isspace() and src[i] not in "()":
                i += 1
                col += 1
            toks.append(_Token(src[start:i], line, start_col))
    return toks


class _Reader:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.pos = 0
        self.src = src

    def peek(self) -> _Token | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self, what: str = "token") -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.toks[-1] if self.toks else None
            line = last.line if last else 1
            col = last.col + len(last.text) if last else 1
            raise ParseError(f"unexpected end of input, expected {what}", line, col)
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next(repr(text))
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)


def _atom(r: _Reader, what: str) -> _Token:
    tok = r.next(what)
    if tok.text in "()":
        raise ParseError(f"expected {what}, found {tok.text!r}", tok.line, tok.col)
    return tok


def _int_atom(r: _Reader, what: str) -> tuple[int, _Token]:
    tok = _atom(r, what)
    try:
        return int(tok.text), tok
    except ValueError:
        raise ParseError(f"expected integer {what}, found {tok.text!r}",
                         tok.line, tok.col) from None


def _name_atom(r: _Reader) -> str:
    tok = _atom(r, "name")
    if tok.text[0].isdigit():
        raise ParseError(f"invalid name {tok.text!r}", tok.line, tok.col)
    return tok.text


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


def _parse_type(r: _Reader) -> Type:
    tok = r.next("type")
    if tok.text == "real":
        return REAL
    if tok.text == "int":
        return INT
    if tok.text != "(":
        raise ParseError(f"expected type, found {tok.text!r}", tok.line, tok.col)
    head = _atom(r, "type constructor")
    try:
        if head.text == "fin":
            n, ntok = _int_atom(r, "bound")
            ty: Type = Fin(n)
        elif head.text == "array":
            n, ntok = _int_atom(r, "size")
            ty = Array(n, _parse_type(r))
        elif head.text == "pair":
            ty = Pair(_parse_type(r), _parse_type(r))
        elif head.text == "->":
            ty = Arrow(_parse_type(r), _parse_type(r))
        else:
            raise ParseError(f"unknown type constructor {head.text!r}", head.line, head.col)
    except ValueError as exc:  # bad size bound
        raise ParseError(str(exc), ntok.line, ntok.col) from None
    r.expect(")")
    return ty


def parse_type(src: str) -> Type:
    r = _Reader(src)
    ty = _parse_type(r)
    r.done()
    return ty


def print_type(ty: Type) -> str:
    return str(ty)


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


def _parse_term(r: _Reader) -> Term:
    tok = r.next("term")
    if tok.text != "(":
        raise ParseError(f"expected term, found {tok.text!r}", tok.line, tok.col)
    head = _atom(r, "term constructor")
    t = _parse_form(r, head)
    r.expect(")")
    return t


def _parse_form(r: _Reader, head: _Token) -> Term:
    kw = head.text
    if kw == "lam":
        name = _name_atom(r)
        return Lam(name, _parse_type(r), _parse_term(r))
    if kw == "let":
        name = _name_atom(r)
        return Let(name, _parse_type(r), _parse_term(r), _parse_term(r))
    if kw == "app":
        return App(_parse_term(r), _parse_term(r))
    if kw == "if":
        return If(_parse_term(r), _parse_term(r), _parse_term(r))
    if kw == "ifold":
        n, ntok = _int_atom(r, "bound")
        step = _parse_term(r)
        init = _parse_term(r)
        try:
            return IFold(n, step, init)
        except ValueError as exc:
            raise ParseError(str(exc), ntok.line, ntok.col) from None
    if kw == "build":
        n, ntok = _int_atom(r, "size")
        gen = _parse_term(r)
        try:
            return Build(n, gen)
        except ValueError as exc:
            raise ParseError(str(exc), ntok.line, ntok.col) from None
    if kw == "geti":
        n, ntok = _int_atom(r, "size")
        if n < 1:
            raise ParseError(f"geti size must be >= 1, got {n}", ntok.line, ntok.col)
        return Get(n, _parse_term(r), _parse_term(r))
    if kw == "pair":
        return MkPair(_parse_term(r), _parse_term(r))
    if kw == "fst":
        return Fst(_parse_term(r))
    if kw == "snd":
        return Snd(_parse_term(r))
    if kw in BIN_OPS:
        return BinOp(kw, _parse_term(r), _parse_term(r))
    if kw == "const":
        tok = _atom(r, "real literal")
        try:
            return CReal(float(tok.text))
        except ValueError:
            raise ParseError(f"bad real literal {tok.text!r}", tok.line, tok.col) from None
    if kw == "int":
        k, _ = _int_atom(r, "integer literal")
        return CInt(k)
    if kw == "fin":
        i, itok = _int_atom(r, "index")
        n, _ = _int_atom(r, "bound")
        try:
            return CFin(i, n)
        except ValueError as exc:
            raise ParseError(str(exc), itok.line, itok.col) from None
    if kw == "fin2int":
        return FinToInt(_parse_term(r))
    if kw == "int2real":
        return IntToReal(_parse_term(r))
    if kw == "var":
        name = _name_atom(r)
        return Var(name, _parse_type(r))
    raise ParseError(f"unknown term constructor {kw!r}", head.line, head.col)


def parse_term(src: str) -> Term:
    r = _Reader(src)
    t = _parse_term(r)
    r.done()
    return t


def print_term(t: Term) -> str:
    match t:
        case Var(name, ty):
            return f"(var {name} {ty})"
        case App(f, a):
            return f"(app {print_term(f)} {print_term(a)})"
        case Lam(name, ty, b):
            return f"(lam {name} {ty} {print_term(b)})"
        case Let(name, ty, e0, b):
            return f"(let {name} {ty} {print_term(e0)} {print_term(b)})"
        case If(c, a, b):
            return f"(if {print_term(c)} {print_term(a)} {print_term(b)})"
        case IFold(n, f, x):
            return f"(ifold {n} {print_term(f)} {print_term(x)})"
        case CReal(v):
            return f"(const {v!r})"
        case CInt(k):
            return f"(int {k})"
        case CFin(i, n):
            return f"(fin {i} {n})"
        case MkPair(a, b):
            return f"(pair {print_term(a)} {print_term(b)})"
        case Fst(p):
            return f"(fst {print_term(p)})"
        case Snd(p):
            return f"(snd {print_term(p)})"
        case Build(n, g):
            return f"(build {n} {print_term(g)})"
        case Get(n, arr, i):
            return f"(geti {n} {print_term(arr)} {print_term(i)})"
        case BinOp(op, a, b):
            return f"({op} {print_term(a)} {print_term(b)})"
        case FinToInt(a):
            return f"(fin2int {print_term(a)})"
        case IntToReal(a):
            return f"(int2real {print_term(a)})"
    raise ValueError(f"cannot print {t!r}")
