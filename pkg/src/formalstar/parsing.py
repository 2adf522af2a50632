"""Recursive-descent parser for polynomials and polyvector fields.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | wedge
    wedge  := atom ('^' atom)*
    atom   := NUMBER | VARIABLE | BASIS | '(' expr ')'

``x1..xd`` (or custom names) are coordinates, ``d1..dd`` (or ``d<name>``)
the basis vector fields.  ``a ^ n`` with ``n`` an integer literal and ``a``
a function is a power; every other ``^`` is the wedge product.  Division is
only by nonzero constants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exact import Poly
from .polyvector import PolyVec, sort_sign

KINDS = {"poly": 0, "function": 0, "vector": 1, "bivector": 2}

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")


class ParseError(ValueError):
    """Syntax or semantic error at a position of the source text."""

    def __init__(self, message: str, src: str, pos: int):
        self.message, self.src, self.pos = message, src, pos
        self.line = src.count("\n", 0, pos) + 1
        self.column = pos - (src.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {self.line}, column {self.column}")

    def excerpt(self) -> str:
        line = self.src.splitlines()[self.line - 1] if self.src else ""
        return f"{line}\n{' ' * (self.column - 1)}^"


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(src: str) -> list[_Tok]:
    out, i = [], 0
    while i < len(src):
        if src[i:].strip() == "":
            break
        m = _TOKEN.match(src, i)
        if not m:
            j = i + len(src[i:]) - len(src[i:].lstrip())
            raise ParseError(f"unexpected character {src[j]!r}", src, j)
        kind = m.lastgroup
        start = m.start(kind)
        out.append(_Tok(kind, m.group(kind), start))
        i = m.end()
    out.append(_Tok("end", "", len(src)))
    return out


# exterior-algebra values: sorted index tuple -> Poly
_Ext = dict


@dataclass
class _Parser:
    src: str
    dim: int
    names: Sequence[str]
    warnings: list[str] = field(default_factory=list)
    toks: list[_Tok] = field(default_factory=list)
    i: int = 0

    def __post_init__(self):
        self.toks = _tokenize(self.src)
        self.var = {n: k for k, n in enumerate(self.names)}

    # helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, msg: str, tok: _Tok | None = None):
        raise ParseError(msg, self.src, (tok or self.tok).pos)

    def take(self, text: str | None = None) -> _Tok:
        t = self.tok
        if text is not None and t.text != text:
            self.fail(f"expected {text!r}" + (f", found {t.text!r}" if t.text else ", found end of input"))
        self.i += 1
        return t

    def const(self, c) -> _Ext:
        p = Poly.const(self.dim, c)
        return {(): p} if p else {}

    # grammar
    def parse(self) -> _Ext:
        if self.tok.kind == "end":
            self.fail("empty expression")
        v = self.expr()
        if self.tok.kind != "end":
            self.fail(f"unexpected {self.tok.text!r}")
        return v

    def expr(self) -> _Ext:
        v = self.term()
        while self.tok.text in ("+", "-"):
            op = self.take().text
            w = self.term()
            v = _add(v, w, -1 if op == "-" else 1)
        return v

    def term(self) -> _Ext:
        v = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.take()
            rhs_tok = self.tok
            w = self.unary()
            if op.text == "/":
                c = _constant(w)
                if c is None:
                    self.fail("division is only by constants", rhs_tok)
                if c == 0:
                    self.fail("division by zero", rhs_tok)
                v = _scale(v, 1 / c)
            else:
                if _arity_max(v) and _arity_max(w):
                    self.fail("use '^' for the wedge of two fields", op)
                v = _wedge(v, w)
        return v

    def unary(self) -> _Ext:
        if self.tok.text == "-":
            self.take()
            return _scale(self.unary(), -1)
        if self.tok.text == "+":
            self.take()
            return self.unary()
        return self.wedge()

    def wedge(self) -> _Ext:
        v = self.atom()
        while self.tok.text == "^":
            hat = self.take()
            if self.tok.kind == "num" and _arity_max(v) == 0:
                n = self.take()
                if "." in n.text:
                    self.fail("exponent must be a nonnegative integer", n)
                v = _power(v, int(n.text), self.dim)
                continue
            if self.tok.kind == "num":
                self.fail("cannot raise a field to a power; use '^' between basis symbols for wedge", self.tok)
            before = bool(v)
            w = self.atom()
            v = _wedge(v, w)
            if before and w and not v:
                self.warnings.append(f"wedge at column {hat.pos + 1} vanishes by alternation")
        return v

    def atom(self) -> _Ext:
        t = self.tok
        if t.kind == "num":
            self.take()
            return self.const(Fraction(t.text))
        if t.kind == "id":
            self.take()
            if t.text in self.var:
                return {(): Poly.var(self.dim, self.var[t.text])}
            k = self._basis(t.text)
            if k is not None:
                return {(k,): Poly.one(self.dim)}
            self.fail(f"unknown symbol {t.text!r}", t)
        if t.text == "(":
            self.take()
            v = self.expr()
            self.take(")")
            return v
        if t.kind == "end":
            self.fail("unexpected end of input")
        self.fail(f"unexpected {t.text!r}")

    def _basis(self, name: str) -> int | None:
        if not name.startswith("d") or len(name) < 2:
            return None
        rest = name[1:]
        if rest in self.var:
            return self.var[rest]
        if rest.isdigit() and 1 <= int(rest) <= self.dim:
            return int(rest) - 1
        return None


def _add(a: _Ext, b: _Ext, sign: int = 1) -> _Ext:
    out = dict(a)
    for k, p in b.items():
        s = out.get(k)
        s = p * sign if s is None else s + p * sign
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def _scale(a: _Ext, c) -> _Ext:
    return {k: p * Fraction(c) for k, p in a.items()} if c else {}


def _wedge(a: _Ext, b: _Ext) -> _Ext:
    out: _Ext = {}
    for ka, pa in a.items():
        for kb, pb in b.items():
            s, key = sort_sign(ka + kb)
            if s:
                out = _add(out, {key: pa * pb}, s)
    return out


def _power(a: _Ext, n: int, dim: int) -> _Ext:
    p = a.get((), Poly.zero(dim)) ** n
    return {(): p} if p else {}


def _arity_max(a: _Ext) -> int:
    return max((len(k) for k in a), default=0)


def _constant(a: _Ext) -> Fraction | None:
    if not a:
        return Fraction(0)
    if set(a) != {()} or not a[()].is_constant():
        return None
    return a[()].constant_term()


def default_names(dim: int) -> list[str]:
    return [f"x{i + 1}" for i in range(dim)]


def parse_expression(src: str, dim: int, kind: str | None = None, names: Sequence[str] | None = None,
                     warnings: list[str] | None = None) -> Poly | PolyVec:
    """Parse ``src``; ``kind`` in {poly, vector, bivector} fixes the expected arity.

    Without ``kind`` the arity is read off the expression (zero defaults to a
    function).  Warnings (vanishing wedges) are appended to ``warnings``.
    """
    if kind is not None and kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    p = _Parser(src, dim, list(names) if names is not None else default_names(dim))
    v = p.parse()
    if warnings is not None:
        warnings.extend(p.warnings)
    arities = {len(k) for k in v}
    if len(arities) > 1:
        raise ParseError(f"mixed arities {sorted(arities)} in one expression", src, 0)
    arity = arities.pop() if arities else (KINDS[kind] if kind else 0)
    if kind is not None and arity != KINDS[kind]:
        raise ParseError(f"expected a {kind} (arity {KINDS[kind]}), found arity {arity}", src, 0)
    if arity == 0 and kind in (None, "poly", "function"):
        return v.get((), Poly.zero(dim))
    return PolyVec(dim, arity, v)


def parse_poly(src: str, dim: int, names: Sequence[str] | None = None) -> Poly:
    return parse_expression(src, dim, "poly", names)


def parse_polyvector(src: str, dim: int, arity: int | None = None, names: Sequence[str] | None = None,
                     warnings: list[str] | None = None) -> PolyVec:
    """Like parse_expression but always returns a PolyVec (functions as arity 0)."""
    kind = {None: None, 0: "poly", 1: "vector", 2: "bivector"}.get(arity)
    if arity is not None and kind is None:
        # higher arities: check by hand
        v = parse_expression(src, dim, None, names, warnings)
        v = v if isinstance(v, PolyVec) else PolyVec.function(v)
        if v and v.arity != arity:
            raise ParseError(f"expected arity {arity}, found {v.arity}", src, 0)
        return v if v else PolyVec.zero(dim, arity)
    v = parse_expression(src, dim, kind, names, warnings)
    return v if isinstance(v, PolyVec) else PolyVec.function(v)
