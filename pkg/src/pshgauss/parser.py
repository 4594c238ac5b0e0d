"""Recursive-descent parser for the expression grammar::

    expr   := term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' uint)?
    atom   := number | 'i' | 'z'uint | 'conj(' expr ')' | 'exp(' expr ')'
            | 're(' expr ')' | 'im(' expr ')' | 'abs2(' expr ')' | '(' expr ')'

Two conveniences beyond the bare grammar: a number written directly before
``i`` (``2.5i``) is an imaginary literal, and a factor may carry a leading
unary minus (``-abs2(z1)``).
"""
from __future__ import annotations

import re
from typing import List, NamedTuple

from .expr import Conj, Const, DimensionError, Exp, Expr, IntPow, Prod, Sum, Var, normalize


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        super().__init__(f"{message} at position {pos}" + (f": {text!r}" if text else ""))
        self.pos = pos


class IndexOutOfRange(DimensionError):
    def __init__(self, index: int, n: int, pos: int):
        super().__init__(f"variable z{index} out of range for dimension {n} (position {pos})")
        self.index = index
        self.pos = pos


class Token(NamedTuple):
    kind: str
    text: str
    pos: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<var>z\d+)
  | (?P<func>conj|exp|re|im|abs2)\s*\(
  | (?P<imag>i)
  | (?P<op>[-+*^()])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError("unexpected character", pos, text[pos])
        kind = m.lastgroup
        if kind != "ws":
            if kind == "func":
                tokens.append(Token("func", m.group("func"), pos))
            else:
                tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def take(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> None:
        t = self.take()
        if t.text != text:
            raise ParseError(f"expected {text!r}", t.pos, t.text or "<end>")

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ParseError("unexpected token", self.tok.pos, self.tok.text)
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.tok.text in ("+", "-"):
            op = self.take().text
            t = self.term()
            terms.append(t if op == "+" else Prod((Const(-1), t)))
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> Expr:
        factors = [self.factor()]
        while self.tok.text == "*":
            self.take()
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Prod(tuple(factors))

    def factor(self) -> Expr:
        if self.tok.text == "-":
            self.take()
            return Prod((Const(-1), self.factor()))
        base = self.atom()
        if self.tok.text == "^":
            self.take()
            t = self.take()
            if t.kind != "num" or not t.text.isdigit():
                raise ParseError("exponent must be an unsigned integer", t.pos, t.text or "<end>")
            return IntPow(base, int(t.text))
        return base

    def atom(self) -> Expr:
        t = self.take()
        if t.kind == "num":
            if t.text.endswith("i"):
                return Const(complex(0.0, float(t.text[:-1])))
            return Const(float(t.text))
        if t.kind == "imag":
            return Const(1j)
        if t.kind == "var":
            j = int(t.text[1:])
            if j < 1 or j > self.n:
                raise IndexOutOfRange(j, self.n, t.pos)
            return Var(j)
        if t.kind == "func":
            inner = self.expr()
            self.expect(")")
            if t.text == "conj":
                return Conj(inner)
            if t.text == "exp":
                return Exp(inner)
            if t.text == "re":
                return Prod((Const(0.5), Sum((inner, Conj(inner)))))
            if t.text == "im":
                # (e - conj e) / (2i)
                return Prod((Const(-0.5j), Sum((inner, Prod((Const(-1), Conj(inner)))))))
            return Prod((inner, Conj(inner)))  # abs2
        if t.text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ParseError("expected an atom", t.pos, t.text or "<end>")


def parse_expr(text: str, n: int, normalized: bool = True) -> Expr:
    """Parse ``text`` over C^n; returns the normalized expression by default."""
    if n < 1:
        raise DimensionError(f"dimension must be >= 1, got {n}")
    e = _Parser(text, n).parse()
    return normalize(e) if normalized else e


def parse_point(text: str, n: int):
    """Parse a point such as ``"1+1i, -2i"`` (comma-separated coordinates)."""
    from .expr import evaluate

    parts = [p for p in text.split(",")]
    if len(parts) != n:
        raise DimensionError(f"expected {n} coordinates, got {len(parts)}")
    return [evaluate(parse_expr(p.strip(), 1), [0j]) for p in parts]
