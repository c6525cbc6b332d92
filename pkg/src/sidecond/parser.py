"""Recursive-descent parser for polynomial expressions.

Grammar (lowest precedence first)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom ('^' exponent)?
    exponent := INT ('^' exponent)?          # right associative
    atom   := INT | IDENT | '(' expr ')'

Division is only allowed by a nonzero rational built from literals, so
``3/4*x`` and ``x/(2/3)`` are fine but ``x/y`` is not.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .polycore import Polynomial, Q, VariableContext


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^(),]))")


@dataclass
class Token:
    kind: str  # int, ident, op, end
    text: str
    col: int


def tokenize(src: str, line: int = 1, col0: int = 1) -> list:
    toks = []
    pos = 0
    n = len(src)
    while True:
        while pos < n and src[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {src[pos]!r}", line, col0 + pos)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(Token(kind, m.group(kind), col0 + start))
        pos = m.end()
    toks.append(Token("end", "", col0 + n))
    return toks


class _Parser:
    def __init__(self, src: str, ctx: VariableContext, line: int, col0: int):
        self.ctx = ctx
        self.line = line
        self.toks = tokenize(src, line, col0)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        return ParseError(msg, self.line, tok.col)

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            got = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, got {got!r}")

    # Each level returns (polynomial, is_literal).
    def expr(self):
        p, lit = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            q, qlit = self.term()
            p = p + q if op == "+" else p - q
            lit = lit and qlit
        return p, lit

    def term(self):
        p, lit = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            at = self.tok
            self.i += 1
            q, qlit = self.unary()
            if op == "*":
                p = p * q
                lit = lit and qlit
            else:
                if not qlit:
                    raise self.error("division by a non-literal", at)
                c = q.constant_value()
                if c == 0:
                    raise self.error("division by zero", at)
                p = p.scale(1 / c)
        return p, lit

    def unary(self):
        if self.accept("-"):
            p, lit = self.unary()
            return -p, lit
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        base, lit = self.atom()
        if self.accept("^"):
            e = self.exponent()
            return base ** e, lit
        return base, lit

    def exponent(self) -> int:
        tok = self.tok
        if tok.kind != "int":
            if tok.kind == "op" and tok.text in "-(":
                raise self.error("exponent must be a nonnegative integer literal")
            raise self.error("non-integer exponent" if tok.kind == "ident" else
                             f"expected exponent, got {tok.text or 'end of input'!r}")
        self.i += 1
        e = int(tok.text)
        if self.accept("^"):
            e = e ** self.exponent()
        return e

    def atom(self):
        tok = self.tok
        if tok.kind == "int":
            self.i += 1
            return self.ctx.const(int(tok.text)), True
        if tok.kind == "ident":
            self.i += 1
            if tok.text not in self.ctx.index:
                raise self.error(f"unknown identifier {tok.text!r}", tok)
            return self.ctx.var(tok.text), False
        if self.accept("("):
            p = self.expr()
            self.expect(")")
            return p
        got = tok.text or "end of input"
        raise self.error(f"unexpected {got!r}")


def parse_expression(src: str, ctx: VariableContext, line: int = 1, column: int = 1) -> Polynomial:
    """Parse ``src`` into a Polynomial over ``ctx``.

    ``line`` and ``column`` locate ``src`` inside a larger file for error
    messages.
    """
    p = _Parser(src, ctx, line, column)
    if p.tok.kind == "end":
        raise p.error("empty expression")
    poly, _ = p.expr()
    if p.tok.kind != "end":
        raise p.error(f"unexpected {p.tok.text!r}")
    return poly


def parse_tuple(src: str, ctx: VariableContext, line: int = 1, column: int = 1) -> list:
    """Parse ``(e1, e2, ...)`` into a list of polynomials."""
    p = _Parser(src, ctx, line, column)
    p.expect("(")
    out = [p.expr()[0]]
    while p.accept(","):
        out.append(p.expr()[0])
    p.expect(")")
    if p.tok.kind != "end":
        raise p.error(f"unexpected {p.tok.text!r}")
    return out


def parse_rational(text: str) -> Q:
    """A rational literal such as ``3``, ``-3/4``, ``0.25`` or ``1e-3``."""
    try:
        return Q(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad number {text!r}") from exc
