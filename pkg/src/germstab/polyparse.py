"""Tokenizer and recursive-descent parser for exact polynomial literals.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary ("*" unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" INT)?
    atom   := INT ("/" INT)? | NAME | "(" expr ")"

Division is only allowed between two integer literals, and juxtaposition
(``2x``, ``x y``) is a syntax error.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .jets import Jet

__all__ = ["ProblemSyntaxError", "NonRationalLiteral", "Token", "tokenize", "parse_polynomial", "parse_rational"]


class ProblemSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class NonRationalLiteral(ProblemSyntaxError):
    """A decimal or other inexact literal where an exact rational is required."""


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(r"\s*(?:(?P<float>\d*\.\d+|\d+\.\d*)|(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),\[\]=:]))")


def tokenize(text: str, line: int = 1, column: int = 1) -> list:
    """Split `text` into tokens; `column` is the 1-based column of text[0]."""
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        mt = _TOKEN_RE.match(text, pos)
        if not mt or mt.end() == pos:
            bad = len(text) - len(text[pos:].lstrip())
            raise ProblemSyntaxError(f"unexpected character {text[bad]!r}", line, column + bad)
        kind = mt.lastgroup
        start = mt.start(kind)
        out.append(Token(kind, mt.group(kind), line, column + start))
        pos = mt.end()
    out.append(Token("end", "", line, column + len(text.rstrip())))
    return out


class _Parser:
    def __init__(self, tokens, variables: Sequence[str], order: int):
        self.toks = tokens
        self.i = 0
        self.vars = {v: j for j, v in enumerate(variables)}
        self.m = len(variables)
        self.k = order

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def fail(self, msg, tok=None):
        tok = tok or self.cur
        raise ProblemSyntaxError(msg, tok.line, tok.column)

    def eat(self, text=None, kind=None) -> Token:
        t = self.cur
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text else kind
            got = "end of input" if t.kind == "end" else repr(t.text)
            self.fail(f"expected {want}, found {got}")
        self.i += 1
        return t

    def const(self, c) -> Jet:
        return Jet.constant(c, self.m, self.k)

    def expr(self) -> Jet:
        acc = self.term()
        while self.cur.text in ("+", "-"):
            op = self.eat().text
            if self.cur.kind == "end" or self.cur.text in (")", ","):
                self.fail(f"dangling operator {op!r}", self.toks[self.i - 1])
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> Jet:
        acc = self.unary()
        while self.cur.text == "*":
            op_tok = self.eat()
            if self.cur.kind == "end" or self.cur.text in (")", ","):
                self.fail("dangling operator '*'", op_tok)
            acc = acc * self.unary()
        if self.cur.kind in ("int", "name", "float") or self.cur.text == "(":
            self.fail("juxtaposition is not allowed; use '*'")
        if self.cur.text == "/":
            self.fail("division is only allowed between integer literals")
        return acc

    def unary(self) -> Jet:
        if self.cur.text in ("+", "-"):
            op = self.eat().text
            val = self.unary()
            return -val if op == "-" else val
        return self.power()

    def power(self) -> Jet:
        base = self.atom()
        if self.cur.text == "^":
            self.eat()
            e = self.eat(kind="int")
            base = base ** int(e.text)
        return base

    def atom(self) -> Jet:
        t = self.cur
        if t.kind == "int":
            self.eat()
            if self.cur.text == "/":
                self.eat()
                d = self.eat(kind="int")
                if int(d.text) == 0:
                    self.fail("division by zero", d)
                return self.const(Fraction(int(t.text), int(d.text)))
            return self.const(int(t.text))
        if t.kind == "float":
            raise NonRationalLiteral(
                f"non-rational coefficient {t.text!r}; write it as p/q", t.line, t.column
            )
        if t.kind == "name":
            self.eat()
            if t.text not in self.vars:
                self.fail(f"unknown variable {t.text!r}", t)
            return Jet.variable(self.vars[t.text], self.m, self.k)
        if t.text == "(":
            self.eat()
            val = self.expr()
            self.eat(")")
            return val
        if t.kind == "end":
            self.fail("unexpected end of expression")
        self.fail(f"unexpected {t.text!r}")


def parse_polynomial(text: str, variables: Sequence[str], order: int, line: int = 1, column: int = 1) -> Jet:
    """Parse one polynomial into a Jet of the given order.

    >>> parse_polynomial("y^3 + x*y", ["x", "y"], 3).to_str(["x", "y"])
    'x*y + y^3'
    """
    toks = tokenize(text, line, column)
    p = _Parser(toks, variables, order)
    out = p.expr()
    if p.cur.kind != "end":
        p.fail(f"unexpected {p.cur.text!r}")
    return out


def parse_rational(text: str) -> Fraction:
    mt = re.fullmatch(r"\s*([-+]?\d+)(?:\s*/\s*(\d+))?\s*", text)
    if not mt:
        raise ValueError(f"not a rational literal: {text!r}")
    den = int(mt.group(2) or 1)
    if den == 0:
        raise ValueError("zero denominator")
    return Fraction(int(mt.group(1)), den)
