"""Infix expression parser (precedence climbing).

Grammar, lowest to highest precedence::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := primary ('^' unary)?          # right associative
    primary := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'

Numbers may be integers or decimals (with optional exponent); they are read
exactly as rationals.  ``t``, ``q<k>``, ``v<k>`` and ``a<k>`` are reserved;
every other identifier is a parameter.  Exponents must reduce to rational
constants.
"""
from __future__ import annotations

import re
from fractions import Fraction

from ..errors import IndexOutOfRange, ParseError, UnknownFunction
from .nodes import FUNCTIONS, Num, Sym, add, func, mul, neg, pow_, sub, div

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)
_RESERVED = re.compile(r"([qva])(\d+)\Z")
_KINDS = {"q": "coord", "v": "vel", "a": "accel"}


def _tokenize(text):
    pos = 0
    tokens = []
    while True:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:]
            if not rest.strip():
                break
            offset = len(text[:pos + len(rest) - len(rest.lstrip())].encode())
            raise ParseError(f"unexpected character {rest.strip()[0]!r}", offset, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), len(text[:start].encode())))
        pos = m.end()
    tokens.append(("end", "", len(text.encode())))
    return tokens


class _Parser:
    def __init__(self, text, n):
        self.text = text
        self.n = n
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, off = self.take()
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {found}", off, self.text)

    def parse(self):
        if self.peek()[0] == "end":
            raise ParseError("empty expression", 0, self.text)
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", off, self.text)
        return e

    def expr(self):
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.term()
            left = add(left, right) if op == "+" else sub(left, right)
        return left

    def term(self):
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.unary()
            left = mul(left, right) if op == "*" else div(left, right)
        return left

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in ("-", "+"):
            self.take()
            operand = self.unary()
            return neg(operand) if val == "-" else operand
        return self.power()

    def power(self):
        base = self.primary()
        kind, val, off = self.peek()
        if kind == "op" and val == "^":
            self.take()
            exponent = self.unary()
            if not isinstance(exponent, Num):
                raise ParseError("exponent must be a rational constant", off, self.text)
            return pow_(base, exponent.value)
        return base

    def primary(self):
        kind, val, off = self.take()
        if kind == "num":
            return Num(Fraction(val))
        if kind == "ident":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if val not in FUNCTIONS:
                    raise UnknownFunction(f"unknown function {val!r}", off, self.text)
                self.take()
                arg = self.expr()
                self.expect(")")
                return func(val, arg)
            if val in FUNCTIONS:
                raise ParseError(f"function {val!r} needs an argument", off, self.text)
            return self.symbol(val, off)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {found}", off, self.text)

    def symbol(self, name, off):
        if name == "t":
            return Sym("time")
        m = _RESERVED.match(name)
        if m:
            index = int(m.group(2))
            if index < 1 or (self.n is not None and index > self.n):
                raise IndexOutOfRange(f"index of {name!r} outside 1..{self.n}", off, self.text)
            return Sym(_KINDS[m.group(1)], index)
        return Sym("param", name=name)


def parse(text: str, n: int | None = None):
    """Parse ``text`` into a normalized expression.

    ``n`` bounds coordinate indices when given.
    """
    if not isinstance(text, str):
        raise TypeError("parse() expects a string")
    return _Parser(text, n).parse()
