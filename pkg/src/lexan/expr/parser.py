"""Recursive-descent parser for the expression DSL.

Grammar (EBNF)::

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = ("-" | "+") unary | power ;
    power    = primary [ "^" exponent ] ;
    exponent = number | "-" number | "(" ["-" | "+"] number ["/" number] ")" ;
    primary  = number | ident | ident "(" expr { "," expr } ")" | "(" expr ")" ;
    number   = digit { digit } [ "." digit { digit } ] ;
    ident    = letter { letter | digit | "_" } ;

Exponents are exact rational literals; ``x^y`` with a variable exponent must
be written ``exp(y*log(x))``.  Chained powers need parentheses: ``(x^2)^3``.
Function names are ``log``, ``exp`` and the registered primitives
(``abs``, ``arctan``, ``rsin``, ``rcos``, ``rsqrt1p`` by default).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from ..errors import ExprSyntaxError, UnknownPrimitiveError
from .nodes import PRIMITIVES, RESERVED, Const, Expr, Var, add, call, inv, mul, neg, power

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^(),]))")


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def _advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def _is(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def _expect(self, text: str) -> Token:
        if not self._is(text):
            found = self.tok.text or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, found {found!r}", self.tok.pos)
        return self._advance()

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self._is("+") or self._is("-"):
            op = self._advance().text
            rhs = self.term()
            e = add(e, rhs if op == "+" else neg(rhs))
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self._is("*") or self._is("/"):
            op = self._advance().text
            rhs = self.unary()
            e = mul(e, rhs if op == "*" else inv(rhs))
        return e

    def unary(self) -> Expr:
        if self._is("-"):
            self._advance()
            return neg(self.unary())
        if self._is("+"):
            self._advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self._is("^"):
            self._advance()
            base = power(base, self.exponent())
            if self._is("^"):
                raise ExprSyntaxError("chained powers need parentheses", self.tok.pos)
        return base

    def _number(self) -> Fraction:
        if self.tok.kind != "num":
            found = self.tok.text or "end of input"
            raise ExprSyntaxError(f"expected a number, found {found!r}", self.tok.pos)
        return Fraction(self._advance().text)

    def exponent(self) -> Fraction:
        if self._is("-"):
            self._advance()
            return -self._number()
        if self._is("("):
            self._advance()
            sign = 1
            if self._is("-") or self._is("+"):
                sign = -1 if self._advance().text == "-" else 1
            q = self._number()
            if self._is("/"):
                slash = self._advance()
                den = self._number()
                if den == 0:
                    raise ExprSyntaxError("zero denominator in exponent", slash.pos)
                q = q / den
            self._expect(")")
            return sign * q
        if self.tok.kind == "num":
            return self._number()
        found = self.tok.text or "end of input"
        raise ExprSyntaxError(f"exponent must be a rational literal, found {found!r}", self.tok.pos)

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            return Const(self._number())
        if tok.kind == "ident":
            self._advance()
            if self._is("("):
                if tok.text not in RESERVED and tok.text not in PRIMITIVES:
                    raise UnknownPrimitiveError(f"unknown function {tok.text!r} at position {tok.pos}")
                self._advance()
                args = [self.expr()]
                while self._is(","):
                    self._advance()
                    args.append(self.expr())
                self._expect(")")
                return call(tok.text, tuple(args))
            if tok.text in RESERVED or tok.text in PRIMITIVES:
                raise ExprSyntaxError(f"function {tok.text!r} needs an argument list", tok.pos)
            return Var(tok.text)
        if self._is("("):
            self._advance()
            e = self.expr()
            self._expect(")")
            return e
        found = tok.text or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", tok.pos)


def parse(text: str) -> Expr:
    """Parse DSL text into a canonical expression tree."""
    return _Parser(text).parse()
