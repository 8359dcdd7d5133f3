"""Expression tree for the log-exp-analytic DSL.

Nodes are frozen dataclasses compared structurally.  Trees are always built
through the smart constructors (``add``, ``mul``, ...), which fold constants
and collect like terms; the parser uses the same constructors, so printing a
canonical tree and parsing it back yields the identical tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional, Union

from ..errors import UnknownPrimitiveError, ValidationError
from ..rational import format_fraction


class Expr:
    """Base class; arithmetic operators route through the smart constructors."""

    __slots__ = ()

    def children(self) -> tuple["Expr", ...]:
        return ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, inv(as_expr(other)))

    def __rtruediv__(self, other):
        return mul(as_expr(other), inv(self))

    def __neg__(self):
        return neg(self)

    def __pow__(self, q):
        return power(self, Fraction(q))

    def __str__(self) -> str:
        return to_text(self)

    def walk(self) -> Iterator["Expr"]:
        yield self
        for child in self.children():
            yield from child.walk()

    def free_vars(self) -> frozenset[str]:
        return frozenset(n.name for n in self.walk() if isinstance(n, Var))


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Inv(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Pow(Expr):
    """Rational power ``base**exponent`` with an exact exponent."""

    base: Expr
    exponent: Fraction

    def children(self):
        return (self.base,)


@dataclass(frozen=True)
class Log(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Prim(Expr):
    """Call of a registered globally subanalytic primitive."""

    name: str
    args: tuple[Expr, ...]

    def children(self):
        return self.args


# -- primitive registry -----------------------------------------------------


@dataclass(frozen=True)
class Primitive:
    """A globally subanalytic function available in the DSL.

    ``restricted`` primitives evaluate to 0 outside ``[-1, 1]**arity``.
    ``derivative(args, i)`` returns the partial derivative in argument ``i``
    as an expression; ``None`` marks the primitive as not differentiable.
    """

    name: str
    arity: int
    evaluate: Callable
    restricted: bool = True
    derivative: Optional[Callable[[tuple[Expr, ...], int], Expr]] = None


PRIMITIVES: dict[str, Primitive] = {}
RESERVED = frozenset({"log", "exp"})


def register_primitive(prim: Primitive) -> None:
    if prim.name in RESERVED:
        raise ValidationError(f"{prim.name!r} is reserved")
    PRIMITIVES[prim.name] = prim


def primitive(name: str) -> Primitive:
    try:
        return PRIMITIVES[name]
    except KeyError:
        raise UnknownPrimitiveError(f"unknown primitive {name!r}") from None


register_primitive(Primitive(
    "arctan", 1, lambda ctx, a: ctx.atan(a), restricted=False,
    derivative=lambda args, i: inv(add(ONE, power(args[0], Fraction(2)))),
))
register_primitive(Primitive(
    "abs", 1, lambda ctx, a: abs(a), restricted=False,
    derivative=lambda args, i: mul(args[0], inv(Prim("abs", args))),
))
register_primitive(Primitive(
    "rsin", 1, lambda ctx, a: ctx.sin(a),
    derivative=lambda args, i: Prim("rcos", args),
))
register_primitive(Primitive(
    "rcos", 1, lambda ctx, a: ctx.cos(a),
    derivative=lambda args, i: neg(Prim("rsin", args)),
))
register_primitive(Primitive(
    "rsqrt1p", 1, lambda ctx, a: ctx.sqrt(1 + a),
    # sqrt(1+a) / (2 (1+a)) written through the primitive, so it vanishes off the box too
    derivative=lambda args, i: mul(Const(Fraction(1, 2)), mul(Prim("rsqrt1p", args), inv(add(ONE, args[0])))),
))


# -- smart constructors -----------------------------------------------------

ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def as_expr(value: Union[Expr, int, Fraction, str]) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return Var(value)
    return Const(Fraction(value))


def const(value) -> Const:
    return Const(Fraction(value))


def _split_coeff(e: Expr) -> tuple[Fraction, Expr]:
    if isinstance(e, Mul) and isinstance(e.left, Const):
        return e.left.value, e.right
    if isinstance(e, Neg):
        return Fraction(-1), e.arg
    return Fraction(1), e


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    if not isinstance(a, Const) and not isinstance(b, Const):
        ca, ra = _split_coeff(a)
        cb, rb = _split_coeff(b)
        if ra == rb:
            return mul(Const(ca + cb), ra)
    return Add(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Const) and not isinstance(a, Const):
        a, b = b, a  # constants go left
    if isinstance(a, Const):
        c = a.value
        if isinstance(b, Const):
            return Const(c * b.value)
        if c == 0:
            return ZERO
        if c == 1:
            return b
        if isinstance(b, Mul) and isinstance(b.left, Const):
            return mul(Const(c * b.left.value), b.right)
        if isinstance(b, Neg):
            return mul(Const(-c), b.arg)
        if c == -1:
            return Neg(b)
        return Mul(a, b)
    # hoist constants out of nested products: x*(c*y) -> c*(x*y)
    if isinstance(a, Mul) and isinstance(a.left, Const):
        return mul(a.left, mul(a.right, b))
    if isinstance(b, Mul) and isinstance(b.left, Const):
        return mul(b.left, mul(a, b.right))
    if isinstance(a, Neg):
        return neg(mul(a.arg, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.arg))
    return Mul(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    if isinstance(a, Mul) and isinstance(a.left, Const):
        return mul(Const(-a.left.value), a.right)
    return Neg(a)


def inv(a: Expr) -> Expr:
    if isinstance(a, Const) and a.value != 0:
        return Const(1 / a.value)
    if isinstance(a, Inv):
        return a.arg
    return Inv(a)


def power(base: Expr, q) -> Expr:
    q = Fraction(q)
    if q == 0:
        return ONE
    if q == 1:
        return base
    if isinstance(base, Const) and q.denominator == 1 and (base.value != 0 or q > 0):
        return Const(base.value ** int(q))
    return Pow(base, q)


def log(a: Expr) -> Expr:
    if a == ONE:
        return ZERO
    return Log(a)


def exp(a: Expr) -> Expr:
    if a == ZERO:
        return ONE
    return Exp(a)


def call(name: str, args: tuple[Expr, ...]) -> Expr:
    if name == "log":
        return log(*args)
    if name == "exp":
        return exp(*args)
    prim = primitive(name)
    if len(args) != prim.arity:
        raise ValidationError(f"{name} takes {prim.arity} argument(s), got {len(args)}")
    return Prim(name, tuple(args))


# -- printing ---------------------------------------------------------------
# Precedence levels; an operand is parenthesized when its level is below the
# level its position requires.

_ADD, _MUL, _UNARY, _POW, _ATOM = 1, 2, 3, 4, 5


def _fmt(e: Expr) -> tuple[str, int]:
    if isinstance(e, Var):
        return e.name, _ATOM
    if isinstance(e, Const):
        v = e.value
        if v >= 0 and v.denominator == 1:
            return str(v.numerator), _ATOM
        return format_fraction(v), 0
    if isinstance(e, Add):
        left = _wrap(e.left, _ADD)
        if isinstance(e.right, Const) and e.right.value < 0:
            return f"{left} - {format_fraction(-e.right.value)}", _ADD
        if isinstance(e.right, Neg):
            return f"{left} - {_wrap(e.right.arg, _MUL)}", _ADD
        if isinstance(e.right, Mul) and isinstance(e.right.left, Const) and e.right.left.value < 0:
            return f"{left} - {_wrap(mul(Const(-e.right.left.value), e.right.right), _MUL)}", _ADD
        return f"{left} + {_wrap(e.right, _MUL)}", _ADD
    if isinstance(e, Mul):
        left = _wrap(e.left, _MUL)
        if isinstance(e.left, Const) and isinstance(e.right, Mul):
            return f"{left}*{_fmt(e.right)[0]}", _MUL
        if isinstance(e.right, Inv):
            return f"{left}/{_wrap(e.right.arg, _POW)}", _MUL
        return f"{left}*{_wrap(e.right, _POW)}", _MUL
    if isinstance(e, Neg):
        if isinstance(e.arg, Inv):
            return f"-1/{_wrap(e.arg.arg, _POW)}", _MUL
        if isinstance(e.arg, Mul):
            return f"-{_fmt(e.arg)[0]}", _MUL
        return f"-{_wrap(e.arg, _UNARY)}", _UNARY
    if isinstance(e, Inv):
        return f"1/{_wrap(e.arg, _POW)}", _MUL
    if isinstance(e, Pow):
        q = e.exponent
        qs = str(q.numerator) if q >= 0 and q.denominator == 1 else f"({format_fraction(q)})"
        return f"{_wrap(e.base, _ATOM)}^{qs}", _POW
    if isinstance(e, Log):
        return f"log({to_text(e.arg)})", _ATOM
    if isinstance(e, Exp):
        return f"exp({to_text(e.arg)})", _ATOM
    if isinstance(e, Prim):
        return f"{e.name}({', '.join(to_text(a) for a in e.args)})", _ATOM
    raise TypeError(f"not an expression node: {e!r}")


def _wrap(e: Expr, level: int) -> str:
    text, prec = _fmt(e)
    return text if prec >= level else f"({text})"


def to_text(e: Expr) -> str:
    """Canonical infix text; ``parse(to_text(e)) == e`` for canonical trees."""
    return _fmt(e)[0]


# -- structural measures ----------------------------------------------------


def exp_depth(e: Expr) -> int:
    """Maximal nesting depth of ``exp`` nodes."""
    inner = max((exp_depth(c) for c in e.children()), default=0)
    return inner + 1 if isinstance(e, Exp) else inner


def log_depth(e: Expr) -> int:
    """Maximal nesting depth of ``log`` nodes."""
    inner = max((log_depth(c) for c in e.children()), default=0)
    return inner + 1 if isinstance(e, Log) else inner


def exp_arguments(e: Expr) -> list[Expr]:
    """Arguments of all ``exp`` nodes, outermost first, without duplicates."""
    seen: list[Expr] = []
    for node in e.walk():
        if isinstance(node, Exp) and node.arg not in seen:
            seen.append(node.arg)
    return seen
