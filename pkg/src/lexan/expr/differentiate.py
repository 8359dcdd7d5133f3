"""Symbolic differentiation by the chain rule.

``d/dv exp(h) = h' * exp(h)`` reuses the existing ``exp`` node, so the
exp-nesting depth of a derivative never exceeds that of the input.
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import NonDifferentiablePrimitiveError
from .nodes import (
    ONE,
    ZERO,
    Add,
    Const,
    Exp,
    Expr,
    Inv,
    Log,
    Mul,
    Neg,
    Pow,
    Prim,
    Var,
    add,
    inv,
    mul,
    neg,
    power,
    primitive,
)


def differentiate(e: Expr, var: str) -> Expr:
    """Formal partial derivative of ``e`` with respect to ``var``."""
    cache: dict[Expr, Expr] = {}

    def d(node: Expr) -> Expr:
        if node in cache:
            return cache[node]
        out = _rule(node, var, d)
        cache[node] = out
        return out

    return d(e)


def _rule(e: Expr, var: str, d) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == var else ZERO
    if var not in e.free_vars():
        return ZERO
    if isinstance(e, Add):
        return add(d(e.left), d(e.right))
    if isinstance(e, Neg):
        return neg(d(e.arg))
    if isinstance(e, Mul):
        return add(mul(d(e.left), e.right), mul(e.left, d(e.right)))
    if isinstance(e, Inv):
        return neg(mul(d(e.arg), inv(power(e.arg, Fraction(2)))))
    if isinstance(e, Pow):
        q = e.exponent
        return mul(mul(Const(q), power(e.base, q - 1)), d(e.base))
    if isinstance(e, Log):
        return mul(d(e.arg), inv(e.arg))
    if isinstance(e, Exp):
        return mul(d(e.arg), e)
    if isinstance(e, Prim):
        prim = primitive(e.name)
        if prim.derivative is None:
            raise NonDifferentiablePrimitiveError(f"no derivative rule for {e.name!r}")
        total = ZERO
        for i, arg in enumerate(e.args):
            total = add(total, mul(d(arg), prim.derivative(e.args, i)))
        return total
    raise TypeError(f"not an expression node: {e!r}")
