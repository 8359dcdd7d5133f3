"""Arbitrary-precision evaluation of expression trees."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from ..errors import DomainError, UnboundVariableError
from ..scale import make_ctx
from .nodes import Add, Const, Exp, Expr, Inv, Log, Mul, Neg, Pow, Prim, Var, primitive

DEFAULT_PRECISION = 30


def to_mpf(ctx, value):
    if isinstance(value, Fraction):
        return ctx.mpf(value.numerator) / value.denominator
    return ctx.mpf(value)


def eval_expr(e: Expr, env: Mapping[str, object], precision: int = DEFAULT_PRECISION, ctx=None):
    """Value of ``e`` under ``env`` at ``precision`` decimal digits.

    Restricted primitives vanish outside ``[-1, 1]**arity``.  Pass ``ctx`` to
    evaluate inside an existing mpmath context (its precision wins).
    """
    if ctx is None:
        ctx = make_ctx(precision)
    values = {k: to_mpf(ctx, v) for k, v in env.items()}
    return _eval(e, values, ctx)


def _eval(e: Expr, env, ctx):
    if isinstance(e, Const):
        return to_mpf(ctx, e.value)
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariableError(f"variable {e.name!r} is not bound") from None
    if isinstance(e, Add):
        return _eval(e.left, env, ctx) + _eval(e.right, env, ctx)
    if isinstance(e, Mul):
        return _eval(e.left, env, ctx) * _eval(e.right, env, ctx)
    if isinstance(e, Neg):
        return -_eval(e.arg, env, ctx)
    if isinstance(e, Inv):
        a = _eval(e.arg, env, ctx)
        if a == 0:
            raise DomainError("division by zero")
        return 1 / a
    if isinstance(e, Pow):
        return _rational_power(_eval(e.base, env, ctx), e.exponent, ctx)
    if isinstance(e, Log):
        a = _eval(e.arg, env, ctx)
        if not a > 0:
            raise DomainError(f"log of nonpositive value {ctx.nstr(a, 8)}")
        return ctx.log(a)
    if isinstance(e, Exp):
        return ctx.exp(_eval(e.arg, env, ctx))
    if isinstance(e, Prim):
        prim = primitive(e.name)
        args = [_eval(a, env, ctx) for a in e.args]
        if prim.restricted and any(abs(a) > 1 for a in args):
            return ctx.mpf(0)
        return prim.evaluate(ctx, *args)
    raise TypeError(f"not an expression node: {e!r}")


def _rational_power(base, q: Fraction, ctx):
    if base == 0:
        if q < 0:
            raise DomainError("zero raised to a negative power")
        return ctx.mpf(0)
    if q.denominator == 1:
        return base ** int(q)
    if base < 0:
        if q.denominator % 2 == 0:
            raise DomainError("even root of a negative value")
        mag = ctx.exp(ctx.log(-base) * q.numerator / q.denominator)
        return -mag if q.numerator % 2 else mag
    return ctx.exp(ctx.log(base) * q.numerator / q.denominator)
