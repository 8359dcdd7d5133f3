"""Exact rational parsing and formatting (``"p/q"`` strings)."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Union

from .errors import ValidationError

RationalLike = Union[int, Fraction, str]


def as_fraction(value: RationalLike) -> Fraction:
    """Coerce ``value`` to a Fraction. Floats are rejected to keep data exact."""
    if isinstance(value, bool):
        raise ValidationError(f"not a rational: {value!r}")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational: {value!r}") from exc
    raise ValidationError(f"not an exact rational: {value!r}")


def format_fraction(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rational_list(text: str) -> tuple[Fraction, ...]:
    """Parse ``"0,2,-3/2"`` into a tuple of Fractions."""
    parts = [p for p in text.replace(" ", "").split(",") if p != ""]
    if not parts:
        raise ValidationError("empty rational list")
    return tuple(as_fraction(p) for p in parts)


def fractions_to_json(values: Iterable[Fraction]) -> list[str]:
    return [format_fraction(v) for v in values]
