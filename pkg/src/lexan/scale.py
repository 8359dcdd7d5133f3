"""Elementary logarithmic scales and generalized monomials.

On ``0 < x < 1/e_r`` (``e_0 = 0``, ``e_r = exp(e_{r-1})``) the elementary
``r``-scale is ``y_0 = x``, ``y_1 = log x`` and ``y_j = log|y_{j-1}|``; its sign
vector is ``(1, -1, 1, ..., 1)``.  A generalized monomial with exponent
``q = (q_0, ..., q_r)`` is ``prod_j |y_j|**q_j``.

Exponents are exact (``Fraction``) throughout; mpmath is used only to evaluate
at points.  Evaluation works in log space since ``log|y_j| = y_{j+1}``, which
keeps deep asymptotic points (tower mode, ``x = exp(-exp(u))``) representable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

import mpmath

from .errors import (
    DomainError,
    EmptySumError,
    MismatchedScaleError,
    ValidationError,
    ZeroExponentError,
)
from .rational import RationalLike, as_fraction, format_fraction

DEFAULT_DPS = 50

__all__ = [
    "Exponent",
    "LogPoint",
    "MonomialSum",
    "LimitClass",
    "Order",
    "elementary_scale",
    "jq_sigma",
    "q_diff",
    "limit_class",
    "compare",
    "eval_monomial_log",
    "diff",
    "leading_term",
    "scale_bound",
    "tower_point_at",
    "dominance_key",
    "make_ctx",
]


def make_ctx(dps: int = DEFAULT_DPS) -> mpmath.ctx_mp.MPContext:
    """Fresh mpmath context; contexts are never shared between calls."""
    ctx = mpmath.MPContext()
    ctx.dps = dps
    return ctx


class LimitClass(enum.Enum):
    ZERO = "Zero"
    INFINITY = "Infinity"
    ONE = "One"


class Order(enum.Enum):
    SMALLER = "Smaller"
    LARGER = "Larger"
    EQUAL = "Equal"


@dataclass(frozen=True)
class Exponent:
    """Rational exponent tuple ``(q_0, ..., q_r)`` over an ``r``-scale."""

    entries: tuple[Fraction, ...]

    def __init__(self, entries: Iterable[RationalLike]):
        values = tuple(as_fraction(e) for e in entries)
        if not values:
            raise ValidationError("an exponent needs at least one entry (r >= 0)")
        object.__setattr__(self, "entries", values)

    @classmethod
    def zero(cls, r: int) -> "Exponent":
        return cls([0] * (r + 1))

    @property
    def r(self) -> int:
        return len(self.entries) - 1

    def is_zero(self) -> bool:
        return not any(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.entries)

    def __getitem__(self, j: int) -> Fraction:
        return self.entries[j]

    def _check(self, other: "Exponent") -> None:
        if len(other.entries) != len(self.entries):
            raise MismatchedScaleError(
                f"exponents over r={self.r} and r={other.r} cannot be combined"
            )

    def __add__(self, other: "Exponent") -> "Exponent":
        self._check(other)
        return Exponent(a + b for a, b in zip(self.entries, other.entries))

    def __sub__(self, other: "Exponent") -> "Exponent":
        self._check(other)
        return Exponent(a - b for a, b in zip(self.entries, other.entries))

    def __neg__(self) -> "Exponent":
        return Exponent(-a for a in self.entries)

    def scaled(self, c: RationalLike) -> "Exponent":
        c = as_fraction(c)
        return Exponent(c * a for a in self.entries)

    def __repr__(self) -> str:
        return "Exponent(" + ", ".join(format_fraction(e) for e in self.entries) + ")"

    def to_json(self) -> list[str]:
        return [format_fraction(e) for e in self.entries]

    @classmethod
    def from_json(cls, data: Sequence[RationalLike]) -> "Exponent":
        if isinstance(data, (str, bytes)) or not isinstance(data, Sequence):
            raise ValidationError("exponent must be a JSON array of rationals")
        return cls(data)


def _as_exponent(q: Union[Exponent, Iterable[RationalLike]]) -> Exponent:
    return q if isinstance(q, Exponent) else Exponent(q)


def jq_sigma(q: Union[Exponent, Iterable[RationalLike]]) -> tuple[int, int]:
    """Leading index ``j(q)`` and sign ``sigma(q)`` of a nonzero exponent."""
    q = _as_exponent(q)
    for j, value in enumerate(q.entries):
        if value != 0:
            return j, (1 if value > 0 else -1)
    raise ZeroExponentError("j(q) and sigma(q) are undefined for q = 0")


def q_diff(q: Union[Exponent, Iterable[RationalLike]]) -> Exponent:
    """Decrement entries ``0..j(q)`` by one; the exponent of the leading derivative term."""
    q = _as_exponent(q)
    j, _ = jq_sigma(q)
    return Exponent(e - 1 if i <= j else e for i, e in enumerate(q.entries))


def limit_class(q: Union[Exponent, Iterable[RationalLike]]) -> LimitClass:
    """Limit of ``|Y(x)|**q`` as ``x`` decreases to 0 on an elementary scale."""
    q = _as_exponent(q)
    if q.is_zero():
        return LimitClass.ONE
    j, sigma = jq_sigma(q)
    if (j == 0) == (sigma > 0):
        return LimitClass.ZERO
    return LimitClass.INFINITY


def compare(lam: Union[Exponent, Iterable[RationalLike]], mu: Union[Exponent, Iterable[RationalLike]]) -> Order:
    """Dominance order: ``SMALLER`` iff ``|Y|**lam = o(|Y|**mu)`` as ``x -> 0+``."""
    lam, mu = _as_exponent(lam), _as_exponent(mu)
    if lam.r != mu.r:
        raise MismatchedScaleError(f"cannot compare exponents over r={lam.r} and r={mu.r}")
    if lam == mu:
        return Order.EQUAL
    if limit_class(lam - mu) is LimitClass.ZERO:
        return Order.SMALLER
    return Order.LARGER


def dominance_key(q: Exponent) -> tuple:
    """Sort key realizing ``compare``: larger key means dominant near 0.

    Lexicographic on ``(-q_0, q_1, ..., q_r)``, which is exactly the order
    induced by the limit table applied to differences.
    """
    return (-q.entries[0],) + tuple(q.entries[1:])


def scale_bound(r: int, dps: int = DEFAULT_DPS) -> mpmath.mpf:
    """``1/e_r`` (``inf`` for ``r = 0``), the supremum of valid x."""
    ctx = make_ctx(dps)
    e = ctx.mpf(0)
    for _ in range(r):
        e = ctx.exp(e)
    return ctx.inf if e == 0 else 1 / e


@dataclass(frozen=True)
class LogPoint:
    """An evaluation point, either ``x`` directly or ``x = exp(-exp(u))``.

    ``value`` holds ``x`` (direct) or ``u`` (tower) as a Fraction, mpf, float
    or a decimal string; mpf values allow towers far beyond float range.
    A tower point with ``level = L > 2`` fixes ``y_L = u`` instead of
    ``y_2 = u``, reaching depths where even ``u`` itself is not representable.
    """

    mode: str
    value: object
    level: int = 2

    def __post_init__(self):
        if self.mode not in ("direct", "tower"):
            raise ValidationError(f"unknown point mode {self.mode!r}")
        if self.level < 2 or (self.mode == "direct" and self.level != 2):
            raise ValidationError("tower level must be >= 2 (and is only meaningful in tower mode)")

    @classmethod
    def direct(cls, x) -> "LogPoint":
        return cls("direct", x)

    @classmethod
    def tower(cls, u, level: int = 2) -> "LogPoint":
        return cls("tower", u, level)

    def to_json(self) -> dict:
        v = self.value
        if isinstance(v, Fraction):
            v = format_fraction(v)
        elif not isinstance(v, (int, float, str)):
            v = str(v)
        key = "x" if self.mode == "direct" else "u"
        out = {"mode": self.mode, key: v}
        if self.level != 2:
            out["level"] = self.level
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "LogPoint":
        mode = data.get("mode")
        key = {"direct": "x", "tower": "u"}.get(mode)
        if key is None or key not in data:
            raise ValidationError('point must be {"mode":"direct","x":...} or {"mode":"tower","u":...}')
        value = data[key]
        if isinstance(value, str):
            try:
                value = as_fraction(value)
            except ValidationError:
                pass  # decimal/exponent strings are handed to mpmath
        return cls(mode, value, int(data.get("level", 2)))

    def _to_mpf(self, ctx):
        v = self.value
        if isinstance(v, Fraction):
            return ctx.mpf(v.numerator) / v.denominator
        return ctx.mpf(v)

    def chain(self, r: int, ctx) -> "ScaleChain":
        return ScaleChain(self, r, ctx)


class ScaleChain:
    """Lazily computed ``y_1, y_2, ...`` at one point; ``log|y_j| = y_{j+1}``.

    In tower mode ``y_1 = -exp(u)`` is only formed when index 0 is actually
    needed, so points with astronomically large ``u`` stay usable for
    quantities that do not involve ``y_0``.
    """

    def __init__(self, point: LogPoint, r: int, ctx):
        if r < 0:
            raise ValidationError("scale depth r must be nonnegative")
        self.point, self.r, self.ctx = point, r, ctx
        self._y: dict[int, object] = {}
        if point.mode == "direct":
            x = point._to_mpf(ctx)
            if not x > 0:
                raise DomainError(f"x = {x} must be positive")
            self._y[0] = x
            self._y[1] = ctx.log(x)
        else:
            self._y[point.level] = point._to_mpf(ctx)
        self._validate()

    def y(self, j: int):
        if j in self._y:
            return self._y[j]
        ctx = self.ctx
        if j == 0:
            val = ctx.exp(self.y(1))
        elif j == 1:
            val = -ctx.exp(self.y(2))
        elif self.point.mode == "tower" and j < self.point.level:
            val = ctx.exp(self.y(j + 1))
        else:
            prev = self.y(j - 1)
            if prev == 0:
                raise DomainError(f"y_{j - 1} vanishes; point on the scale boundary")
            val = ctx.log(abs(prev))
        self._y[j] = val
        return val

    def log_abs(self, j: int):
        """``log|y_j|``."""
        return self.y(j + 1)

    def _validate(self) -> None:
        r = self.r
        if self.point.mode == "direct":
            if r >= 1 and not self._y[1] < 0:
                raise DomainError(f"x must be < 1/e_{r} for an elementary {r}-scale")
        # below a tower's level every y_j = exp(y_{j+1}) is positive automatically
        first = self.point.level if self.point.mode == "tower" else 2
        for j in range(first, r + 1):
            if not self.y(j) > 0:
                raise DomainError(f"point outside (0, 1/e_{r}): y_{j} = {mpmath.nstr(self.y(j), 8)} <= 0")


def tower_point_at(j: int, magnitude, dps: int = DEFAULT_DPS) -> LogPoint:
    """Tower point with ``|y_{j+1}| = magnitude``, i.e. ``log|y_j| = magnitude``.

    Useful to push the ``j``-th scale function to a prescribed depth without
    ever forming the astronomically small ``x``.
    """
    ctx = make_ctx(dps)
    if isinstance(magnitude, Fraction):
        magnitude = ctx.mpf(magnitude.numerator) / magnitude.denominator
    m = ctx.mpf(magnitude)
    if j < 0:
        raise ValidationError("index j must be nonnegative")
    if j == 0:
        return LogPoint.tower(ctx.log(m))  # |y_1| = exp(u)
    return LogPoint.tower(m, level=j + 1)


def elementary_scale(r: int, point: LogPoint, dps: int = DEFAULT_DPS) -> tuple:
    """Signed values ``(y_0, ..., y_r)`` of the elementary ``r``-scale."""
    chain = point.chain(r, make_ctx(dps))
    return tuple(chain.y(j) for j in range(r + 1))


def _log_magnitude(q: Exponent, chain: ScaleChain):
    total = chain.ctx.mpf(0)
    for j, qj in enumerate(q.entries):
        if qj:
            total += chain.ctx.mpf(qj.numerator) / qj.denominator * chain.log_abs(j)
    return total


def eval_monomial_log(q: Union[Exponent, Iterable[RationalLike]], point: LogPoint, dps: int = DEFAULT_DPS):
    """``(sum_j q_j log|y_j|, +1)``: log-magnitude and sign of ``|Y|**q``."""
    q = _as_exponent(q)
    chain = point.chain(q.r, make_ctx(dps))
    return _log_magnitude(q, chain), 1


@dataclass(frozen=True)
class MonomialSum:
    """Finite combination ``sum c * |Y|**q`` with nonzero exact coefficients."""

    r: int
    terms: Mapping[Exponent, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean: dict[Exponent, Fraction] = {}
        for q, c in self.terms.items():
            q = _as_exponent(q)
            if q.r != self.r:
                raise MismatchedScaleError(f"term {q!r} is not over r={self.r}")
            c = as_fraction(c)
            if c:
                clean[q] = clean.get(q, Fraction(0)) + c
                if not clean[q]:
                    del clean[q]
        object.__setattr__(self, "terms", clean)

    @classmethod
    def monomial(cls, q: Union[Exponent, Iterable[RationalLike]], coeff: RationalLike = 1) -> "MonomialSum":
        q = _as_exponent(q)
        return cls(q.r, {q: as_fraction(coeff)})

    def __hash__(self):
        return hash((self.r, frozenset(self.terms.items())))

    def __eq__(self, other):
        if not isinstance(other, MonomialSum):
            return NotImplemented
        return self.r == other.r and dict(self.terms) == dict(other.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def _check(self, other: "MonomialSum") -> None:
        if other.r != self.r:
            raise MismatchedScaleError(f"sums over r={self.r} and r={other.r}")

    def __add__(self, other: "MonomialSum") -> "MonomialSum":
        self._check(other)
        merged = dict(self.terms)
        for q, c in other.terms.items():
            merged[q] = merged.get(q, Fraction(0)) + c
        return MonomialSum(self.r, merged)

    def __neg__(self) -> "MonomialSum":
        return MonomialSum(self.r, {q: -c for q, c in self.terms.items()})

    def __sub__(self, other: "MonomialSum") -> "MonomialSum":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, MonomialSum):
            self._check(other)
            out: dict[Exponent, Fraction] = {}
            for q1, c1 in self.terms.items():
                for q2, c2 in other.terms.items():
                    q = q1 + q2
                    out[q] = out.get(q, Fraction(0)) + c1 * c2
            return MonomialSum(self.r, out)
        c = as_fraction(other)
        return MonomialSum(self.r, {q: c * v for q, v in self.terms.items()})

    __rmul__ = __mul__

    def diff(self) -> "MonomialSum":
        return diff(self)

    def leading_term(self) -> tuple[Fraction, Exponent]:
        return leading_term(self)

    def evaluate(self, point: LogPoint, dps: int = DEFAULT_DPS, relative_to: Optional[Exponent] = None):
        """Real value of the sum at ``point``.

        With ``relative_to=ref`` returns ``value / |Y|**ref``; only indices where
        some exponent differs from ``ref`` are touched, so a tower point with huge
        ``u`` works as long as index 0 cancels.
        """
        ctx = make_ctx(dps)
        chain = point.chain(self.r, ctx)
        total = ctx.mpf(0)
        for q, c in self.terms.items():
            shifted = q - relative_to if relative_to is not None else q
            term = ctx.exp(_log_magnitude(shifted, chain))
            total += ctx.mpf(c.numerator) / c.denominator * term
        return total

    def to_json(self) -> list[dict]:
        items = sorted(self.terms.items(), key=lambda kv: dominance_key(kv[0]), reverse=True)
        return [{"coeff": format_fraction(c), "exp": q.to_json()} for q, c in items]

    @classmethod
    def from_json(cls, data: Sequence[Mapping], r: Optional[int] = None) -> "MonomialSum":
        terms: dict[Exponent, Fraction] = {}
        for item in data:
            try:
                q = Exponent.from_json(item["exp"])
                c = as_fraction(item["coeff"])
            except (KeyError, TypeError) as exc:
                raise ValidationError('sum terms must be {"coeff": "p/q", "exp": [...]}') from exc
            if r is None:
                r = q.r
            terms[q] = terms.get(q, Fraction(0)) + c
        if r is None:
            raise ValidationError("empty sum needs an explicit r")
        return cls(r, terms)


def diff(s: MonomialSum) -> MonomialSum:
    """Exact ``d/dx`` of a monomial sum.

    ``d/dx |y_0| = 1`` and ``d/dx |y_j| = -1/(|y_0|...|y_{j-1}|)`` for ``j >= 1``,
    so ``|Y|**q`` differentiates to ``sum_j c_j |Y|**q^(j)`` with ``q^(j)`` the
    exponent decremented on ``0..j``, ``c_0 = q_0`` and ``c_j = -q_j``.
    """
    out: dict[Exponent, Fraction] = {}
    for q, coeff in s.terms.items():
        for j, qj in enumerate(q.entries):
            if not qj:
                continue
            factor = qj if j == 0 else -qj
            shifted = Exponent(e - 1 if i <= j else e for i, e in enumerate(q.entries))
            out[shifted] = out.get(shifted, Fraction(0)) + coeff * factor
    return MonomialSum(s.r, out)


def leading_term(s: MonomialSum) -> tuple[Fraction, Exponent]:
    """Coefficient and exponent of the dominance-largest term."""
    if not s.terms:
        raise EmptySumError("leading_term of an empty sum")
    q = max(s.terms, key=dominance_key)
    return s.terms[q], q
