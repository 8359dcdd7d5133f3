"""Log-analytically prepared forms ``f(t, x) = a(t) |Y(x)|**q v(phi(t, x))``.

``phi_j = b_j(t) |Y(x)|**p_j`` must stay in ``[-1, 1]`` and the unit ``v`` is a
polynomial, positive on ``[-1, 1]**s``.  Coefficient and base functions are
DSL expressions in the parameters ``t1, t2, ...`` (a scalar ``t`` binds both
``t`` and ``t1``).

The analytic split sorts the support of ``v`` by the exponent
``lam(alpha) = q + sum_i alpha_i p_i``: multi-indices with ``lam`` in
``N_0 x {0}^r`` contribute the power series part ``sum_k d_k(t) x**k``, all
others the singular part ``sum_lam e_lam(t) |Y|**lam``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

import mpmath

from .errors import (
    CertificateError,
    EvaluationError,
    InsufficientOrderError,
    LexanError,
    RangeError,
    ValidationError,
)
from .expr import Expr, eval_expr, parse, to_text
from .expr.nodes import ZERO, add, const, mul, power
from .rational import as_fraction, format_fraction
from .scale import (
    DEFAULT_DPS,
    Exponent,
    LimitClass,
    LogPoint,
    _log_magnitude,
    dominance_key,
    limit_class,
    make_ctx,
    scale_bound,
)

MultiIndex = tuple[int, ...]


def t_env(t) -> dict[str, object]:
    """Variable bindings for a parameter point."""
    if t is None:
        return {}
    if isinstance(t, Mapping):
        return dict(t)
    if isinstance(t, (list, tuple)):
        return {f"t{i + 1}": v for i, v in enumerate(t)}
    return {"t": t, "t1": t}


def _mpf(ctx, v: Fraction):
    return ctx.mpf(v.numerator) / v.denominator


def _abs_sum(coeffs: Mapping[MultiIndex, Fraction], skip_zero: bool) -> Fraction:
    return sum((abs(c) for a, c in coeffs.items() if not (skip_zero and not any(a))), Fraction(0))


# -- unit series ------------------------------------------------------------


@dataclass(frozen=True)
class UnitSeries:
    """Polynomial unit ``v = sum_alpha c_alpha X**alpha`` in ``s`` variables.

    Positivity on ``[-1, 1]**s`` is certified either by diagonal dominance
    (``c_0 > sum_{alpha != 0} |c_alpha|``) or, for truncated exponentials built
    by :func:`exp_of_bounded`, by ``exp_floor``: an exact lower bound of the
    truncated exponential series on the certified range of its argument.
    """

    s: int
    coeffs: Mapping[MultiIndex, Fraction]
    L: Optional[Fraction] = None
    exp_floor: Optional[Fraction] = None
    tail_bound: Optional[float] = None

    def __post_init__(self):
        if self.s < 1:
            raise ValidationError("unit arity s must be positive")
        clean: dict[MultiIndex, Fraction] = {}
        for alpha, c in self.coeffs.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.s or any(a < 0 for a in alpha):
                raise ValidationError(f"multi-index {alpha} is not in N_0^{self.s}")
            c = as_fraction(c)
            if c:
                clean[alpha] = clean.get(alpha, Fraction(0)) + c
        object.__setattr__(self, "coeffs", {a: c for a, c in clean.items() if c})
        total = _abs_sum(self.coeffs, skip_zero=False)
        if self.L is None:
            object.__setattr__(self, "L", Fraction(math.floor(total) + 1))
        else:
            object.__setattr__(self, "L", as_fraction(self.L))
        if not self.L > total:
            raise CertificateError(f"L = {self.L} must exceed sum |c_alpha| = {total}")
        if self.certified_lower_bound() <= 0:
            raise CertificateError("unit positivity on [-1,1]^s is not certified")

    def constant(self) -> Fraction:
        return self.coeffs.get((0,) * self.s, Fraction(0))

    def dominance_margin(self) -> Fraction:
        """``c_0 - sum_{alpha != 0} |c_alpha|``."""
        return self.constant() - _abs_sum(self.coeffs, skip_zero=True)

    def certified_lower_bound(self) -> Fraction:
        margin = self.dominance_margin()
        if self.exp_floor is not None:
            return max(margin, self.exp_floor)
        return margin

    def __call__(self, *phi, ctx=None):
        ctx = ctx or make_ctx(DEFAULT_DPS)
        total = ctx.mpf(0)
        for alpha, c in self.coeffs.items():
            term = _mpf(ctx, c)
            for x, a in zip(phi, alpha):
                if a:
                    term *= x ** a
            total += term
        return total

    def to_json(self) -> dict:
        out = {
            "coeffs": [{"alpha": list(a), "c": format_fraction(c)} for a, c in sorted(self.coeffs.items())],
            "L": format_fraction(self.L),
        }
        if self.exp_floor is not None:
            out["exp_floor"] = format_fraction(self.exp_floor)
        if self.tail_bound is not None:
            out["tail_bound"] = self.tail_bound
        return out

    @classmethod
    def from_json(cls, data: Mapping, s: Optional[int] = None) -> "UnitSeries":
        coeffs: dict[MultiIndex, Fraction] = {}
        for item in data.get("coeffs", []):
            alpha = tuple(int(a) for a in item["alpha"])
            coeffs[alpha] = coeffs.get(alpha, Fraction(0)) + as_fraction(item["c"])
        if s is None:
            if not coeffs:
                raise ValidationError("cannot infer unit arity from an empty coefficient list")
            s = len(next(iter(coeffs)))
        floor = data.get("exp_floor")
        return cls(s, coeffs, data.get("L"), as_fraction(floor) if floor is not None else None,
                   data.get("tail_bound"))


# -- prepared tuple ---------------------------------------------------------


def _as_expr(e: Union[Expr, str, int, Fraction]) -> Expr:
    if isinstance(e, Expr):
        return e
    if isinstance(e, str):
        return parse(e)
    return const(e)


@dataclass(frozen=True)
class PreparedTuple:
    """The data ``(r, Y, a, q, s, v, b, P)``; ``Y`` is the elementary ``r``-scale."""

    r: int
    q: Exponent
    a: Expr
    v: UnitSeries
    b: tuple[Expr, ...]
    P: tuple[Exponent, ...]

    def __init__(self, r: int, q, a, v: UnitSeries, b: Sequence, P: Sequence):
        q = q if isinstance(q, Exponent) else Exponent(q)
        rows = tuple(p if isinstance(p, Exponent) else Exponent(p) for p in P)
        bases = tuple(_as_expr(e) for e in b)
        if q.r != r or any(p.r != r for p in rows):
            raise ValidationError(f"q and every row of P need r + 1 = {r + 1} entries")
        if not (len(rows) == len(bases) == v.s):
            raise ValidationError(f"P has {len(rows)} rows and b has {len(bases)} entries; unit arity is {v.s}")
        a = _as_expr(a)
        for name, e in [("a", a)] + [(f"b_{j}", e) for j, e in enumerate(bases, start=1)]:
            if "x" in e.free_vars():
                raise ValidationError(f"{name} must depend on the parameters only, not on x")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "b", bases)
        object.__setattr__(self, "P", rows)

    @property
    def s(self) -> int:
        return self.v.s

    def exponent_of(self, alpha: MultiIndex) -> Exponent:
        """``tP alpha + q``."""
        lam = self.q
        for a, p in zip(alpha, self.P):
            if a:
                lam = lam + p.scaled(a)
        return lam

    def to_json(self) -> dict:
        return {
            "schema": "prepared-tuple/v1",
            "r": self.r,
            "q": self.q.to_json(),
            "a": to_text(self.a),
            "s": self.s,
            "v": self.v.to_json(),
            "b": [to_text(e) for e in self.b],
            "P": [p.to_json() for p in self.P],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "PreparedTuple":
        try:
            r = int(data["r"])
            s = int(data.get("s", len(data["b"])))
            v = UnitSeries.from_json(data["v"], s)
            return cls(r, Exponent.from_json(data["q"]), data["a"], v, data["b"], data["P"])
        except KeyError as exc:
            raise ValidationError(f"prepared tuple is missing field {exc.args[0]!r}") from None


def _eval_t(e: Expr, t, ctx, what: str):
    try:
        return eval_expr(e, t_env(t), ctx=ctx)
    except LexanError as exc:
        raise EvaluationError(f"{what} is undefined at t={t}: {exc}") from exc


def eval_prepared(f: PreparedTuple, t, point: LogPoint, dps: int = DEFAULT_DPS):
    """``a(t) |Y|**q v(phi_1, ..., phi_s)`` at ``(t, point)``."""
    ctx = make_ctx(dps)
    chain = point.chain(f.r, ctx)
    a = _eval_t(f.a, t, ctx, "coefficient a")
    phis = []
    slack = ctx.mpf(10) ** (5 - dps)
    for j, (bj, pj) in enumerate(zip(f.b, f.P), start=1):
        b = _eval_t(bj, t, ctx, f"base function b_{j}")
        phi = b * ctx.exp(_log_magnitude(pj, chain)) if b != 0 else ctx.mpf(0)
        if abs(phi) > 1 + slack:
            raise RangeError(f"|phi_{j}| = {ctx.nstr(abs(phi), 8)} > 1 at this point")
        phis.append(phi)
    if a == 0:
        return ctx.mpf(0)
    return a * ctx.exp(_log_magnitude(f.q, chain)) * f.v(*phis, ctx=ctx)


# -- analytic split ---------------------------------------------------------


def _in_gamma1(lam: Exponent) -> bool:
    head = lam.entries[0]
    return head >= 0 and head.denominator == 1 and not any(lam.entries[1:])


@dataclass(frozen=True)
class AnalyticSplit:
    """Power-series coefficients ``d_k`` and singular coefficients ``e_lam``.

    ``gamma1`` maps ``k`` to ``d_k``; ``gamma2`` maps each ``lam`` outside
    ``N_0 x {0}^r`` to ``e_lam``; both are expressions in ``t``.
    """

    r: int
    gamma1: Mapping[int, Expr] = field(default_factory=dict)
    gamma2: Mapping[Exponent, Expr] = field(default_factory=dict)

    def taylor_coefficients(self, t, dps: int = DEFAULT_DPS) -> dict[int, object]:
        ctx = make_ctx(dps)
        return {k: _eval_t(d, t, ctx, f"d_{k}") for k, d in sorted(self.gamma1.items())}

    def singular_coefficients(self, t, dps: int = DEFAULT_DPS) -> dict[Exponent, object]:
        ctx = make_ctx(dps)
        return {lam: _eval_t(e, t, ctx, f"e_{lam!r}") for lam, e in self.gamma2.items()}

    def active_exponents(self, t, dps: int = DEFAULT_DPS, zero_tol=None) -> list[Exponent]:
        """``Lambda_t``: exponents whose coefficient does not vanish at ``t``."""
        tol = mpmath.mpf(10) ** (10 - dps) if zero_tol is None else zero_tol
        return [lam for lam, e in self.singular_coefficients(t, dps).items() if abs(e) > tol]

    def mu(self, t, dps: int = DEFAULT_DPS) -> Optional[Exponent]:
        """Dominance-largest active exponent at ``t`` (``None`` if there is none)."""
        active = self.active_exponents(t, dps)
        return max(active, key=dominance_key) if active else None

    def reconstruct(self, t, point: LogPoint, dps: int = DEFAULT_DPS):
        """``sum_k d_k x**k + sum_lam e_lam |Y|**lam`` at ``(t, point)``."""
        ctx = make_ctx(dps)
        chain = point.chain(self.r, ctx)
        total = ctx.mpf(0)
        for k, d in self.gamma1.items():
            total += _eval_t(d, t, ctx, f"d_{k}") * ctx.exp(k * chain.log_abs(0))
        for lam, e in self.gamma2.items():
            total += _eval_t(e, t, ctx, "e_lambda") * ctx.exp(_log_magnitude(lam, chain))
        return total

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "gamma1": {str(k): to_text(d) for k, d in sorted(self.gamma1.items())},
            "gamma2": [{"lambda": lam.to_json(), "e": to_text(e)}
                       for lam, e in sorted(self.gamma2.items(), key=lambda kv: dominance_key(kv[0]), reverse=True)],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "AnalyticSplit":
        return cls(
            int(data["r"]),
            {int(k): parse(d) for k, d in data.get("gamma1", {}).items()},
            {Exponent.from_json(item["lambda"]): parse(item["e"]) for item in data.get("gamma2", [])},
        )


def analytic_split(f: PreparedTuple) -> AnalyticSplit:
    """Split the support of ``v`` into the analytic and singular parts."""
    groups1: dict[int, list[MultiIndex]] = {}
    groups2: dict[Exponent, list[MultiIndex]] = {}
    for alpha in sorted(f.v.coeffs):
        lam = f.exponent_of(alpha)
        if _in_gamma1(lam):
            groups1.setdefault(int(lam.entries[0]), []).append(alpha)
        else:
            groups2.setdefault(lam, []).append(alpha)

    def coefficient(alphas: list[MultiIndex]) -> Expr:
        total = ZERO
        for alpha in alphas:
            term: Expr = const(f.v.coeffs[alpha])
            for bi, ai in zip(f.b, alpha):
                if ai:
                    term = mul(term, power(bi, ai))
            total = add(total, term)
        return mul(f.a, total)

    return AnalyticSplit(
        f.r,
        {k: coefficient(al) for k, al in sorted(groups1.items())},
        {lam: coefficient(al) for lam, al in groups2.items()},
    )


def smoothness_ceiling(split: AnalyticSplit, t, dps: int = DEFAULT_DPS) -> Union[int, float]:
    """Upper bound on ``M`` such that ``f(t, .)`` can be ``C^M`` at 0.

    ``math.inf`` when the singular part vanishes at ``t`` (then ``f(t, .)`` is
    real analytic at 0); otherwise ``max(0, floor(mu_0))`` for the dominant
    active exponent ``mu``.
    """
    mu = split.mu(t, dps)
    if mu is None:
        return math.inf
    return max(0, math.floor(mu.entries[0]))


# -- flatness and quasianalyticity ------------------------------------------


def flatness_threshold(f: PreparedTuple) -> int:
    """Smallest positive integer ``N > q_0``."""
    return max(1, math.floor(f.q.entries[0]) + 1)


class QuasiVerdict(enum.Enum):
    MUST_VANISH = "MustVanish"
    NO_CONCLUSION = "NoConclusion"


@dataclass(frozen=True)
class QuasiReport:
    verdict: QuasiVerdict
    N: int
    a_value: object

    @property
    def consistent(self) -> bool:
        """A ``MustVanish`` verdict is consistent only if ``a(t) = 0``."""
        return self.verdict is QuasiVerdict.NO_CONCLUSION or self.a_value == 0

    def to_json(self) -> dict:
        return {"verdict": self.verdict.value, "N": self.N,
                "a": mpmath.nstr(self.a_value, 15), "consistent": self.consistent}


def quasianalytic_check(
    f: PreparedTuple,
    t,
    derivatives: Sequence[Optional[object]],
    tol: float = 1e-12,
    dps: int = DEFAULT_DPS,
) -> QuasiReport:
    """Decide whether ``N``-flatness at 0 forces ``f(t, .)`` to vanish.

    ``derivatives[k]`` is the ``k``-th derivative of ``f(t, .)`` at 0, or
    ``None`` when it does not exist.  ``N``-flat means orders ``0..N`` vanish.
    """
    n = flatness_threshold(f)
    for value in derivatives[: n + 1]:
        if value is None or not mpmath.isfinite(value) or abs(value) > tol:
            break
    else:
        if len(derivatives) < n + 1:
            raise InsufficientOrderError(f"need derivatives of order 0..{n}, got {len(derivatives)}")
        ctx = make_ctx(dps)
        return QuasiReport(QuasiVerdict.MUST_VANISH, n, _eval_t(f.a, t, ctx, "coefficient a"))
    ctx = make_ctx(dps)
    return QuasiReport(QuasiVerdict.NO_CONCLUSION, n, _eval_t(f.a, t, ctx, "coefficient a"))


# -- bounded exponentials ---------------------------------------------------


@dataclass(frozen=True)
class BoundedArgument:
    """Polynomial ``g(X_1, ..., X_s)`` with the exact certificate ``sum |g_alpha| <= 1``.

    On ``[-1, 1]**s`` this bounds ``|g|`` by ``bound()``.
    """

    s: int
    coeffs: Mapping[MultiIndex, Fraction]

    def bound(self) -> Fraction:
        return _abs_sum({a: as_fraction(c) for a, c in self.coeffs.items()}, skip_zero=False)


def _poly_mul(p: Mapping[MultiIndex, Fraction], q: Mapping[MultiIndex, Fraction]) -> dict[MultiIndex, Fraction]:
    out: dict[MultiIndex, Fraction] = {}
    for a1, c1 in p.items():
        for a2, c2 in q.items():
            a = tuple(x + y for x, y in zip(a1, a2))
            out[a] = out.get(a, Fraction(0)) + c1 * c2
    return {a: c for a, c in out.items() if c}


def exp_of_bounded(g: BoundedArgument, truncation_order: int) -> UnitSeries:
    """Degree-``T`` truncation ``sum_{n <= T} g**n / n!`` as a certified unit.

    The truncation error is at most ``e/(T+1)!`` on ``[-1, 1]**s``.  Positivity
    is certified exactly by ``min_{|y| <= B} sum_{n<=T} y**n/n!`` where ``B`` is
    the certified bound of ``g``.
    """
    if not isinstance(g, BoundedArgument):
        raise CertificateError("exp_of_bounded needs a BoundedArgument with a boundedness certificate")
    T = int(truncation_order)
    if T < 0:
        raise ValidationError("truncation order must be nonnegative")
    B = g.bound()
    if B > 1:
        raise CertificateError(f"certificate fails: sum |g_alpha| = {B} > 1")
    gc = {tuple(a): as_fraction(c) for a, c in g.coeffs.items() if as_fraction(c)}
    zero = (0,) * g.s
    total: dict[MultiIndex, Fraction] = {zero: Fraction(1)}
    term: dict[MultiIndex, Fraction] = {zero: Fraction(1)}
    for n in range(1, T + 1):
        term = {a: c / n for a, c in _poly_mul(term, gc).items()}
        for a, c in term.items():
            total[a] = total.get(a, Fraction(0)) + c
    floor = _truncated_exp_floor(T, B)
    if floor <= 0:
        raise CertificateError(f"truncation order {T} cannot certify positivity for |g| <= {B}")
    tail = float(mpmath.e / mpmath.factorial(T + 1))
    return UnitSeries(g.s, total, exp_floor=floor, tail_bound=tail)


def _truncated_exp_floor(T: int, B: Fraction) -> Fraction:
    """Exact lower bound of ``min_{|y| <= B} sum_{n<=T} y**n/n!`` for ``0 <= B <= 1``.

    ``T_T' = T_{T-1}``.  For odd ``T`` the derivative is an even truncation,
    positive everywhere, so the minimum is ``T_T(-B)``.  For even ``T`` the
    only critical point ``y*`` is the real root of the odd ``T_{T-1}``, and
    ``y* <= -1`` because ``T_{T-1}(-1) >= 0``; the minimum is ``T_T(-B)`` when
    ``y* < -B`` and ``y***T/T! >= 1/T!`` otherwise.
    """
    def series(y: Fraction, order: int) -> Fraction:
        acc, term = Fraction(1), Fraction(1)
        for n in range(1, order + 1):
            term = term * y / n
            acc += term
        return acc

    if T == 0:
        return Fraction(1)
    if T % 2 == 1 or series(-B, T - 1) > 0:
        return series(-B, T)
    return Fraction(1, math.factorial(T))


# -- domain shrinking -------------------------------------------------------


def _depth_profile(p: Exponent, j: int, M, ctx):
    """``log |Y|**p`` as a function of ``M = |y_{j+1}|`` (so ``p_i = 0`` for ``i < j``).

    For ``j >= 1`` the signed ``y_{j+1}`` is used, which may be negative when
    ``j = r``; deeper indices only occur for ``j < r`` where it is positive.

    ``log|y_j| = -M`` for ``j = 0`` and ``+M`` otherwise; higher indices are
    iterated logarithms of ``M``.
    """
    entries = p.entries
    total = _mpf(ctx, entries[j]) * (-M if j == 0 else M)
    ell = M
    for i in range(j + 1, len(entries)):
        ell = ctx.log(ell)
        if entries[i]:
            total += _mpf(ctx, entries[i]) * ell
    return total


def _tail_bound(p: Exponent, j: int, M, ctx):
    """Bound on ``|d/dM log|Y|**p - p_j s_j|``; nonincreasing in ``M``."""
    entries = p.entries
    total, denom, ell = ctx.mpf(0), M, M
    for i in range(j + 1, len(entries)):
        if entries[i]:
            total += abs(_mpf(ctx, entries[i])) / denom
        ell = ctx.log(ell)
        denom *= ell
    return total


def _x_of(j: int, M, ctx):
    if j == 0:
        return ctx.exp(-M)
    u = M
    for _ in range(j - 1):
        u = ctx.exp(u)
    return ctx.exp(-ctx.exp(u))


@dataclass(frozen=True)
class Radius:
    """A point ``x`` near 0 stored as ``(level, M)``.

    Level 0 means ``x = exp(-M)``; level ``j >= 1`` means ``y_{j+1} = M``.
    Radii far below the floating range (``exp(-exp(exp(exp(100))))``, say)
    stay comparable; ``x`` is ``None`` when it is not representable.
    """

    level: int
    value: object
    dps: int = 30

    @classmethod
    def of_x(cls, x, dps: int = 30) -> "Radius":
        ctx = make_ctx(dps)
        return cls(0, -ctx.inf if ctx.isinf(x) else -ctx.log(x), dps)

    def lifted(self, level: int):
        """``M`` re-expressed at a deeper level (``-inf`` once it leaves the log domain)."""
        ctx = make_ctx(self.dps)
        M = ctx.mpf(self.value)
        for _ in range(self.level, level):
            M = ctx.log(M) if M > 0 else -ctx.inf
        return M

    def is_smaller_than(self, other: "Radius") -> bool:
        level = max(self.level, other.level)
        return self.lifted(level) > other.lifted(level)

    @property
    def x(self):
        ctx = make_ctx(self.dps)
        try:
            x = _x_of(self.level, ctx.mpf(self.value), ctx)
        except OverflowError:
            return None
        return x if x > 0 or ctx.isinf(self.value) else None

    def point(self) -> LogPoint:
        """Evaluation point at the radius (tower form for deep radii)."""
        x = self.x
        if x is not None and x > 0 and not make_ctx(self.dps).isinf(x):
            return LogPoint.direct(x)
        ctx = make_ctx(self.dps)
        if self.level == 0:
            return LogPoint.tower(ctx.log(self.value))
        return LogPoint.tower(self.value, level=self.level + 1)

    def to_json(self) -> dict:
        x = self.x
        return {"x": None if x is None else mpmath.nstr(x, 20), "level": self.level,
                "M": mpmath.nstr(self.value, 20)}


def _shrink_one(p: Exponent, log_tau, r: int, cap: Radius, ctx, iterations: int) -> Radius:
    """Largest radius (up to bisection accuracy, rounded down) with ``|Y|**p < tau`` on ``(0, x)``."""
    if limit_class(p) is not LimitClass.ZERO:
        raise ValidationError(f"|Y|^{p!r} does not tend to 0; no neighbourhood of 0 bounds it")
    j = next(i for i, e in enumerate(p.entries) if e)
    lead = abs(_mpf(ctx, p.entries[j]))
    h = lambda M: _depth_profile(p, j, M, ctx) - log_tau  # decreasing on the monotone tail
    M_cap = cap.lifted(j)
    if j == r:
        # no deeper factors: log |Y|**p = -lead * M exactly
        return Radius(j, max(M_cap, -log_tau / lead), cap.dps)
    # monotone tail: the tail bound is nonincreasing, so once below |p_j| it stays there
    start = max(M_cap, ctx.mpf(1))
    while _tail_bound(p, j, start, ctx) >= lead:
        start *= 2
    if h(start) <= 0:
        return Radius(j, start, cap.dps)
    lo, step = start, ctx.mpf(1)
    hi = lo + step
    while h(hi) > 0:
        lo, step = hi, 2 * step
        hi = lo + step
    for _ in range(iterations):
        mid = (lo + hi) / 2
        if h(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return Radius(j, hi, cap.dps)


def shrink_domain(
    f: PreparedTuple,
    t,
    d_t,
    L=None,
    dps: int = 30,
    include_coefficient: bool = False,
) -> Radius:
    """Conservative ``x_hat <= d_t/2`` with ``|Y|**p_j < 1/(L |a(t) b_j(t)|)`` on ``(0, x_hat)``.

    Every base exponent ``p_j != 0`` tends to 0 by assumption; each bound is
    solved on the provably monotone tail of ``log |Y|**p_j`` by bisection and
    the smallest resulting radius is returned (``x = inf`` when nothing
    constrains an unbounded ``d_t``).  With ``include_coefficient`` the factor
    ``|a(t)| |Y|**q <= 1`` is enforced as well.
    """
    ctx = make_ctx(dps)
    L = as_fraction(L) if L is not None else f.v.L
    d_t = ctx.inf if d_t in (math.inf, "inf") else ctx.mpf(d_t) if not isinstance(d_t, Fraction) else _mpf(ctx, d_t)
    bound = scale_bound(f.r, dps)
    if d_t > bound:
        d_t = bound
    x_hat = Radius.of_x(d_t / 2, dps)
    a = _eval_t(f.a, t, ctx, "coefficient a")
    constraints = []
    for j, (bj, pj) in enumerate(zip(f.b, f.P), start=1):
        if pj.is_zero():
            continue
        ab = abs(a * _eval_t(bj, t, ctx, f"base function b_{j}"))
        if ab:
            constraints.append((pj, -ctx.log(_mpf(ctx, L) * ab)))
    if include_coefficient and not f.q.is_zero() and a:
        constraints.append((f.q, -ctx.log(abs(a))))
    iterations = int(dps * 3.4) + 10
    for p, log_tau in constraints:
        radius = _shrink_one(p, log_tau, f.r, x_hat, ctx, iterations)
        if radius.is_smaller_than(x_hat):
            x_hat = radius
    return x_hat


def coefficient_advisory(f: PreparedTuple, samples: Sequence, dps: int = 30) -> str:
    """Sampled check that ``a`` vanishes identically or nowhere on the parameter set.

    Returns ``"zero"``, ``"nonvanishing"`` or ``"mixed"``; evidence only.
    """
    ctx = make_ctx(dps)
    zeros = [_eval_t(f.a, t, ctx, "coefficient a") == 0 for t in samples]
    if all(zeros):
        return "zero"
    if not any(zeros):
        return "nonvanishing"
    return "mixed"
