"""Gateaux ``G^k`` testing by homogeneous-polynomial interpolation.

For a function ``f(t, .)`` on ``R^m`` and a base point ``u`` the ``k``-th
directional derivative ``Phi_k(v) = d^k/dx^k f(t, u + x v)`` at ``x = 0`` is a
homogeneous polynomial of degree ``k`` in ``v`` exactly when ``f(t, .)`` is
``G^k`` at ``u``.  The test samples ``Phi_k`` at ``nu(k) = C(m+k-1, k)`` probe
directions with a certified nonsingular design, fits the unique interpolating
polynomial and measures the residual at fresh directions.

Derivatives come from finite differences in extended precision.  Central,
forward and backward stencils are all evaluated: an odd-order central stencil
vanishes identically on even functions, so it alone cannot see that
``|x|**(5/2)`` is not ``C^3``.
"""

from __future__ import annotations

import json
import math
import random
import subprocess
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Callable, Optional, Sequence, Union

import mpmath

from .errors import EvaluationError, LexanError, ResampleLimitError, SingularDesignError, ValidationError
from .expr import Expr, eval_expr, parse
from .prepared import t_env
from .rational import format_fraction
from .scale import make_ctx

Oracle = Callable[[object, tuple], object]


# -- monomial basis and designs ---------------------------------------------


def monomial_basis(m: int, k: int) -> list[tuple[int, ...]]:
    """Exponents of the degree-``k`` monomials in ``m`` variables, lexicographically descending."""
    if m < 1 or k < 0:
        raise ValidationError("need m >= 1 and k >= 0")
    out = []
    for combo in combinations_with_replacement(range(m), k):
        alpha = [0] * m
        for i in combo:
            alpha[i] += 1
        out.append(tuple(alpha))
    return sorted(out, reverse=True)


def _monomial(alpha: Sequence[int], v: Sequence):
    out = 1
    for x, a in zip(v, alpha):
        if a:
            out = out * x ** a
    return out


def design_matrix(points: Sequence[Sequence[Fraction]], basis: Sequence[tuple[int, ...]]) -> list[list[Fraction]]:
    return [[Fraction(_monomial(alpha, p)) for alpha in basis] for p in points]


def _eliminate(A: list[list[Fraction]], rhs: Optional[list[Fraction]] = None):
    """Gaussian elimination over Q; returns ``(det, solution or None)``."""
    n = len(A)
    M = [row[:] + ([rhs[i]] if rhs is not None else []) for i, row in enumerate(A)]
    det = Fraction(1)
    for col in range(n):
        pivot = next((i for i in range(col, n) if M[i][col] != 0), None)
        if pivot is None:
            return Fraction(0), None
        if pivot != col:
            M[col], M[pivot] = M[pivot], M[col]
            det = -det
        det *= M[col][col]
        for i in range(col + 1, n):
            factor = M[i][col] / M[col][col]
            if factor:
                M[i] = [a - factor * b for a, b in zip(M[i], M[col])]
    if rhs is None:
        return det, None
    x = [Fraction(0)] * n
    for i in reversed(range(n)):
        acc = M[i][n] - sum(M[i][j] * x[j] for j in range(i + 1, n))
        x[i] = acc / M[i][i]
    return det, x


def exact_det(A: list[list[Fraction]]) -> Fraction:
    return _eliminate(A)[0]


@dataclass(frozen=True)
class ProbeDesign:
    """``nu(k)`` rational directions with a nonzero exact interpolation determinant."""

    m: int
    k: int
    points: tuple[tuple[Fraction, ...], ...]
    det_certificate: Fraction

    @classmethod
    def from_points(cls, m: int, k: int, points: Sequence[Sequence]) -> "ProbeDesign":
        pts = tuple(tuple(Fraction(c) for c in p) for p in points)
        basis = monomial_basis(m, k)
        if len(pts) != len(basis) or any(len(p) != m for p in pts):
            raise ValidationError(f"a degree-{k} design in dimension {m} needs {len(basis)} points of length {m}")
        det = exact_det(design_matrix(pts, basis))
        if det == 0:
            raise SingularDesignError("probe points lie on the singular set: det(A) = 0")
        return cls(m, k, pts, det)

    @property
    def nu(self) -> int:
        return len(self.points)

    def to_json(self) -> dict:
        return {"m": self.m, "k": self.k, "det": format_fraction(self.det_certificate),
                "points": [[format_fraction(c) for c in p] for p in self.points]}


def design_probes(m: int, k: int, seed: int = 0, max_attempts: int = 100, denominator: int = 64) -> ProbeDesign:
    """Seeded rational probe directions in ``[-1, 1]**m`` with exact nonsingularity.

    ``m = 1`` uses the single direction ``(1)`` and ``k = 1`` the standard basis.
    """
    if m < 1 or k < 1:
        raise ValidationError("need m >= 1 and k >= 1")
    if m == 1:
        return ProbeDesign.from_points(1, k, [(1,)])
    if k == 1:
        return ProbeDesign.from_points(m, 1, [tuple(int(i == j) for j in range(m)) for i in range(m)])
    basis = monomial_basis(m, k)
    rng = random.Random(f"design:{seed}:{m}:{k}")
    for _ in range(max_attempts):
        pts = [tuple(Fraction(rng.randint(-denominator, denominator), denominator) for _ in range(m))
               for _ in basis]
        det = exact_det(design_matrix(pts, basis))
        if det != 0:
            return ProbeDesign(m, k, tuple(pts), det)
    raise ResampleLimitError(f"no nonsingular design after {max_attempts} attempts")


# -- homogeneous polynomials ------------------------------------------------


@dataclass(frozen=True)
class HomogeneousPoly:
    """``P(v) = sum_j coeffs[j] * M_j(v)`` over :func:`monomial_basis`."""

    m: int
    k: int
    coeffs: tuple
    exact: bool = True  # False when fitted from floating-point samples

    def __post_init__(self):
        if len(self.coeffs) != math.comb(self.m + self.k - 1, self.k):
            raise ValidationError("coefficient vector does not match nu(k)")

    @property
    def basis(self) -> list[tuple[int, ...]]:
        return monomial_basis(self.m, self.k)

    def __call__(self, v: Sequence):
        if len(v) != self.m:
            raise ValidationError(f"direction needs {self.m} components")
        return sum((c * _monomial(alpha, v) for c, alpha in zip(self.coeffs, self.basis)), Fraction(0))

    def to_json(self) -> dict:
        def fmt(c):
            if self.exact:
                return format_fraction(Fraction(c))
            return mpmath.nstr(mpmath.mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else c, 17)
        return {"m": self.m, "k": self.k, "basis": [list(a) for a in self.basis],
                "coeffs": [fmt(c) for c in self.coeffs]}


def _to_fraction(value) -> Fraction:
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    mpf = value if hasattr(value, "_mpf_") else mpmath.mpf(value)
    if not mpmath.isfinite(mpf):
        raise EvaluationError("non-finite sample")
    sign, man, exp, _ = mpf._mpf_  # exact binary value, no rounding
    man = -int(man) if sign else int(man)
    return Fraction(man * 2 ** exp) if exp >= 0 else Fraction(man, 2 ** -exp)


def fit_homogeneous(design: ProbeDesign, samples: Sequence) -> HomogeneousPoly:
    """Unique degree-``k`` homogeneous interpolant through the samples.

    Samples are converted to exact binary fractions, so the square system is
    solved exactly; rational samples give the exact rational polynomial.
    """
    if len(samples) != design.nu:
        raise ValidationError(f"expected {design.nu} samples, got {len(samples)}")
    A = design_matrix(design.points, monomial_basis(design.m, design.k))
    det, coeffs = _eliminate(A, [_to_fraction(s) for s in samples])
    if coeffs is None:
        raise SingularDesignError("design matrix is singular")
    exact = all(isinstance(s, (int, Fraction)) for s in samples)
    return HomogeneousPoly(design.m, design.k, tuple(coeffs), exact)


# -- oracles ----------------------------------------------------------------


class ExprOracle:
    """DSL expression in ``u1..um`` (``x`` or ``u`` too when ``m = 1``) and parameters ``t``."""

    def __init__(self, expr: Union[Expr, str], m: int, dps: int = 30):
        self.expr = parse(expr) if isinstance(expr, str) else expr
        self.m, self.dps = m, dps

    def __call__(self, t, u: Sequence):
        env = t_env(t)
        for i, ui in enumerate(u, start=1):
            env[f"u{i}"] = ui
        if self.m == 1:
            env["x"] = env["u"] = u[0]
        return eval_expr(self.expr, env, self.dps)


class ProcessOracle:
    """External oracle speaking newline-delimited JSON on its standard streams.

    Each request is ``{"t": [...], "u": [...]}`` with full-precision numeric
    literals; the reply is ``{"value": number-or-string}`` or ``{"error": ...}``.
    Calls are serialized, so the oracle is safe to share between threads.
    """

    def __init__(self, argv: Sequence[str], dps: int = 30):
        self.dps = dps
        self._lock = threading.Lock()
        self._proc = subprocess.Popen(list(argv), stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1)

    def _literal(self, x) -> str:
        if isinstance(x, int):
            return str(x)
        if isinstance(x, Fraction):
            ctx = make_ctx(self.dps + 5)
            x = ctx.mpf(x.numerator) / x.denominator
        return mpmath.nstr(x, self.dps + 5, strip_zeros=True)

    def __call__(self, t, u: Sequence):
        ts = t if isinstance(t, (list, tuple)) else ([] if t is None else [t])
        line = '{"t": [%s], "u": [%s]}\n' % (", ".join(self._literal(x) for x in ts),
                                                ", ".join(self._literal(x) for x in u))
        with self._lock:
            if self._proc.poll() is not None:
                raise EvaluationError("oracle process has exited")
            self._proc.stdin.write(line)
            self._proc.stdin.flush()
            reply = self._proc.stdout.readline()
        if not reply:
            raise EvaluationError("oracle process closed its output")
        try:
            data = json.loads(reply, parse_float=str, parse_int=str)
        except json.JSONDecodeError as exc:
            raise EvaluationError(f"oracle reply is not JSON: {reply.strip()!r}") from exc
        if "value" not in data:
            raise EvaluationError(f"oracle error: {data.get('error', data)}")
        return str(data["value"])  # converted by the caller at its working precision

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


# -- finite differences -----------------------------------------------------


def _coord(ctx, c):
    if isinstance(c, (int, Fraction)):
        c = Fraction(c)
        return ctx.mpf(c.numerator) / c.denominator
    return ctx.mpf(c)


@dataclass(frozen=True)
class FDScheme:
    """Step ``h_i = h0_factor * (1 + |u|) / 2**i`` for ``i < levels``, at ``dps`` digits."""

    h0_factor: float = 1e-2
    levels: int = 5
    dps: int = 30
    shrink: float = 0.9  # successive differences must shrink at least this fast
    agree_tol: float = 1e-6
    stencils: tuple[str, ...] = ("central", "forward", "backward")  # ("forward",) for one-sided domains

    def __post_init__(self):
        if not self.stencils or any(s not in _OFFSETS for s in self.stencils):
            raise ValidationError(f"stencils must be drawn from {sorted(_OFFSETS)}")
        if self.levels < 3:
            raise ValidationError("need at least 3 step levels")


@dataclass(frozen=True)
class DerivativeEstimate:
    value: object
    error: object
    converged: bool
    stencils: dict = field(default_factory=dict)
    reason: str = ""

    def to_json(self) -> dict:
        return {"value": mpmath.nstr(self.value, 15), "error": mpmath.nstr(self.error, 5),
                "converged": self.converged, "reason": self.reason}


_OFFSETS = {
    "central": lambda k: [Fraction(k, 2) - i for i in range(k + 1)],
    "forward": lambda k: [Fraction(k - i) for i in range(k + 1)],
    "backward": lambda k: [Fraction(-i) for i in range(k + 1)],
}


def _stencil_values(g, k: int, kind: str, h, ctx):
    """Raw ``k``-th difference quotient and its roundoff floor."""
    total, mag = ctx.mpf(0), ctx.mpf(0)
    for i, off in enumerate(_OFFSETS[kind](k)):
        w = (-1) ** i * math.comb(k, i)
        val = g(ctx.mpf(off.numerator) / off.denominator * h)
        total += w * val
        mag += abs(w * val)
    hk = h ** k
    return total / hk, mag * ctx.mpf(10) ** (3 - ctx.dps) / hk


def _richardson(D: list, ratio_power: int, ctx):
    """Richardson tableau for step ratio 2 and error orders ``p, 2p, 3p, ...``."""
    T = [list(D)]
    for j in range(1, len(D)):
        prev = T[-1]
        f = ctx.mpf(2) ** (ratio_power * j)
        T.append([(f * prev[i + 1] - prev[i]) / (f - 1) for i in range(len(prev) - 1)])
    best = T[-1][0]
    err = abs(T[-1][0] - T[-2][-1]) if len(T) > 1 else ctx.inf
    return best, err


def _aitken(D: list, ctx):
    acc = []
    for i in range(len(D) - 2):
        d1, d2 = D[i + 1] - D[i], D[i + 2] - D[i + 1]
        den = d2 - d1
        acc.append(D[i + 2] if den == 0 else D[i + 2] - d2 * d2 / den)
    if len(acc) < 2:
        return D[-1], ctx.inf
    return acc[-1], abs(acc[-1] - acc[-2])


def _converges(D: list, floors: list, shrink: float) -> bool:
    diffs = [abs(b - a) for a, b in zip(D, D[1:])]
    noise = [10 * max(a, b) for a, b in zip(floors, floors[1:])]
    significant = [d > n for d, n in zip(diffs, noise)]
    if not significant[-1]:
        return True
    # the last difference must shrink geometrically against each of the two
    # before it; one pre-asymptotic wobble in between is tolerated
    last = diffs[-1]
    for back, (d, s) in enumerate(zip(reversed(diffs[-3:-1]), reversed(significant[-3:-1])), start=1):
        if s and last > shrink ** back * d:
            return False
    return True


def directional_derivative(
    f: Oracle,
    t,
    u: Sequence,
    v: Sequence,
    k: int,
    scheme: FDScheme = FDScheme(),
) -> DerivativeEstimate:
    """Estimate ``d^k/dx^k f(t, u + x v)`` at ``x = 0``.

    Each stencil family is extrapolated (Richardson with its error order, or
    Aitken for fractional-power convergence, whichever reports the smaller
    error).  The estimate is marked not converged when some family diverges
    or the one-sided limits disagree.
    """
    if k < 1:
        raise ValidationError("derivative order must be >= 1")
    ctx = make_ctx(scheme.dps)
    u = [_coord(ctx, c) for c in u]
    v = [_coord(ctx, c) for c in v]
    cache: dict = {}

    def g(x):
        if x not in cache:
            try:
                value = ctx.mpf(f(t, tuple(ui + x * vi for ui, vi in zip(u, v))))
            except (LexanError, ValueError, TypeError, ZeroDivisionError, ArithmeticError) as exc:
                raise EvaluationError(f"oracle undefined on the stencil: {exc}") from exc
            if not ctx.isfinite(value):
                raise EvaluationError(f"oracle returned {value} on the stencil")
            cache[x] = value
        return cache[x]

    h0 = ctx.mpf(scheme.h0_factor) * (1 + ctx.sqrt(sum(ui * ui for ui in u)))
    hs = [h0 / 2 ** i for i in range(scheme.levels)]
    results = {}
    for kind in scheme.stencils:
        order = 2 if kind == "central" else 1
        D, floors = zip(*(_stencil_values(g, k, kind, h, ctx) for h in hs))
        rich = _richardson(list(D), order, ctx)
        ait = _aitken(list(D), ctx)
        value, err = min(rich, ait, key=lambda ve: ve[1])
        err = max(err, floors[-1])
        results[kind] = (value, err, _converges(list(D), list(floors), scheme.shrink))
    diverging = [kind for kind, (_, _, ok) in results.items() if not ok]
    # report the most accurate family; the others must agree with it
    best, best_err, _ = min(results.values(), key=lambda r: r[1])
    if diverging:
        return DerivativeEstimate(best, ctx.inf, False, results, f"divergent {', '.join(diverging)} stencil")
    values = [r[0] for r in results.values()]
    scale = max([ctx.mpf(1)] + [abs(x) for x in values])
    spread = max(values) - min(values)
    if spread > scheme.agree_tol * scale:
        return DerivativeEstimate(best, spread, False, results, "one-sided limits disagree")
    return DerivativeEstimate(best, max(best_err, spread), True, results)


# -- G^k testing ------------------------------------------------------------


@dataclass(frozen=True)
class GkResult:
    k: int
    passed: bool
    residual: float  # max |w_k| / scale; inf when a directional derivative fails to exist
    scale: float
    poly: Optional[HomogeneousPoly] = None
    reason: str = ""

    @property
    def verdict(self) -> str:
        return "Pass" if self.passed else "Fail"

    def to_json(self) -> dict:
        out = {"k": self.k, "verdict": self.verdict,
               "residual": "inf" if math.isinf(self.residual) else float(f"{self.residual:.6e}"),
               "scale": "inf" if math.isinf(self.scale) else float(f"{self.scale:.6e}")}
        if self.reason:
            out["reason"] = self.reason
        if self.poly is not None:
            out["poly"] = self.poly.to_json()
        return out


def _unit_directions(m: int, count: int, rng: random.Random) -> list[tuple[float, ...]]:
    out = []
    while len(out) < count:
        if m == 1:
            out.append((rng.choice((-1.0, 1.0)),))
            continue
        g = [rng.gauss(0.0, 1.0) for _ in range(m)]
        n = math.sqrt(sum(x * x for x in g))
        if n > 1e-8:
            out.append(tuple(x / n for x in g))
    return out


def _map(fn, items, jobs: int):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def gk_test(
    f: Oracle,
    t,
    u: Sequence,
    k: int,
    design: Optional[ProbeDesign] = None,
    validation_directions: int = 5,
    tol: float = 1e-6,
    seed: int = 0,
    scheme: FDScheme = FDScheme(),
    jobs: int = 1,
) -> GkResult:
    """Test whether ``Phi_k(t, u, .)`` is a homogeneous polynomial of degree ``k``.

    Passes iff ``max |P_k(v) - Phi_k(v)| <= tol * scale`` over the validation
    directions, with ``scale = max(1, max |Phi_k samples|)``.
    """
    m = len(u)
    design = design or design_probes(m, k, seed)
    if design.m != m or design.k != k:
        raise ValidationError("design does not match dimension and order")
    rng = random.Random(f"validate:{seed}:{m}:{k}")
    directions = [tuple(p) for p in design.points] + _unit_directions(m, validation_directions, rng)
    estimates = _map(lambda v: directional_derivative(f, t, u, v, k, scheme), directions, jobs)
    bad = next((e for e in estimates if not e.converged), None)
    if bad is not None:
        return GkResult(k, False, math.inf, math.inf, reason=f"directional derivative of order {k} does not exist ({bad.reason})")
    samples = [e.value for e in estimates[: design.nu]]
    poly = fit_homogeneous(design, samples)
    scale = max([1.0] + [float(abs(e.value)) for e in estimates])
    ctx = make_ctx(scheme.dps)
    residual = 0.0
    for v, est in zip(directions[design.nu:], estimates[design.nu:]):
        pv = poly(tuple(_to_fraction(c) for c in v))
        residual = max(residual, float(abs(_coord(ctx, pv) - est.value)))
    residual /= scale
    return GkResult(k, residual <= tol, residual, scale, poly)


@dataclass(frozen=True)
class SearchResult:
    k_max: int
    passed_through: int  # largest k with G^1..G^k all passing (0 if G^1 fails)
    first_failure: Optional[int]
    results: tuple[GkResult, ...]

    def to_json(self) -> dict:
        return {"k_max": self.k_max, "passed_through": self.passed_through,
                "first_failure": self.first_failure, "results": [r.to_json() for r in self.results]}


def g_infinity_search(
    f: Oracle,
    t,
    u: Sequence,
    k_max: int,
    tol: float = 1e-6,
    seed: int = 0,
    validation_directions: int = 5,
    scheme: FDScheme = FDScheme(),
    jobs: int = 1,
) -> SearchResult:
    """Run ``gk_test`` for ``k = 1..k_max`` and stop at the first failure."""
    if k_max < 1:
        raise ValidationError("k_max must be >= 1")
    results = []
    for k in range(1, k_max + 1):
        res = gk_test(f, t, u, k, validation_directions=validation_directions, tol=tol, seed=seed,
                      scheme=scheme, jobs=jobs)
        results.append(res)
        if not res.passed:
            return SearchResult(k_max, k - 1, k, tuple(results))
    return SearchResult(k_max, k_max, None, tuple(results))


def taylor_decay(f: Oracle, t, u: Sequence, v: Sequence, k_max: int, scheme: FDScheme = FDScheme()) -> list:
    """Diagnostics ``|Phi_k(v)| / k!`` for ``k = 1..k_max`` (advisory analyticity evidence)."""
    out = []
    for k in range(1, k_max + 1):
        est = directional_derivative(f, t, u, v, k, scheme)
        out.append(abs(est.value) / math.factorial(k) if est.converged else mpmath.inf)
    return out
