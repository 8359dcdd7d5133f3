from __future__ import annotations

import math
import random
import sys
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lexan.errors import EvaluationError, SingularDesignError, ValidationError
from lexan.gateaux import (
    ExprOracle,
    FDScheme,
    HomogeneousPoly,
    ProbeDesign,
    ProcessOracle,
    design_probes,
    directional_derivative,
    exact_det,
    fit_homogeneous,
    g_infinity_search,
    gk_test,
    monomial_basis,
    taylor_decay,
)

# -- basis and designs ---------------------------------------------------------


def test_monomial_basis_examples():
    assert monomial_basis(2, 3) == [(3, 0), (2, 1), (1, 2), (0, 3)]
    assert monomial_basis(1, 5) == [(5,)]
    assert len(monomial_basis(3, 2)) == 6


@given(st.integers(1, 4), st.integers(1, 5))
def test_basis_size_and_degree(m, k):
    basis = monomial_basis(m, k)
    assert len(basis) == math.comb(m + k - 1, k) == len(set(basis))
    assert all(sum(a) == k for a in basis)


def test_design_examples():
    assert design_probes(1, 4).points == ((1,),) and design_probes(1, 4).det_certificate == 1
    d = design_probes(2, 1)
    assert d.points == ((1, 0), (0, 1)) and d.det_certificate == 1
    d = design_probes(2, 2, seed=7)
    assert d.nu == 3 and d.det_certificate != 0
    assert all(abs(c) <= 1 for p in d.points for c in p)


def test_design_is_deterministic_and_seeded():
    assert design_probes(3, 3, seed=1) == design_probes(3, 3, seed=1)
    assert design_probes(3, 3, seed=1) != design_probes(3, 3, seed=2)


def test_design_certificate_is_exact_determinant():
    d = design_probes(3, 2, seed=4)
    again = ProbeDesign.from_points(3, 2, d.points)
    assert again.det_certificate == d.det_certificate


def test_singular_design_rejected():
    with pytest.raises(SingularDesignError):
        ProbeDesign.from_points(2, 2, [(1, 0), (2, 0), (0, 1)])
    with pytest.raises(ValidationError):
        ProbeDesign.from_points(2, 2, [(1, 0), (0, 1)])


def test_exact_det():
    assert exact_det([[Fraction(1), Fraction(2)], [Fraction(3), Fraction(4)]]) == -2
    assert exact_det([[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]]) == -1


# -- homogeneous polynomials and fitting --------------------------------------


def test_fit_example():
    design = design_probes(2, 2, seed=3)
    samples = [v[0] ** 2 + v[0] * v[1] for v in design.points]
    assert fit_homogeneous(design, samples).coeffs == (1, 1, 0)


def test_fit_zero_and_univariate():
    design = design_probes(2, 3)
    assert all(c == 0 for c in fit_homogeneous(design, [0] * design.nu).coeffs)
    p = fit_homogeneous(design_probes(1, 3), [Fraction(5)])
    assert p((Fraction(2),)) == 40


@settings(max_examples=100)
@given(st.integers(1, 3).flatmap(lambda m: st.integers(1, 4).flatmap(lambda k: st.tuples(
    st.just(m), st.just(k),
    st.lists(st.fractions(min_value=-9, max_value=9, max_denominator=7),
             min_size=math.comb(m + k - 1, k), max_size=math.comb(m + k - 1, k)),
    st.integers(0, 50)))))
def test_fit_is_identity_on_polynomials(data):
    m, k, coeffs, seed = data
    poly = HomogeneousPoly(m, k, tuple(coeffs))
    design = design_probes(m, k, seed)
    assert fit_homogeneous(design, [poly(p) for p in design.points]).coeffs == poly.coeffs


def test_fit_from_floats_is_exact_binary():
    design = design_probes(2, 2, seed=1)
    ctx_samples = [mpmath.mpf(float(v[0] * v[1])) for v in design.points]
    poly = fit_homogeneous(design, ctx_samples)
    assert not poly.exact
    # design points are dyadic, so the binary samples are exact and so is the fit
    assert poly.coeffs == (0, 1, 0)


def test_homogeneity():
    rng = random.Random(2)
    for _ in range(20):
        m, k = rng.randint(1, 3), rng.randint(1, 4)
        poly = HomogeneousPoly(m, k, tuple(Fraction(rng.randint(-5, 5), rng.randint(1, 4))
                                           for _ in monomial_basis(m, k)))
        v = tuple(Fraction(rng.randint(-8, 8), 8) for _ in range(m))
        assert poly(tuple(2 * c for c in v)) == 2 ** k * poly(v)


def test_poly_validation():
    with pytest.raises(ValidationError):
        HomogeneousPoly(2, 2, (1, 2))
    with pytest.raises(ValidationError):
        HomogeneousPoly(2, 1, (1, 2))((1,))


# -- finite differences ----------------------------------------------------------


def test_directional_derivative_polynomial_exact():
    f = ExprOracle("u1^2*u2", 2)
    est = directional_derivative(f, None, [0, 0], [1, 1], 3)
    assert est.converged and abs(est.value - 6) < 1e-8


def test_directional_derivative_linear():
    f = ExprOracle("3*u1 - 2*u2 + 7", 2)
    est = directional_derivative(f, None, [Fraction(1, 3), 2], [1, 1], 1)
    assert abs(est.value - 1) < 1e-20


def test_directional_derivative_detects_c1_not_c2():
    def f(t, u):
        x = u[0]
        return mpmath.mpf(0) if x == 0 else abs(x) ** (mpmath.mpf(3) / 2)

    est = directional_derivative(f, None, [0], [1], 2)
    assert not est.converged


def test_directional_derivative_one_sided_disagreement():
    def f(t, u):  # kink: one-sided first derivatives 1 and 0
        return max(u[0], 0 * u[0])

    est = directional_derivative(f, None, [0], [1], 1)
    assert not est.converged


def test_directional_derivative_oracle_errors():
    with pytest.raises(EvaluationError):
        directional_derivative(ExprOracle("log(x)", 1), None, [0], [1], 1)
    with pytest.raises(ValidationError):
        directional_derivative(ExprOracle("x", 1), None, [0], [1], 0)


def test_fd_scheme_validation():
    with pytest.raises(ValidationError):
        FDScheme(stencils=("sideways",))
    with pytest.raises(ValidationError):
        FDScheme(levels=2)


@pytest.mark.parametrize("degree", [1, 2, 3, 4])
def test_derivative_on_polynomials_is_exact(degree):
    rng = random.Random(degree)
    coeffs = [Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(degree + 1)]
    expr = " + ".join(f"({c})*x^{i}" for i, c in enumerate(coeffs))
    x0 = Fraction(rng.randint(-4, 4), 4)
    est = directional_derivative(ExprOracle(expr, 1), None, [x0], [1], degree)
    assert abs(est.value - math.factorial(degree) * coeffs[degree]) < 1e-8


# -- gk tests ---------------------------------------------------------------------


def test_gk_harmonic_cubic():
    res = gk_test(ExprOracle("u1^3 - 3*u1*u2^2", 2), None, [Fraction(1, 3), Fraction(-1, 2)], 3)
    assert res.passed and res.residual < 1e-12


def test_gk_rejects_rational_function():
    def f(t, u):
        u1, u2 = u
        return mpmath.mpf(0) if u1 == 0 and u2 == 0 else u1 ** 3 / (u1 ** 2 + u2 ** 2)

    res = gk_test(f, None, [0, 0], 1)
    assert not res.passed and res.residual > 1e-3


def test_gk_zero_oracle():
    res = gk_test(lambda t, u: 0, None, [0, 0, 0], 2)
    assert res.passed and res.residual == 0


def test_gk_scale_invariance_and_seed_stability():
    def f(t, u):
        u1, u2 = u
        return mpmath.mpf(0) if u1 == 0 and u2 == 0 else u1 ** 3 / (u1 ** 2 + u2 ** 2)

    verdicts = set()
    for seed in range(5):
        verdicts.add(gk_test(f, None, [0, 0], 1, seed=seed).passed)
        verdicts.add(gk_test(lambda t, u: -7 * f(t, u), None, [0, 0], 1, seed=seed).passed)
    assert verdicts == {False}
    poly = ExprOracle("u1^2*u2 + u2^3 - u1", 2)
    assert all(gk_test(poly, None, [Fraction(1, 2), 0], 3, seed=s).passed for s in range(5))


def test_gk_json_shapes():
    res = gk_test(ExprOracle("x^2", 1), None, [0], 2)
    data = res.to_json()
    assert data["verdict"] == "Pass" and data["poly"]["basis"] == [[2]]
    failed = gk_test(lambda t, u: abs(u[0]) ** (mpmath.mpf(3) / 2), None, [0], 2)
    assert failed.to_json()["residual"] == "inf"


def _power(t, u):
    x = u[0]
    if x == 0:
        return mpmath.mpf(0)
    e = abs(2 * Fraction(t))
    return abs(x) ** (mpmath.mpf(e.numerator) / e.denominator)


@pytest.mark.parametrize("t, through, first", [(1, 4, None), (2, 4, None), (Fraction(3, 4), 1, 2),
                                               (Fraction(5, 4), 2, 3)])
def test_g_infinity_search_power_family(t, through, first):
    res = g_infinity_search(_power, t, [0], 4)
    assert (res.passed_through, res.first_failure) == (through, first)


def test_g_infinity_search_parallel_matches_serial():
    serial = g_infinity_search(_power, Fraction(5, 4), [0], 4).to_json()
    parallel = g_infinity_search(_power, Fraction(5, 4), [0], 4, jobs=4).to_json()
    assert serial == parallel


def test_taylor_decay_for_entire_function():
    values = taylor_decay(ExprOracle("exp(x)", 1), None, [0], [1], 4)
    assert len(values) == 4


# -- external process oracle -------------------------------------------------------


ORACLE_SCRIPT = r"""
import json, sys
from mpmath import mp, mpf
mp.dps = 40
for line in sys.stdin:
    req = json.loads(line, parse_float=str, parse_int=str)
    u = [mpf(v) for v in req["u"]]
    t = [mpf(v) for v in req["t"]]
    if not u:
        print(json.dumps({"error": "no point"}), flush=True)
        continue
    value = t[0] * u[0] ** 2 * u[1] + u[1] ** 3 if t else u[0]
    print(json.dumps({"value": mp.nstr(value, 40)}), flush=True)
"""


@pytest.fixture
def process_oracle(tmp_path):
    script = tmp_path / "oracle.py"
    script.write_text(ORACLE_SCRIPT)
    with ProcessOracle([sys.executable, str(script)]) as oracle:
        yield oracle


def test_process_oracle_values(process_oracle):
    value = mpmath.mpf(process_oracle(Fraction(1, 3), [Fraction(1, 2), 3]))
    assert abs(value - (Fraction(1, 3) * Fraction(1, 4) * 3 + 27)) < 1e-14


def test_process_oracle_gk_search(process_oracle):
    res = g_infinity_search(process_oracle, Fraction(1, 3), [Fraction(1, 4), Fraction(-1, 2)], 4)
    assert res.passed_through == 4


def test_process_oracle_error_reply(process_oracle):
    with pytest.raises(EvaluationError):
        process_oracle([1], [])
