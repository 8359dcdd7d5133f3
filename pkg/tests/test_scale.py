from __future__ import annotations

import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lexan.errors import DomainError, EmptySumError, MismatchedScaleError, ValidationError, ZeroExponentError
from lexan.scale import (
    Exponent,
    LimitClass,
    LogPoint,
    MonomialSum,
    Order,
    compare,
    diff,
    elementary_scale,
    eval_monomial_log,
    jq_sigma,
    leading_term,
    limit_class,
    make_ctx,
    q_diff,
    scale_bound,
    tower_point_at,
)
from oracles import log_monomial_direct

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def exponents(r: int):
    return st.lists(rationals, min_size=r + 1, max_size=r + 1).map(Exponent)


same_r_pair = st.integers(0, 4).flatmap(lambda r: st.tuples(exponents(r), exponents(r)))
any_exponent = st.integers(0, 4).flatmap(exponents)


# -- elementary scale -----------------------------------------------------------


def test_elementary_scale_r0():
    assert elementary_scale(0, LogPoint.direct(Fraction(1, 2))) == (mpmath.mpf("0.5"),)


def test_elementary_scale_r2_at_e_minus_e():
    with mpmath.workdps(50):
        x = mpmath.exp(-mpmath.e)
        y = elementary_scale(2, LogPoint.direct(x), dps=40)
        assert abs(y[0] - x) < 1e-30
        assert abs(y[1] + mpmath.e) < 1e-30
        assert abs(y[2] - 1) < 1e-30


def test_elementary_scale_domain_error():
    # 1/e_2 = 1/e < 1/2 (for r = 1 the bound is 1 and x = 1/2 is admissible)
    with pytest.raises(DomainError):
        elementary_scale(2, LogPoint.direct(Fraction(1, 2)))
    assert len(elementary_scale(1, LogPoint.direct(Fraction(1, 2)))) == 2


def test_scale_bound():
    assert scale_bound(0) == mpmath.inf
    assert scale_bound(1) == 1
    with mpmath.workdps(40):
        assert abs(scale_bound(2) - 1 / mpmath.e) < 1e-25


def test_tower_point_matches_direct():
    u = Fraction(3, 2)
    x = mpmath.exp(-mpmath.exp(mpmath.mpf(1.5)))
    y_tower = elementary_scale(3, LogPoint.tower(u), dps=40)
    y_direct = elementary_scale(3, LogPoint.direct(x), dps=40)
    for a, b in zip(y_tower, y_direct):
        assert abs(a - b) < 1e-12 * max(1, abs(a))


def test_tower_level_and_tower_point_at():
    p = tower_point_at(2, 50)
    assert p.level == 3
    chain = p.chain(4, make_ctx(30))
    with mpmath.workdps(30):
        assert abs(chain.y(3) - 50) < 1e-20
        assert abs(chain.y(4) - mpmath.log(50)) < 1e-20
        # y_2 = exp(50) and y_1 = -exp(exp(50)) are still representable; x is not
        assert abs(chain.y(2) - mpmath.exp(50)) < 1e-20 * mpmath.exp(50)
        assert chain.y(1) < -mpmath.exp(10 ** 21)
    assert tower_point_at(0, 100).value == pytest.approx(float(mpmath.log(100)))


def test_logpoint_json_round_trip():
    for p in (LogPoint.direct(Fraction(1, 100)), LogPoint.tower(3.5), LogPoint.tower(7, level=4)):
        assert LogPoint.from_json(p.to_json()) == p
    assert LogPoint.direct(Fraction(1, 100)).to_json() == {"mode": "direct", "x": "1/100"}
    with pytest.raises(ValidationError):
        LogPoint.from_json({"mode": "polar", "x": 1})


# -- j(q), q_diff, limit table ------------------------------------------------


def test_jq_sigma_examples():
    assert jq_sigma(Exponent([0, 0, 3, -1])) == (2, 1)
    assert jq_sigma(Exponent([-2, 5])) == (0, -1)
    with pytest.raises(ZeroExponentError):
        jq_sigma(Exponent([0, 0]))


def test_q_diff_examples():
    assert q_diff(Exponent([0, 0, 3, -1])) == Exponent([-1, -1, 2, -1])
    assert q_diff(Exponent([5])) == Exponent([4])
    assert q_diff(Exponent([0, -2])) == Exponent([-1, -3])


def test_limit_class_examples():
    assert limit_class(Exponent([1, 0, 0])) is LimitClass.ZERO
    assert limit_class(Exponent([0, 2, 0])) is LimitClass.INFINITY
    assert limit_class(Exponent([0, 0, 0])) is LimitClass.ONE
    assert limit_class(Exponent([-1, 7])) is LimitClass.INFINITY
    assert limit_class(Exponent([0, -1, 9])) is LimitClass.ZERO


def test_compare_examples():
    assert compare(Exponent([1, -3]), Exponent([1, 0])) is Order.SMALLER
    assert compare(Exponent([2, 1]), Exponent([2, 1])) is Order.EQUAL
    assert compare(Exponent([0, 1]), Exponent([1, 0])) is Order.LARGER
    with pytest.raises(MismatchedScaleError):
        compare(Exponent([1]), Exponent([1, 0]))


@given(same_r_pair)
def test_compare_antisymmetric(pair):
    lam, mu = pair
    flipped = {Order.SMALLER: Order.LARGER, Order.LARGER: Order.SMALLER, Order.EQUAL: Order.EQUAL}
    assert compare(mu, lam) is flipped[compare(lam, mu)]


@given(st.integers(0, 3).flatmap(lambda r: st.tuples(exponents(r), exponents(r), exponents(r))))
def test_compare_transitive(triple):
    a, b, c = triple
    if compare(a, b) is Order.SMALLER and compare(b, c) is Order.SMALLER:
        assert compare(a, c) is Order.SMALLER


@given(any_exponent)
def test_limit_class_of_negation(q):
    swap = {LimitClass.ZERO: LimitClass.INFINITY, LimitClass.INFINITY: LimitClass.ZERO, LimitClass.ONE: LimitClass.ONE}
    assert limit_class(-q) is swap[limit_class(q)]


# -- evaluation ----------------------------------------------------------------


def test_eval_monomial_log_examples():
    x = "0.1353352832366126918939994949724844034076315459095758814681588726540733741"  # e^-2
    with mpmath.workdps(40):
        assert abs(eval_monomial_log(Exponent([1, 0]), LogPoint.direct(x))[0] + 2) < 1e-25
        assert abs(eval_monomial_log(Exponent([0, 1]), LogPoint.direct(x))[0] - mpmath.log(2)) < 1e-25
        assert abs(eval_monomial_log(Exponent([0, 0, -1]), LogPoint.tower(3))[0] + mpmath.log(3)) < 1e-25


@settings(max_examples=50)
@given(exponents(2), st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(1, 3), max_denominator=1000))
def test_eval_monomial_log_matches_textbook_recursion(q, x):
    got = eval_monomial_log(q, LogPoint.direct(x), dps=40)[0]
    assert abs(got - log_monomial_direct(q, x, dps=40)) < 1e-25 * (1 + abs(got))


# -- monomial sums -------------------------------------------------------------


def test_diff_examples():
    assert diff(MonomialSum.monomial([2, 0])) == MonomialSum(1, {Exponent([1, 0]): 2})
    assert diff(MonomialSum.monomial([0, 1])) == MonomialSum(1, {Exponent([-1, 0]): -1})
    assert diff(MonomialSum.monomial([1, 1])) == MonomialSum(1, {Exponent([0, 1]): 1, Exponent([0, 0]): -1})


def test_diff_matches_finite_differences():
    s = MonomialSum(1, {Exponent([0, 1]): 1, Exponent([Fraction(3, 2), -2]): 3})
    d = diff(s)
    ctx = make_ctx(40)
    x0, h = ctx.mpf("1e-4"), ctx.mpf("1e-14")
    fd = (s.evaluate(LogPoint.direct(x0 + h), dps=40) - s.evaluate(LogPoint.direct(x0 - h), dps=40)) / (2 * h)
    assert abs(d.evaluate(LogPoint.direct(x0), dps=40) - fd) < 1e-15 * abs(fd)


def test_leading_term_examples():
    assert leading_term(MonomialSum(1, {Exponent([1, 0]): 2, Exponent([0, 0]): -1})) == (-1, Exponent([0, 0]))
    assert leading_term(MonomialSum.monomial([3], 5)) == (5, Exponent([3]))
    with pytest.raises(EmptySumError):
        leading_term(MonomialSum(1, {}))


@given(any_exponent)
def test_diff_leading_term_property(q):
    if q.is_zero():
        return
    j, _ = jq_sigma(q)
    coeff, lead = leading_term(diff(MonomialSum.monomial(q)))
    assert lead == q_diff(q)
    assert abs(coeff) == abs(q[j])


@settings(max_examples=50)
@given(st.integers(0, 2).flatmap(lambda r: st.tuples(
    st.dictionaries(exponents(r), rationals, max_size=3),
    st.dictionaries(exponents(r), rationals, max_size=3),
    st.just(r))))
def test_leibniz_rule(data):
    a_terms, b_terms, r = data
    a, b = MonomialSum(r, a_terms), MonomialSum(r, b_terms)
    assert diff(a * b) == diff(a) * b + a * diff(b)


def test_monomial_sum_json_round_trip():
    s = MonomialSum(1, {Exponent([1, 0]): Fraction(2, 3), Exponent([0, -1]): -1})
    assert MonomialSum.from_json(s.to_json()) == s
    assert s.to_json()[0] == {"coeff": "-1", "exp": ["0", "-1"]}


def test_monomial_sum_cancels_zero_terms():
    s = MonomialSum(1, {Exponent([1, 0]): 1}) - MonomialSum(1, {Exponent([1, 0]): 1})
    assert len(s) == 0


def test_evaluate_relative_to_deep_tower():
    # ratio |d/dx |log x|| / |Y|^{q_diff} at a tower point with x far below float range
    q = Exponent([0, 1, 0])
    ratio = diff(MonomialSum.monomial(q)).evaluate(LogPoint.tower(1000), relative_to=q_diff(q))
    assert abs(abs(ratio) - 1) < 1e-20


def test_random_exponents_have_consistent_limits_and_diff():
    rng = random.Random(0)
    for _ in range(200):
        q = Exponent([Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(rng.randint(1, 4))])
        if q.is_zero():
            continue
        # monomial tends to 0 iff it is dominated by the constant 1
        assert (limit_class(q) is LimitClass.ZERO) == (compare(q, Exponent.zero(q.r)) is Order.SMALLER)
