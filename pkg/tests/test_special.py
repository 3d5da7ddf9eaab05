import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobipoly.special import (
    SeriesParameters,
    SingularParameterError,
    basic_hypergeometric_phi,
    hyp,
    hypergeometric_F,
    log_pochhammer,
    pochhammer,
    pochhammer_array,
    q_pochhammer,
    q_pochhammer_array,
    q_pochhammer_inf,
    series_condition,
)

EPS = np.finfo(float).eps


def exact_hyper(num, den, z):
    """Terminating rFs summed in rational arithmetic."""
    num = [Fraction(a) for a in num]
    den = [Fraction(b) for b in den]
    z = Fraction(z)
    total, term, k = Fraction(1), Fraction(1), 0
    while True:
        factor = z / (k + 1)
        for a in num:
            factor *= a + k
        for b in den:
            factor /= b + k
        term *= factor
        if term == 0:
            return float(total)
        total += term
        k += 1


def forward_and_condition(p, fn):
    with series_condition() as log:
        value = fn(p)
    return value, float(np.max(log[-1][1]))


def test_pochhammer_examples():
    assert pochhammer(3, 0) == 1
    assert pochhammer(1, 5) == 120
    assert pochhammer(-2, 4) == 0


def test_pochhammer_large_n_stays_in_log_space():
    logabs, sign = log_pochhammer(1.5, 10_000)
    assert sign == 1
    assert logabs == pytest.approx(float(mpmath.log(mpmath.rf(1.5, 10_000))), rel=1e-13)


def test_q_pochhammer_examples():
    assert q_pochhammer(0.5, 0.5, 1) == 0.5
    assert q_pochhammer(0.3, 0.7, 0) == 1
    assert q_pochhammer(1.0, 0.7, 4) == 0


def test_q_pochhammer_rejects_q_outside_unit_interval():
    with pytest.raises(ValueError):
        q_pochhammer(0.5, 1.0, 2)
    with pytest.raises(ValueError):
        q_pochhammer(0.5, -0.2, 2)


def test_q_pochhammer_infinite_product():
    assert q_pochhammer_inf(0.3, 0.5) == pytest.approx(float(mpmath.qp(0.3, 0.5)), rel=1e-14)


def test_pochhammer_arrays_match_scalars():
    arr = pochhammer_array(0.7, 6)
    assert np.allclose(arr, [pochhammer(0.7, n) for n in range(7)], rtol=1e-14)
    qarr = q_pochhammer_array(0.4, 0.6, 6)
    assert np.allclose(qarr, [q_pochhammer(0.4, 0.6, n) for n in range(7)], rtol=1e-14)


def test_2F1_krawtchouk_value():
    # P_1 at eta = 1 for p = 1/2, N = 2
    v = hypergeometric_F(SeriesParameters((-1, -1), (-2,), 2.0))
    assert abs(v) < 1e-15


def test_zero_numerator_gives_one():
    assert hypergeometric_F(SeriesParameters((0, 3.2), (1.5,), 0.9)) == 1


def test_2F0_charlier_value():
    assert hypergeometric_F(SeriesParameters((-2, -2), (), -1.0)) == pytest.approx(-1.0, abs=1e-15)


def test_terminating_series_against_mpmath():
    v = hypergeometric_F(SeriesParameters((-5, 2.5, 0.3), (1.7, -8.5), 0.9))
    ref = mpmath.hyper([-5, 2.5, 0.3], [1.7, -8.5], 0.9)
    assert v == pytest.approx(float(ref), rel=1e-13)


def test_nonterminating_series_against_mpmath():
    v = hypergeometric_F(SeriesParameters((0.5, 1.5), (2.5,), 0.4))
    assert v == pytest.approx(float(mpmath.hyp2f1(0.5, 1.5, 2.5, 0.4)), rel=1e-14)


def test_denominator_zero_before_termination():
    with pytest.raises(SingularParameterError):
        hypergeometric_F(SeriesParameters((-5, 1.0), (-2,), 1.0))


def test_basic_series_leading_one():
    assert basic_hypergeometric_phi(SeriesParameters((1.0, 0.3), (0.2,), 0.5, q_base=0.5)) == 1


def test_basic_series_zero_argument():
    assert basic_hypergeometric_phi(SeriesParameters((0.4, 0.3), (0.2,), 0.0, q_base=0.5)) == 1


def test_basic_series_two_terms():
    q = 0.5
    v = basic_hypergeometric_phi(SeriesParameters((1 / q, 1 / q), (q**-2,), q, q_base=q))
    # n = 0 and n = 1 terms; (q^-1; q)_2 = 0 ends the sum
    term1 = (1 - 1 / q) ** 2 / ((1 - q**-2) * (1 - q)) * q
    assert v == pytest.approx(1 + term1, rel=1e-15)


def test_basic_series_against_mpmath():
    q = 0.6
    v = basic_hypergeometric_phi(SeriesParameters((q**-4, 0.3, 0.7), (0.2, 0.5), q, q_base=q))
    ref = mpmath.qhyper([q**-4, 0.3, 0.7], [0.2, 0.5], q, q)
    assert v == pytest.approx(float(ref), rel=1e-12)


def test_basic_series_convention_for_r_less_than_s_plus_1():
    # 1phi1 carries the extra (-1)^n q^{n(n-1)/2} factor
    q, z = 0.4, 0.3
    v = basic_hypergeometric_phi(SeriesParameters((q**-3,), (0.2,), z, q_base=q))
    assert v == pytest.approx(float(mpmath.qhyper([q**-3], [0.2], q, z)), rel=1e-13)


def test_series_broadcasts_over_arrays():
    x = np.arange(5)
    v = hyp((-3, -x.astype(float)), (-6,), 2.0)
    ref = [exact_hyper([-3, -int(xi)], [-6], 2) for xi in x]
    assert np.allclose(v, ref, rtol=1e-14, atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.floats(-20, 20, allow_nan=False), st.integers(0, 1000))
def test_pochhammer_step(a, n):
    la, sa = log_pochhammer(a, n)
    lb, sb = log_pochhammer(a, n + 1)
    factor = a + n
    if factor == 0 or sa == 0:
        assert sb == 0
        return
    assert sb == sa * math.copysign(1, factor)
    assert lb - la == pytest.approx(math.log(abs(factor)), abs=1e-14 * max(1.0, abs(lb)))


@settings(max_examples=60, deadline=None)
@given(st.floats(-3, 3, allow_nan=False), st.floats(0.05, 0.95), st.integers(0, 1000))
def test_q_pochhammer_step(a, q, n):
    v0 = q_pochhammer(a, q, n)
    v1 = q_pochhammer(a, q, n + 1)
    assert v1 == pytest.approx(v0 * (1 - a * q**n), rel=1e-12, abs=1e-300)


# Forward and backward sums agree to a relative 1e-12 where the series is
# well conditioned; under cancellation the attainable agreement is a few
# ulps of the sum of absolute terms, which is what the second term allows.
@settings(max_examples=80, deadline=None)
@given(st.integers(0, 12), st.floats(0.1, 5), st.floats(0.1, 5), st.floats(-2, 2))
def test_forward_equals_horner(n, b, c, z):
    p = SeriesParameters((-n, b), (c,), z)
    fwd, abssum = forward_and_condition(p, hypergeometric_F)
    back = hypergeometric_F(p, method="horner")
    assert abs(fwd - back) <= 1e-12 * abs(fwd) + 64 * EPS * abssum


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10), st.floats(0.1, 0.9), st.floats(0.05, 0.9), st.floats(0.05, 0.9))
def test_forward_equals_horner_basic(n, q, b, c):
    p = SeriesParameters((q**-n, b), (c,), q, q_base=q)
    fwd, abssum = forward_and_condition(p, basic_hypergeometric_phi)
    back = basic_hypergeometric_phi(p, method="horner")
    assert abs(fwd - back) <= 1e-12 * abs(fwd) + 64 * EPS * abssum


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10), st.integers(-6, 6), st.integers(1, 9), st.integers(-3, 3))
def test_forward_matches_exact_rational_sum(n, b, c, z):
    p = SeriesParameters((-n, b + 0.5), (c + 0.5,), float(z))
    fwd, abssum = forward_and_condition(p, hypergeometric_F)
    ref = exact_hyper([-n, Fraction(2 * b + 1, 2)], [Fraction(2 * c + 1, 2)], z)
    assert abs(fwd - ref) <= 1e-12 * abs(ref) + 64 * EPS * abssum
