import math
from fractions import Fraction

import gmpy2
import mpmath
import pytest
from gmpy2 import mpc, mpfr
from hypothesis import given, settings
from hypothesis import strategies as st

from kummerzero.errors import DomainError, PoleError
from kummerzero.precision import (
    BigComplex,
    PrecisionPolicy,
    compensated_sum,
    complex_gamma,
    nearest_nonpositive_integer,
    principal_log,
    principal_power,
    working,
)


def ulp(x: mpfr, bits: int) -> Fraction:
    exp, _ = gmpy2.frexp(x)
    return Fraction(2) ** (int(exp) - bits)


def _mpf(x: mpfr):
    num, den = x.as_integer_ratio()
    return mpmath.mpf(int(num)) / int(den)


def to_mpmath(value: BigComplex):
    return mpmath.mpc(_mpf(value.re), _mpf(value.im))


# -- BigComplex -------------------------------------------------------------


def test_precision_floor_is_53_bits():
    with pytest.raises(ValueError):
        BigComplex(mpfr(1), mpfr(0), 52)
    assert BigComplex.coerce(1.0, 10).precision_bits == 53


def test_arithmetic_uses_larger_precision():
    lo = BigComplex.coerce(1, 60)
    hi = BigComplex.coerce("0.1", 200)
    assert (lo + hi).precision_bits == 200
    assert (hi * lo).precision_bits == 200
    assert (lo / hi).precision_bits == 200


def test_coerce_string_keeps_precision():
    x = BigComplex.coerce("0.1", 300)
    with working(300):
        assert x.re == mpfr("0.1")


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        BigComplex.coerce(1) / 0


# -- policy -----------------------------------------------------------------


def test_policy_digits():
    policy = PrecisionPolicy()
    assert policy.digits_for(0) == 30
    assert policy.digits_for(10) == 30 + math.ceil(4.5)
    assert policy.digits_for(100j) == 75


@given(st.floats(0, 1e4), st.floats(0, 1e4))
def test_policy_monotone(a, b):
    policy = PrecisionPolicy()
    lo, hi = sorted((a, b))
    assert policy.digits_for(lo) <= policy.digits_for(hi)


def test_policy_env_override():
    assert PrecisionPolicy.from_env({"HYP_PRECISION_DIGITS": "50"}).base_decimal_digits == 50
    assert PrecisionPolicy.from_env({}).base_decimal_digits == 30
    with pytest.raises(ValueError):
        PrecisionPolicy.from_env({"HYP_PRECISION_DIGITS": "many"})


def test_integer_tolerance():
    # returns n when w is within 1e-12 of -n
    assert nearest_nonpositive_integer(-3 + 1e-13) == 3
    assert nearest_nonpositive_integer(-3 + 1e-11) is None
    assert nearest_nonpositive_integer(0) == 0
    assert nearest_nonpositive_integer(1) is None
    assert nearest_nonpositive_integer(-2 + 1e-13j) == 2


# -- gamma ------------------------------------------------------------------


def test_gamma_one():
    assert complex(complex_gamma(1)) == pytest.approx(1.0, abs=1e-30)


def test_gamma_half_is_sqrt_pi():
    value = complex_gamma(BigComplex.coerce(0.5, 200))
    with working(200):
        expected = gmpy2.sqrt(gmpy2.const_pi())
        assert abs(value.re - expected) < mpfr(2) ** -190
    assert value.im == 0


@pytest.mark.parametrize("z", [-1, 0, -7, -1 + 1e-13])
def test_gamma_poles(z):
    with pytest.raises(PoleError):
        complex_gamma(z)


@pytest.mark.parametrize(
    "z", ["2.5", "0.3+4j", "-2.7+0.1j", "-13.5-2j", "40+30j", "1e-5", "0.5+60j", "-0.999999+0j"]
)
def test_gamma_against_mpmath(z):
    bits = 200
    arg = BigComplex.coerce(z, bits)
    value = complex_gamma(arg)
    mpmath.mp.prec = bits + 60
    oracle = mpmath.gamma(to_mpmath(arg))
    digits = bits * math.log10(2)
    assert abs(to_mpmath(value) - oracle) / abs(oracle) < mpmath.mpf(10) ** -(digits - 5)


@settings(max_examples=60, deadline=None)
@given(st.floats(-30, 30), st.floats(-30, 30))
def test_gamma_recurrence(x, y):
    z = complex(x, y)
    if nearest_nonpositive_integer(z, 1e-6) is not None or nearest_nonpositive_integer(z + 1, 1e-6) is not None:
        return
    bits = 128
    arg = BigComplex.coerce(z, bits)
    g = complex_gamma(arg)
    g1 = complex_gamma(arg + 1)
    with working(bits):
        lhs = g1.mpc
        rhs = arg.mpc * g.mpc
        assert abs(lhs - rhs) <= 10 * abs(lhs) * mpfr(2) ** (1 - bits)


# -- logarithm --------------------------------------------------------------


def test_log_minus_one():
    value = principal_log(-1)
    assert value.re == 0
    assert float(value.im) == pytest.approx(math.pi, abs=1e-300)


def test_log_minus_one_negative_zero():
    assert float(principal_log(BigComplex(mpfr(-1), mpfr("-0.0"), 53)).im) == math.pi


def test_log_e_and_axis():
    with working(100):
        e = gmpy2.exp(mpfr(1))
    assert float(principal_log(BigComplex(e, mpfr(0), 100)).re) == pytest.approx(1.0, abs=1e-28)
    value = principal_log(2j)
    assert complex(value) == pytest.approx(complex(math.log(2), math.pi / 2), abs=1e-15)


def test_log_zero():
    with pytest.raises(DomainError):
        principal_log(0)


@settings(max_examples=80)
@given(st.floats(-50, 50), st.floats(-math.pi + 1e-9, math.pi))
def test_log_inverts_exp(x, y):
    bits = 128
    with working(bits):
        w = mpc(x, y)
        value = principal_log(BigComplex.from_mpc(gmpy2.exp(w), bits), bits).mpc
        assert abs(value - w) <= 10 * max(abs(w), 1) * mpfr(2) ** (1 - bits)


def test_principal_power():
    assert complex(principal_power(-1, 0.5)) == pytest.approx(1j, abs=1e-15)
    assert complex(principal_power(2j, 0)) == 1


# -- summation --------------------------------------------------------------


def test_empty_sum():
    total = compensated_sum([])
    assert total.re == 0 and total.im == 0


def test_cancellation():
    with working(200):
        terms = [mpfr(1), mpfr(-1), mpfr("1e-30")]
        total = compensated_sum(terms, 200)
        assert total.re == mpfr("1e-30")


def test_million_tenths_within_two_ulp():
    bits = 53
    total = compensated_sum([0.1] * 10**6, bits)
    exact = Fraction(0.1) * 10**6
    assert abs(Fraction(*total.re.as_integer_ratio()) - exact) <= 2 * ulp(total.re, bits)
    assert float(total.re) == 100000.0


@settings(max_examples=40)
@given(st.lists(st.complex_numbers(max_magnitude=1e10, allow_nan=False, allow_infinity=False), max_size=30), st.randoms())
def test_sum_order_independent(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    a = compensated_sum(values)
    b = compensated_sum(shuffled)
    assert (a.re, a.im) == (b.re, b.im)


@settings(max_examples=40)
@given(st.lists(st.floats(-1e6, 1e6), max_size=40))
def test_sum_matches_rational_oracle(values):
    total = compensated_sum(values, 80)
    exact = sum((Fraction(v) for v in values), Fraction(0))
    got = Fraction(*total.re.as_integer_ratio())
    if exact == 0:
        assert got == 0
    else:
        assert abs(got - exact) <= ulp(total.re, 80)
