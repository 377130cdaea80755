import cmath
import math
from fractions import Fraction

import gmpy2
import mpmath
import pytest
from gmpy2 import mpc
from hypothesis import given, settings
from hypothesis import strategies as st

from kummerzero.errors import InvalidParameters
from kummerzero.kummer import Method, ParamClass, classify, coefficient_ratio_stream, derivative, evaluate
from kummerzero.precision import working


def exact_coefficients(alpha: Fraction, gamma: Fraction, m_max: int) -> list[Fraction]:
    out = [Fraction(1)]
    for m in range(m_max):
        out.append(out[-1] * (alpha + m) / ((gamma + m) * (m + 1)))
    return out


def oracle(alpha, gamma, z, dps=60):
    mpmath.mp.dps = dps
    return complex(mpmath.hyp1f1(alpha, gamma, z))


# -- classification ---------------------------------------------------------


@pytest.mark.parametrize(
    "alpha, gamma, kind",
    [
        (1, 2, ParamClass.GENERIC),
        (1.5, 1.5, ParamClass.EXPONENTIAL),
        (0.5, -1, ParamClass.INVALID_GAMMA),
        (-2, 1, ParamClass.POLYNOMIAL),
        (2.5, 1.5, ParamClass.EXPONENTIAL),
        (-1, -3, ParamClass.INVALID_GAMMA),  # gamma check wins
        (-1, 0.5, ParamClass.POLYNOMIAL),
        (0.5 + 1e-13, -0.5, ParamClass.EXPONENTIAL),
        (1 + 0.3j, 2 + 0.2j, ParamClass.GENERIC),
    ],
)
def test_classify(alpha, gamma, kind):
    assert classify(alpha, gamma).kind is kind


@settings(max_examples=200)
@given(st.integers(-6, 6), st.integers(-6, 6), st.floats(-1e-13, 1e-13))
def test_classify_integer_lattice(a, g, jitter):
    params = classify(a + jitter, g)
    if g <= 0:
        assert params.kind is ParamClass.INVALID_GAMMA
    elif a <= 0:
        assert params.kind is ParamClass.POLYNOMIAL
    elif g - a <= 0:
        assert params.kind is ParamClass.EXPONENTIAL
    else:
        assert params.is_generic


def test_degeneracy_messages():
    with pytest.raises(InvalidParameters, match="degenerate: gamma-alpha nonpositive integer"):
        classify(1.5, 1.5).require_generic()
    with pytest.raises(InvalidParameters, match="invalid: gamma"):
        evaluate(classify(0.5, -1), 1)


# -- coefficients -----------------------------------------------------------


def test_coefficients_one_two():
    values = [complex(c) for c in coefficient_ratio_stream(classify(1, 2), 2)]
    assert values == [1, 0.5, pytest.approx(1 / 6, rel=1e-16)]


def test_coefficients_equal_parameters():
    values = [complex(c) for c in coefficient_ratio_stream(classify(0.7 + 0.2j, 0.7 + 0.2j), 3)]
    assert values == pytest.approx([1, 1, 0.5, 1 / 6], rel=1e-15)


def test_coefficients_truncate_for_polynomial():
    values = [complex(c) for c in coefficient_ratio_stream(classify(-2, 1), 3)]
    assert values == [1, -2, 0.5, 0]


def test_coefficients_match_rational_oracle():
    exact = exact_coefficients(Fraction(3, 4), Fraction(5, 2), 60)
    got = coefficient_ratio_stream(classify(0.75, 2.5), 60, precision_bits=200)
    for e, g in zip(exact, got):
        assert abs(Fraction(*g.re.as_integer_ratio()) - e) <= abs(e) * Fraction(1, 2**190)


def test_coefficients_reject_invalid_gamma():
    with pytest.raises(InvalidParameters):
        coefficient_ratio_stream(classify(1, -2), 3)


# -- evaluation -------------------------------------------------------------


def test_value_at_origin():
    result = evaluate(classify(1, 2), 0)
    assert complex(result) == 1
    assert result.method is Method.DIRECT_SERIES


def test_e_minus_one():
    assert complex(evaluate(classify(1, 2), 1)) == pytest.approx(math.e - 1, abs=1e-15)


def test_exponential_case():
    assert complex(evaluate(classify(1.5, 1.5), 2)) == pytest.approx(math.exp(2), rel=1e-15)


def test_polynomial_case_exact():
    result = evaluate(classify(-2, 1), 1)
    assert result.method is Method.POLYNOMIAL_SUM
    assert result.terms_used <= 3
    assert result.value.re == -0.5 and result.value.im == 0


@pytest.mark.parametrize("n", [1, 3, 7])
@pytest.mark.parametrize("z", [Fraction(3, 2), Fraction(-7, 4), Fraction(10)])
def test_polynomial_against_rationals(n, z):
    gamma = Fraction(5, 2)
    coeffs = exact_coefficients(Fraction(-n), gamma, n)
    exact = sum(c * z**m for m, c in enumerate(coeffs))
    result = evaluate(classify(-n, 2.5), float(z))
    assert result.terms_used <= n + 1
    got = Fraction(*result.value.re.as_integer_ratio())
    assert abs(got - exact) <= result.abs_error_estimate


@pytest.mark.parametrize(
    "alpha, gamma, z",
    [
        (1, 2, -30),
        (0.5, 1.5, 12 - 40j),
        (1 + 0.3j, 2 + 0.2j, -25 + 60j),
        (2.5, 4, 80j),
        (0.5, 1.5, -100 + 5j),
        (-0.3 + 2j, 0.7 - 1j, 7 + 7j),
    ],
)
def test_against_mpmath(alpha, gamma, z):
    result = evaluate(classify(alpha, gamma), z)
    expected = oracle(alpha, gamma, z)
    assert abs(complex(result) - expected) <= max(result.abs_error_estimate, 4e-16 * abs(expected))
    assert result.abs_error_estimate <= 1e-20 * max(1.0, result.max_term)


def test_method_selection():
    params = classify(0.5, 1.5)
    assert evaluate(params, -1e-30 + 3j).method is Method.TRANSFORMED_SERIES
    assert evaluate(params, 3j).method is Method.DIRECT_SERIES
    assert evaluate(params, 3).method is Method.DIRECT_SERIES


def test_error_estimate_finite_nonnegative():
    for z in (0, 1, -50, 100j, -3 + 4j):
        err = evaluate(classify(0.3, 1.7), z).abs_error_estimate
        assert 0 <= err < math.inf


def test_forced_polynomial_needs_polynomial_case():
    with pytest.raises(InvalidParameters):
        evaluate(classify(1, 2), 1, method=Method.POLYNOMIAL_SUM)


@settings(max_examples=40, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20))
def test_conjugate_symmetry(x, y):
    params = classify(0.5, 1.5)
    a = evaluate(params, complex(x, y))
    b = evaluate(params, complex(x, -y))
    bits = a.value.precision_bits
    assert a.value.re == b.value.re or abs(a.value.re - b.value.re) <= 4 * abs(a.value.mpc) * 2.0 ** (-bits)
    assert abs(a.value.im + b.value.im) <= 4 * abs(a.value.mpc) * 2.0 ** (-bits)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 20), st.floats(-math.pi, math.pi))
def test_kummer_transform_consistency(radius, angle):
    params = classify(1 + 0.3j, 2 + 0.2j)
    z = cmath.rect(radius, angle)
    direct = evaluate(params, z, method=Method.DIRECT_SERIES)
    transformed = evaluate(params, z, method=Method.TRANSFORMED_SERIES)
    gap = abs(direct.value.mpc - transformed.value.mpc)
    assert gap <= 10 * (direct.abs_error_estimate + transformed.abs_error_estimate)


# -- derivative -------------------------------------------------------------


def test_derivative_at_origin():
    assert complex(derivative(classify(1, 2), 0)) == 0.5


def test_derivative_exponential_case():
    assert complex(derivative(classify(1.5, 1.5), 2)) == pytest.approx(math.exp(2), rel=1e-15)


def test_derivative_finite_difference():
    params = classify(1, 2)
    h = 1e-8
    fd = (complex(evaluate(params, 1 + h)) - complex(evaluate(params, 1 - h))) / (2 * h)
    assert complex(derivative(params, 1)) == pytest.approx(fd, abs=1e-6)


def test_second_derivative_against_mpmath():
    mpmath.mp.dps = 50
    expected = complex(mpmath.diff(lambda t: mpmath.hyp1f1(0.5, 1.5, t), 2 + 3j, 2))
    got = derivative(classify(0.5, 1.5), 2 + 3j, order=2)
    assert abs(complex(got) - expected) < 1e-25


def test_ode_residual():
    alpha, gamma, z = 1 + 0.3j, 2 + 0.2j, -4 + 6j
    params = classify(alpha, gamma)
    f, f1, f2 = (derivative(params, z, order=k) for k in range(3))
    with working(300):
        residual = abs(mpc(z) * f2.value.mpc + (mpc(gamma) - mpc(z)) * f1.value.mpc - mpc(alpha) * f.value.mpc)
    budget = abs(z) * f2.abs_error_estimate + abs(gamma - z) * f1.abs_error_estimate + abs(alpha) * f.abs_error_estimate
    assert residual <= budget
    assert gmpy2.is_finite(residual)
