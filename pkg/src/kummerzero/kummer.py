"""Evaluation of the Kummer function 1F1(alpha; gamma; z) and its derivatives."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc

from .errors import InvalidParameters
from .precision import (
    DEFAULT_POLICY,
    LOG2_10,
    BigComplex,
    PrecisionPolicy,
    as_mpc,
    nearest_nonpositive_integer,
    working,
)

GUARD_BITS = 24
MAX_TERMS = 200_000


class ParamClass(enum.Enum):
    GENERIC = "Generic"
    POLYNOMIAL = "PolynomialCase"
    EXPONENTIAL = "ExponentialCase"
    INVALID_GAMMA = "InvalidGamma"


class Method(enum.Enum):
    DIRECT_SERIES = "DirectSeries"
    TRANSFORMED_SERIES = "TransformedSeries"
    POLYNOMIAL_SUM = "PolynomialSum"


_DEGENERACY_MESSAGES = {
    ParamClass.INVALID_GAMMA: "invalid: gamma nonpositive integer",
    ParamClass.POLYNOMIAL: "degenerate: alpha nonpositive integer",
    ParamClass.EXPONENTIAL: "degenerate: gamma-alpha nonpositive integer",
}


@dataclass(frozen=True)
class Parameters:
    alpha: complex
    gamma: complex
    kind: ParamClass

    @property
    def is_generic(self) -> bool:
        return self.kind is ParamClass.GENERIC

    def require_valid(self) -> None:
        if self.kind is ParamClass.INVALID_GAMMA:
            raise InvalidParameters(_DEGENERACY_MESSAGES[self.kind])

    def require_generic(self) -> None:
        if self.kind is not ParamClass.GENERIC:
            raise InvalidParameters(_DEGENERACY_MESSAGES[self.kind])

    @property
    def polynomial_degree(self) -> int | None:
        if self.kind is not ParamClass.POLYNOMIAL:
            return None
        return nearest_nonpositive_integer(self.alpha)


def classify(alpha, gamma) -> Parameters:
    alpha = complex(alpha)
    gamma = complex(gamma)
    if nearest_nonpositive_integer(gamma) is not None:
        kind = ParamClass.INVALID_GAMMA
    elif nearest_nonpositive_integer(alpha) is not None:
        kind = ParamClass.POLYNOMIAL
    elif nearest_nonpositive_integer(gamma - alpha) is not None:
        kind = ParamClass.EXPONENTIAL
    else:
        kind = ParamClass.GENERIC
    return Parameters(alpha, gamma, kind)


def _as_parameters(params) -> Parameters:
    if isinstance(params, Parameters):
        return params
    alpha, gamma = params
    return classify(alpha, gamma)


@dataclass(frozen=True)
class EvalResult:
    value: BigComplex
    abs_error_estimate: float
    method: Method
    terms_used: int
    max_term: float = 1.0  # largest |term| seen; the local scale of the series

    def __complex__(self):
        return complex(self.value)


def coefficient_ratio_stream(params, m_max: int, precision_bits: int = 128) -> list[BigComplex]:
    """Taylor coefficients (alpha)_m / ((gamma)_m m!) for m = 0..m_max.

    Built by the multiplicative recurrence; gamma quotients would overflow.
    """
    params = _as_parameters(params)
    params.require_valid()
    if m_max < 0:
        raise ValueError("m_max must be nonnegative")
    bits = max(53, precision_bits)
    out = []
    with working(bits):
        a = mpc(params.alpha)
        c = mpc(params.gamma)
        coeff = mpc(1)
        out.append(BigComplex.from_mpc(coeff, bits))
        for m in range(m_max):
            coeff = coeff * (a + m) / ((c + m) * (m + 1))
            out.append(BigComplex.from_mpc(coeff, bits))
    return out


def _tail_ratio(m: int, z_abs: float, alpha_gamma_gap: float, gamma_abs: float) -> float:
    """Upper bound for |t_{k+1}/t_k| valid for every k >= m (needs m > |gamma|)."""
    return z_abs * (1.0 + alpha_gamma_gap / (m - gamma_abs)) / (m + 1)


def _sum_series(a, c, z, bits: int, eps_bits: float, n_terms: int | None = None):
    """Sum the hypergeometric series at the current context precision.

    Returns (sum, truncation_bound, max_term_abs, terms_used). With
    ``n_terms`` the sum is finite and the truncation bound is zero.
    """
    a_c = complex(a)
    c_c = complex(c)
    gap = abs(a_c - c_c)
    c_abs = abs(c_c)
    z_abs = float(abs(z))
    eps = 2.0 ** (-eps_bits)
    noise = 2.0 ** (-bits)

    term = mpc(1)
    total = mpc(1)
    max_term = 1.0
    small_run = 0
    m = 0
    while True:
        if n_terms is not None and m + 1 >= n_terms:
            return total, 0.0, max_term, m + 1
        term = term * (a + m) * z / ((c + m) * (m + 1))
        total += term
        m += 1
        t_abs = float(abs(term))
        if t_abs > max_term:
            max_term = t_abs
        if n_terms is not None:
            continue
        scale = max(float(abs(total)), max_term * noise)
        if t_abs == 0.0 and (a_c + m - 1) == 0:
            return total, 0.0, max_term, m + 1
        if t_abs < eps * scale:
            small_run += 1
        else:
            small_run = 0
        if small_run >= 3 and m > c_abs + 1:
            rho = _tail_ratio(m, z_abs, gap, c_abs)
            if rho < 0.5:
                tail = t_abs * rho / (1.0 - rho)
                if tail < eps * scale:
                    return total, tail, max_term, m + 1
        if m > MAX_TERMS:
            raise RuntimeError("hypergeometric series failed to converge")


def evaluate(params, z, policy: PrecisionPolicy = DEFAULT_POLICY, method: Method | None = None) -> EvalResult:
    """1F1(alpha; gamma; z) with an absolute error estimate.

    The direct Taylor series is used for ``Re z >= 0``; for ``Re z < 0`` the
    Kummer transformation ``e^z 1F1(gamma - alpha; gamma; -z)`` keeps the
    summed series growing instead of alternating. Passing ``method`` forces
    a path (used to cross-check the two).
    """
    params = _as_parameters(params)
    params.require_valid()
    z_c = complex(z)
    digits = policy.digits_for(abs(z_c))
    nominal = math.ceil(digits * LOG2_10)
    bits = nominal + GUARD_BITS
    eps_bits = max(10.0, (digits - 10) * LOG2_10)

    degree = params.polynomial_degree
    if method is None:
        if degree is not None:
            method = Method.POLYNOMIAL_SUM
        elif z_c.real < 0:
            method = Method.TRANSFORMED_SERIES
        else:
            method = Method.DIRECT_SERIES
    elif method is Method.POLYNOMIAL_SUM and degree is None:
        raise InvalidParameters("polynomial summation needs alpha in Z<=0")

    with working(bits):
        zz = as_mpc(z, bits)
        a = mpc(params.alpha)
        c = mpc(params.gamma)
        if method is Method.POLYNOMIAL_SUM:
            total, trunc, max_term, used = _sum_series(a, c, zz, bits, eps_bits, n_terms=degree + 1)
            value = total
            error = trunc + used * 4 * max_term * 2.0 ** (-nominal)
        elif method is Method.DIRECT_SERIES:
            total, trunc, max_term, used = _sum_series(a, c, zz, bits, eps_bits)
            value = total
            error = trunc + used * 4 * max_term * 2.0 ** (-nominal)
        else:
            total, trunc, max_term, used = _sum_series(c - a, c, -zz, bits, eps_bits)
            scale = gmpy2.exp(zz)
            value = scale * total
            scale_abs = float(abs(scale))
            error = scale_abs * (trunc + used * 4 * max_term * 2.0 ** (-nominal))
            max_term *= scale_abs
        error += float(abs(value)) * 2.0 ** (-nominal)
    return EvalResult(BigComplex.from_mpc(value, nominal), error, method, used, max_term)


def shifted(params: Parameters, order: int = 1) -> Parameters:
    return classify(params.alpha + order, params.gamma + order)


def derivative(params, z, policy: PrecisionPolicy = DEFAULT_POLICY, order: int = 1) -> EvalResult:
    """d^order/dz^order 1F1 via (alpha)_k/(gamma)_k * 1F1(alpha+k; gamma+k; z)."""
    params = _as_parameters(params)
    params.require_valid()
    if order < 0:
        raise ValueError("order must be nonnegative")
    if order == 0:
        return evaluate(params, z, policy)
    factor = complex(1.0)
    for k in range(order):
        factor *= (params.alpha + k) / (params.gamma + k)
    inner = evaluate(shifted(params, order), z, policy)
    bits = inner.value.precision_bits
    with working(bits + GUARD_BITS):
        f = mpc(1)
        for k in range(order):
            f *= (mpc(params.alpha) + k) / (mpc(params.gamma) + k)
        value = f * inner.value.mpc
    error = abs(factor) * inner.abs_error_estimate + float(abs(value)) * 2.0 ** (-bits)
    return EvalResult(
        BigComplex.from_mpc(value, bits), error, inner.method, inner.terms_used, abs(factor) * inner.max_term
    )
