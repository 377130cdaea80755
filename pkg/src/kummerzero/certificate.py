"""Explicit linear lower bound |z_n| >= M n for the zeros of 1F1.

The constants come from bounding the Taylor coefficients,
``|(alpha)_m / (gamma)_m| <= C * beta**m``, which gives
``mean |f(r e^{it})| <= C e^{beta r}``. Combined with Jensen's formula this
yields ``(r/|z_n|)^n <= C e^{beta r}`` for every r, and the choice
``r = n / beta`` gives ``|z_n| >= n / (C e beta)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr

from .errors import BoundViolation, CertificateError, TheoremViolation
from .kummer import ParamClass, Parameters, classify, coefficient_ratio_stream
from .precision import nearest_nonpositive_integer, working
from .zeros import ZeroSet

J_SEARCH_CAP = 10**6
_BITS = 192


class CaseTag(enum.Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"
    CASE3A = "Case3a"
    CASE3B = "Case3b"


@dataclass(frozen=True)
class BoundCertificate:
    params: Parameters
    case_tag: CaseTag
    j: int
    C: float
    beta: int
    M: float

    def majorant(self, r: float) -> float:
        """C e^{beta r}, the bound on the circle mean of |f|."""
        return self.C * math.exp(self.beta * r)

    def log_majorant(self, r: float) -> float:
        return math.log(self.C) + self.beta * r


def _smallest_j(predicate) -> int:
    for j in range(1, J_SEARCH_CAP + 1):
        if predicate(j):
            return j
    raise CertificateError(f"no admissible index j below {J_SEARCH_CAP}")


def _round_up(x) -> float:
    value = float(x)
    if value < x:
        value = math.nextafter(value, math.inf)
    return value


def _require_zeros_possible(params: Parameters) -> None:
    """The construction needs only a valid gamma; it is refused where f has no zeros.

    alpha = gamma gives e^z and alpha = 0 gives 1. Other degenerate classes
    (a polynomial, or e^z times a polynomial) have finitely many zeros and
    the bound still applies to them.
    """
    params.require_valid()
    zero_free = (params.kind is ParamClass.EXPONENTIAL and nearest_nonpositive_integer(params.gamma - params.alpha) == 0) or (
        params.kind is ParamClass.POLYNOMIAL and params.polynomial_degree == 0
    )
    if zero_free:
        params.require_generic()  # raises with the class-specific message


def certify(params) -> BoundCertificate:
    """Build (case, j, C, beta, M) from alpha and gamma alone."""
    if not isinstance(params, Parameters):
        params = classify(*params)
    _require_zeros_possible(params)
    alpha, gamma = params.alpha, params.gamma

    def dist_a(j):
        return abs(alpha + j)

    def dist_g(j):
        return abs(gamma + j)

    # exact float comparison on the stored real parts
    if alpha.real < gamma.real:
        tag = CaseTag.CASE1
        j = _smallest_j(lambda j: alpha.real + j > 0 and dist_a(j) < dist_g(j))
    elif alpha.real > gamma.real:
        tag = CaseTag.CASE2
        j = _smallest_j(lambda j: gamma.real + j > 0 and dist_a(j) > dist_g(j))
    else:
        j = _smallest_j(lambda j: alpha.real + j > 0)
        # |alpha+j|^2 - |gamma+j|^2 = |Im alpha|^2 - |Im gamma|^2 does not depend on j
        with working(_BITS):
            a2 = gmpy2.norm(mpc(alpha) + j)
            g2 = gmpy2.norm(mpc(gamma) + j)
        tag = CaseTag.CASE3A if a2 <= g2 else CaseTag.CASE3B

    with working(_BITS):
        a = mpc(alpha)
        g = mpc(gamma)
        ratio = mpc(1)
        largest = mpfr(0)
        for i in range(j):
            ratio = ratio * (a + i) / (g + i)
            largest = max(largest, abs(ratio))
        c_exact = 1 + largest
        C = _round_up(c_exact)

        if tag in (CaseTag.CASE1, CaseTag.CASE3A):
            beta = 1
        else:
            top = abs(a + j)
            bottom = abs(g + j)
            beta = 2
            while not beta * bottom > top:
                beta += 1
    M = 1.0 / (C * math.e * beta)
    return BoundCertificate(params, tag, j, C, beta, M)


@dataclass(frozen=True)
class CoefficientBoundReport:
    m_max: int
    max_ratio: float
    argmax: int

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1.0


def coefficient_bound_check(cert: BoundCertificate, m_max: int) -> CoefficientBoundReport:
    """max over m <= m_max of |(alpha)_m/(gamma)_m| / (C beta^m); must be <= 1."""
    if m_max < 0:
        raise ValueError("m_max must be nonnegative")
    coefficients = coefficient_ratio_stream(cert.params, m_max, precision_bits=_BITS)
    worst = None
    argmax = 0
    with working(_BITS):
        scale = mpfr(cert.C)
        factorial = mpfr(1)
        for m, coeff in enumerate(coefficients):
            if m:
                factorial *= m
                scale *= cert.beta
            ratio = abs(coeff.mpc) * factorial / scale
            if worst is None or ratio > worst:
                worst, argmax = ratio, m
            if ratio > 1:
                raise BoundViolation(f"|(a)_m/(g)_m| exceeds C*beta^m at m={m}", m)
    return CoefficientBoundReport(m_max, float(worst), argmax)


def optimize_radius(n: int, cert: BoundCertificate) -> tuple[float, float]:
    """Maximiser r* = n/beta of r^n / (C e^{beta r}) and the resulting bound on |z_n|."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    r_star = n / cert.beta
    bound = cert.C ** (-1.0 / n) * n / (math.e * cert.beta)
    return r_star, bound


def log_h(r: float, n: int, cert: BoundCertificate) -> float:
    """log of H(r) = r^n / (C e^{beta r})."""
    return n * math.log(r) - math.log(cert.C) - cert.beta * r


@dataclass(frozen=True)
class BoundReport:
    M: float
    n_checked: int
    min_slack: float | None  # min_n |z_n|/n
    argmin: int | None
    violations: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def verify_bound(cert: BoundCertificate, zeros: ZeroSet, strict: bool = True) -> BoundReport:
    """Check |z_n| >= M n along the modulus-ordered zero sequence."""
    if zeros.params != cert.params:
        raise ValueError("certificate and zero set belong to different parameters")
    moduli = zeros.moduli()
    violations = tuple(n for n, modulus in enumerate(moduli, 1) if modulus < cert.M * n)
    slack = None
    argmin = None
    for n, modulus in enumerate(moduli, 1):
        if slack is None or modulus / n < slack:
            slack, argmin = modulus / n, n
    report = BoundReport(cert.M, len(moduli), slack, argmin, violations)
    if strict and violations:
        raise TheoremViolation(f"|z_n| < M n for n in {list(violations)}")
    return report


@dataclass(frozen=True)
class ChainRow:
    n: int
    log_power: float  # n log(r/|z_n|)
    log_product: float  # sum_{k<=n} log(r/|z_k|)
    log_majorant: float  # log C + beta r


@dataclass(frozen=True)
class ChainReport:
    r: float
    rows: tuple[ChainRow, ...]

    @property
    def passed(self) -> bool:
        tol = 1e-12
        return all(
            row.log_power <= row.log_product + tol * max(1.0, abs(row.log_product))
            and row.log_product <= row.log_majorant
            for row in self.rows
        )


def jensen_chain_check(cert: BoundCertificate, zeros: ZeroSet, r: float) -> ChainReport:
    """(r/|z_n|)^n <= prod_{k<=n} r/|z_k| <= C e^{beta r} for every found n, in log form."""
    if r <= 0:
        raise ValueError("r must be positive")
    rows = []
    running = 0.0
    for n, modulus in enumerate(zeros.moduli(), 1):
        term = math.log(r / modulus)
        running += term
        rows.append(ChainRow(n, n * term, running, cert.log_majorant(r)))
    return ChainReport(r, tuple(rows))
