"""Checks of zero-set identities against computed zeros.

Infinite sums over zeros are truncated at the certified disk. Their tails
are bounded with the linear lower bound ``|z_n| >= M n`` from
:mod:`kummerzero.certificate`, never with the asymptotic zero formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import gmpy2
from gmpy2 import mpc, mpfr

from .certificate import BoundCertificate, certify
from .errors import (
    EmptyZeroSet,
    IndexOutOfRange,
    InequalityViolation,
    RadiusTooCloseToZero,
    TooFewZeros,
)
from .kummer import Parameters, classify, evaluate
from .precision import (
    DEFAULT_POLICY,
    BigComplex,
    PrecisionPolicy,
    complex_gamma,
    compensated_sum,
    principal_log,
    principal_power,
    working,
)
from .zeros import Zero, ZeroSet

PREDICTION_BITS = 128
QUADRATURE_STOP = 1e-10
MAX_NODES = 2**16
RADIUS_CLEARANCE = 1e-3


@dataclass(frozen=True)
class IdentityReport:
    name: str
    computed: BigComplex
    target: BigComplex
    tail_estimate: float
    residual: float
    n_terms_used: int
    tolerance: float
    passed: bool

    @property
    def slack(self) -> float:
        """target - computed (real parts); meaningful for the inequality reports."""
        return float(self.target.re - self.computed.re)


def _report(name, computed, target, tail, n_terms, tolerance) -> IdentityReport:
    computed = BigComplex.coerce(computed)
    target = BigComplex.coerce(target)
    residual = float(abs(computed - target))
    return IdentityReport(name, computed, target, tail, residual, n_terms, tolerance, residual <= tolerance + tail)


def _generic(params) -> Parameters:
    if not isinstance(params, Parameters):
        params = classify(*params)
    params.require_generic()
    return params


def _bits_of(sequence) -> int:
    return max([53, *(max(z.precision) for z in sequence)])


# -- power sums -------------------------------------------------------------


def power_sum_target(params: Parameters, p: int, bits: int = 128) -> BigComplex:
    with working(bits):
        a = mpc(params.alpha)
        g = mpc(params.gamma)
        if p == 2:
            value = a * (a - g) / (g**2 * (g + 1))
        elif p == 3:
            value = a * (a - g) * (g - 2 * a) / (g**3 * (g + 1) * (g + 2))
        else:
            raise ValueError("only p = 2 and p = 3 are available")
    return BigComplex.from_mpc(value, bits)


def power_sum_identity(
    params, zeros: ZeroSet, p: int, cert: BoundCertificate | None = None, tolerance: float = 1e-4
) -> IdentityReport:
    """sum_j z_j^{-p} over the found zeros against its closed form.

    The tail over unfound zeros is bounded by 2 * sum_{n>N} (M n)^{-p}
    <= 2 M^{-p} N^{1-p} / (p - 1).
    """
    params = _generic(params)
    if p not in (2, 3):
        raise ValueError("only p = 2 and p = 3 are available")
    sequence = zeros.sequence()
    if not sequence:
        raise EmptyZeroSet("power sums need at least one zero")
    cert = cert or certify(params)
    bits = _bits_of(sequence)
    with working(bits):
        terms = [z ** (-p) for z in sequence]
    computed = compensated_sum(terms, bits)
    n = len(sequence)
    tail = 2.0 * cert.M ** (-p) * n ** (1 - p) / (p - 1)
    return _report(f"power_sum_p{p}", computed, power_sum_target(params, p, bits), tail, n, tolerance)


# -- Jensen -----------------------------------------------------------------


def _check_radius(zeros: ZeroSet, r: float) -> None:
    if not 0 < r < zeros.r_max:
        raise ValueError(f"radius {r} must lie in (0, r_max={zeros.r_max})")
    if r > 700:
        raise ValueError("circle means overflow double precision beyond r = 700")
    for modulus in zeros.moduli():
        if abs(modulus - r) <= RADIUS_CLEARANCE * r:
            raise RadiusTooCloseToZero(f"|z| = {modulus:.6g} is within {RADIUS_CLEARANCE} r of r = {r}")


def circle_mean(params: Parameters, r: float, nodes: int, functional, policy: PrecisionPolicy, relative: bool = False):
    """Trapezoid mean of functional(f) over |z| = r with node doubling.

    Returns (mean, last doubling difference, nodes used).
    """
    if nodes < 1:
        raise ValueError("nodes must be positive")

    def sample(k: int, count: int) -> float:
        theta = 2.0 * math.pi * k / count
        z = complex(r * math.cos(theta), r * math.sin(theta))
        return functional(evaluate(params, z, policy).value.mpc)

    values = [sample(k, nodes) for k in range(nodes)]
    mean = math.fsum(values) / nodes
    count = nodes
    while True:
        values.extend(sample(k, 2 * count) for k in range(1, 2 * count, 2))
        count *= 2
        refined = math.fsum(values) / count
        diff = abs(refined - mean)
        mean = refined
        limit = QUADRATURE_STOP * (max(1.0, abs(mean)) if relative else 1.0)
        if diff < limit or count >= MAX_NODES:
            return mean, diff, count


def _log_abs(value) -> float:
    return float(gmpy2.log(abs(value)))


def _abs(value) -> float:
    return float(abs(value))


def jensen_residual(
    params, zeros: ZeroSet, r: float, nodes: int = 256, tolerance: float = 1e-8, policy: PrecisionPolicy = DEFAULT_POLICY
) -> IdentityReport:
    """sum_{|z_k|<r} log(r/|z_k|) against the circle mean of log|f| (f(0) = 1)."""
    params = _generic(params)
    _check_radius(zeros, r)
    inside = [z for z in zeros.sequence() if float(abs(z)) < r]
    with working(128):
        terms = [gmpy2.log(mpfr(r) / abs(z)) for z in inside]
    lhs = compensated_sum(terms, 128)
    mean, diff, _ = circle_mean(params, r, nodes, _log_abs, policy)
    return _report("jensen_formula", lhs, mean, diff, len(inside), tolerance)


def jensen_inequality_check(
    params,
    zeros: ZeroSet,
    r: float,
    nodes: int = 256,
    tolerance: float = 1e-8,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    strict: bool = True,
) -> IdentityReport:
    """prod_{|z_k|<r} r/|z_k| <= circle mean of |f|."""
    params = _generic(params)
    _check_radius(zeros, r)
    inside = [z for z in zeros.sequence() if float(abs(z)) < r]
    lhs = math.exp(math.fsum(math.log(r / float(abs(z))) for z in inside))
    mean, diff, _ = circle_mean(params, r, nodes, _abs, policy, relative=True)
    residual = abs(mean - lhs)
    passed = lhs <= mean + diff + tolerance
    report = IdentityReport(
        "jensen_inequality", BigComplex.coerce(lhs), BigComplex.coerce(mean), diff, residual, len(inside), tolerance, passed
    )
    if strict and not passed:
        raise InequalityViolation(f"product {lhs:.12g} exceeds circle mean {mean:.12g} at r = {r}")
    return report


def mid_gap_radius(zeros: ZeroSet, near: float) -> float:
    """Midpoint of the gap between consecutive zero moduli closest to ``near``."""
    marks = sorted({0.0, *zeros.moduli(), zeros.r_max})
    gaps = [(a, b) for a, b in zip(marks, marks[1:]) if b - a > 0]
    a, b = min(gaps, key=lambda gap: (0.0 if gap[0] <= near <= gap[1] else min(abs(near - gap[0]), abs(near - gap[1])), gap[0]))
    return 0.5 * (a + b)


# -- asymptotics ------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticPrediction:
    n: int
    branch: int
    predicted: BigComplex
    matched_zero: Zero | None = None
    gap: float | None = None


@lru_cache(maxsize=256)
def _gamma_quotient(alpha: complex, gamma: complex, bits: int) -> BigComplex:
    return complex_gamma(BigComplex.coerce(alpha, bits)) / complex_gamma(BigComplex.coerce(gamma - alpha, bits))


def _sign(branch) -> int:
    if branch in (1, "+"):
        return 1
    if branch in (-1, "-"):
        return -1
    raise ValueError("branch must be +1 or -1")


def predicted_zero(params: Parameters, n: int, branch, precision_bits: int = PREDICTION_BITS) -> BigComplex:
    """Leading terms of the large-zero expansion.

    z ~ s(2n + alpha) pi i + Log(-Gamma(alpha)/Gamma(gamma-alpha) (s 2 n pi i)^(gamma - 2 alpha)),
    with principal logarithm and principal power.
    """
    s = _sign(branch)
    bits = precision_bits
    quotient = _gamma_quotient(params.alpha, params.gamma, bits)
    with working(bits):
        pi = gmpy2.const_pi()
        base = BigComplex.from_mpc(mpc(0, s * 2 * n) * pi, bits)
        exponent = BigComplex.coerce(params.gamma - 2 * params.alpha, bits)
    inner = -(quotient * principal_power(base, exponent, bits))
    with working(bits):
        leading = mpc(0, s) * (2 * n + mpc(params.alpha)) * gmpy2.const_pi()
    return BigComplex.from_mpc(leading, bits) + principal_log(inner, bits)


def asymptotic_zero_predict(params, n: int, branch, zeros: ZeroSet | None = None) -> AsymptoticPrediction:
    """Predicted large zero; matched to the nearest found zero when that match is mutual."""
    params = _generic(params)
    if n < 1:
        raise ValueError("n must be a positive integer")
    s = _sign(branch)
    predicted = predicted_zero(params, n, s)
    if zeros is None or not zeros.zeros:
        return AsymptoticPrediction(n, s, predicted)
    p = complex(predicted)
    nearest = min(zeros.zeros, key=lambda zero: (abs(complex(zero) - p), zero.index))
    target = complex(nearest)
    rivals = [(m, b) for m in (n - 1, n, n + 1) for b in (1, -1) if m >= 1]
    closest = min(rivals, key=lambda key: (abs(complex(predicted_zero(params, *key)) - target), key != (n, s)))
    if closest != (n, s):
        return AsymptoticPrediction(n, s, predicted)
    gap = float(abs(predicted - nearest.location))
    return AsymptoticPrediction(n, s, predicted, nearest, gap)


# -- exponent of convergence ------------------------------------------------


@dataclass(frozen=True)
class LambdaEstimate:
    value: float
    n_zeros: int
    caveat: str = "finite-sample estimate: max of log n / log|z_n| over the upper half of the found indices"


def lambda_estimate(zeros: ZeroSet | Sequence[complex]) -> LambdaEstimate:
    """Empirical exponent of convergence from finitely many zeros."""
    if isinstance(zeros, ZeroSet):
        moduli = zeros.moduli()
    else:
        moduli = sorted(abs(complex(z)) for z in zeros)
    count = len(moduli)
    if count < 10:
        raise TooFewZeros(f"need at least 10 zeros, have {count}")
    ratios = [
        math.log(n) / math.log(modulus) for n, modulus in enumerate(moduli, 1) if n > count / 2 and modulus > 1.0
    ]
    if not ratios:
        raise TooFewZeros("no zero of modulus above 1 in the upper half")
    return LambdaEstimate(max(ratios), count)


# -- reciprocal zero sums -----------------------------------------------------


def _zero_sum_tail(M: float, r_max: float, a: float, n_used: int, n_found: int) -> float:
    """Bound for sum_{j>n_used} 1/(|z_j| (|z_j| - a)) with |z_j| >= M j, and >= r_max beyond the disk."""
    last = max(n_found, math.ceil(r_max / M))
    total = 0.0
    for j in range(n_used + 1, last + 1):
        lower = M * j if j <= n_found else max(M * j, r_max)
        if lower <= a:
            return math.inf
        total += 1.0 / (lower * (lower - a))
    b = a / M
    if last <= b:
        return math.inf
    # 1/(j (j - b)) decreases for j > b, so the sum is below the integral from `last`
    total += math.log(last / (last - b)) / (b * M * M)
    return total


def zero_sum_residual(
    params,
    zeros: ZeroSet,
    k: int,
    n_terms: int | None = None,
    cert: BoundCertificate | None = None,
    tolerance: float = 1e-10,
) -> IdentityReport:
    """2 gamma z_k^2 sum_{j != k} 1/(z_j (z_k - z_j)) against (gamma - 2 alpha) z_k - gamma (gamma + 2).

    The j = k term is singular and omitted; equal zeros of a multiple root
    are omitted as well.
    """
    params = _generic(params)
    sequence = zeros.sequence()
    if not 1 <= k <= len(sequence):
        raise IndexOutOfRange(f"k = {k} outside 1..{len(sequence)}")
    n_used = len(sequence) if n_terms is None else n_terms
    if not 1 <= n_used <= len(sequence):
        raise IndexOutOfRange(f"n_terms = {n_used} outside 1..{len(sequence)}")
    cert = cert or certify(params)
    bits = _bits_of(sequence)
    zk = sequence[k - 1]
    with working(bits):
        terms = [1 / (zj * (zk - zj)) for j, zj in enumerate(sequence[:n_used], 1) if j != k and zj != zk]
        total = compensated_sum(terms, bits).mpc
        g = mpc(params.gamma)
        a = mpc(params.alpha)
        computed = 2 * g * zk * zk * total
        target = (g - 2 * a) * zk - g * (g + 2)
    a_mod = float(abs(zk))
    tail_sum = _zero_sum_tail(cert.M, zeros.r_max, a_mod, n_used, len(sequence))
    tail = 2.0 * abs(params.gamma) * a_mod**2 * tail_sum
    return _report(f"zero_sum_k{k}", BigComplex.from_mpc(computed, bits), BigComplex.from_mpc(target, bits), tail, n_used, tolerance)


# -- conjecture table -------------------------------------------------------


@dataclass(frozen=True)
class ConjectureRow:
    n: int
    modulus_ratio: float  # |z_n| / n
    ratio: complex  # z_n / n


@dataclass(frozen=True)
class ConjectureEvidence:
    M: float
    rows: tuple[ConjectureRow, ...]

    @property
    def min_modulus_ratio(self) -> float | None:
        return min((row.modulus_ratio for row in self.rows), default=None)


def conjecture_evidence(params, zeros: ZeroSet, cert: BoundCertificate) -> ConjectureEvidence:
    """Tabulate |z_n|/n and z_n/n next to M; descriptive only."""
    rows = tuple(
        ConjectureRow(n, float(abs(z)) / n, complex(z) / n) for n, z in enumerate(zeros.sequence(), 1)
    )
    return ConjectureEvidence(cert.M, rows)
