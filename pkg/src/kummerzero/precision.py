"""Extended-precision complex arithmetic on top of MPFR/MPC (via gmpy2).

Precision is always passed explicitly or carried by the value. gmpy2
contexts are thread-local, so entering ``gmpy2.context(precision=...)``
never leaks between worker threads.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

import gmpy2
from gmpy2 import mpc, mpfr

from .errors import DomainError, PoleError

INTEGER_TOL = 1e-12
LOG2_10 = math.log2(10.0)
ENV_DIGITS = "HYP_PRECISION_DIGITS"


def working(bits: int):
    """Thread-local MPFR context at ``bits`` of precision."""
    return gmpy2.context(precision=int(bits))


def nearest_nonpositive_integer(w: complex, tol: float = INTEGER_TOL) -> int | None:
    """Return ``n >= 0`` when ``w`` lies within ``tol`` of ``-n``, else None."""
    w = complex(w)
    n = round(w.real)
    if n > 0:
        return None
    if abs(w - n) < tol:
        return -int(n)
    return None


@dataclass(frozen=True)
class PrecisionPolicy:
    """Working precision as a function of ``|z|``.

    The largest series term near ``|z|`` is about ``e^{|z|}`` while values
    near zeros are O(1), so roughly ``log10(e) * |z|`` digits cancel.
    """

    base_decimal_digits: int = 30
    slope: float = 0.45

    def __post_init__(self):
        if self.base_decimal_digits < 1:
            raise ValueError("base_decimal_digits must be positive")
        if self.slope < 0:
            raise ValueError("slope must be nonnegative")

    def digits_for(self, z) -> int:
        return self.base_decimal_digits + math.ceil(self.slope * float(abs(z)))

    def bits_for(self, z) -> int:
        return max(53, math.ceil(self.digits_for(z) * LOG2_10))

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None) -> "PrecisionPolicy":
        environ = os.environ if environ is None else environ
        raw = environ.get(ENV_DIGITS)
        if raw is None or raw.strip() == "":
            return cls()
        try:
            digits = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_DIGITS} must be an integer, got {raw!r}") from None
        return cls(base_decimal_digits=digits)


DEFAULT_POLICY = PrecisionPolicy()


@dataclass(frozen=True)
class BigComplex:
    """Immutable complex number with MPFR parts and an explicit precision."""

    re: mpfr
    im: mpfr
    precision_bits: int = 53

    def __post_init__(self):
        if self.precision_bits < 53:
            raise ValueError("precision_bits must be at least 53")

    @classmethod
    def coerce(cls, value, precision_bits: int = 53) -> "BigComplex":
        if isinstance(value, BigComplex):
            return value
        precision_bits = max(53, int(precision_bits))
        with working(precision_bits):
            if isinstance(value, str):
                z = mpc(value.replace("i", "j"))
            elif type(value).__name__ == "mpc":
                bits = max(precision_bits, *value.precision)
                return cls.from_mpc(value, bits)
            elif type(value).__name__ == "mpfr":
                bits = max(precision_bits, value.precision)
                return cls(value, mpfr(0), bits)
            else:
                z = mpc(complex(value))
        return cls(z.real, z.imag, precision_bits)

    @classmethod
    def from_mpc(cls, z, precision_bits: int | None = None) -> "BigComplex":
        bits = max(53, precision_bits or max(z.precision))
        with working(bits):
            return cls(mpfr(z.real), mpfr(z.imag), bits)

    @property
    def mpc(self):
        with working(self.precision_bits):
            return mpc(self.re, self.im)

    def _lift(self, other):
        other = BigComplex.coerce(other)
        return other, max(self.precision_bits, other.precision_bits)

    def __add__(self, other):
        other, bits = self._lift(other)
        with working(bits):
            return BigComplex.from_mpc(self.mpc + other.mpc, bits)

    __radd__ = __add__

    def __sub__(self, other):
        other, bits = self._lift(other)
        with working(bits):
            return BigComplex.from_mpc(self.mpc - other.mpc, bits)

    def __rsub__(self, other):
        other, bits = self._lift(other)
        return other - self

    def __mul__(self, other):
        other, bits = self._lift(other)
        with working(bits):
            return BigComplex.from_mpc(self.mpc * other.mpc, bits)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other, bits = self._lift(other)
        if other.re == 0 and other.im == 0:
            raise ZeroDivisionError("complex division by zero")
        with working(bits):
            return BigComplex.from_mpc(self.mpc / other.mpc, bits)

    def __rtruediv__(self, other):
        other, _ = self._lift(other)
        return other / self

    def __neg__(self):
        return BigComplex(-self.re, -self.im, self.precision_bits)

    def __abs__(self):
        with working(self.precision_bits):
            return abs(mpc(self.re, self.im))

    def conjugate(self) -> "BigComplex":
        return BigComplex(self.re, -self.im, self.precision_bits)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"BigComplex({self.re:.20g}, {self.im:.20g}, bits={self.precision_bits})"


def as_mpc(value, bits: int):
    """Round anything complex-like to an ``mpc`` at ``bits`` precision."""
    with working(bits):
        if isinstance(value, BigComplex):
            return mpc(value.re, value.im)
        if type(value).__name__ in ("mpc", "mpfr"):
            return mpc(value)
        return mpc(complex(value))


# -- gamma ------------------------------------------------------------------


@lru_cache(maxsize=None)
def _bernoulli_numbers(n: int) -> tuple[Fraction, ...]:
    """B_0..B_n (B_1 = -1/2) from sum_{j<=m} C(m+1, j) B_j = 0."""
    table = [Fraction(1)]
    for m in range(1, n + 1):
        acc = Fraction(0)
        binom = 1
        for j in range(m):
            acc += binom * table[j]
            binom = binom * (m + 1 - j) // (j + 1)
        table.append(-acc / (m + 1))
    return tuple(table)


def _bernoulli_even(k: int) -> Fraction:
    size = 64
    while size < 2 * k:
        size *= 2
    return _bernoulli_numbers(size)[2 * k]


def _gamma_mpc(w, bits: int):
    """Gamma at the current context precision; ``w`` is off the pole set."""
    if w.real < 0.5:
        pi = gmpy2.const_pi()
        return pi / (gmpy2.sin(pi * w) * _gamma_mpc(1 - w, bits))
    # shift until the Stirling remainder, roughly exp(-2 pi |v|), is below 2^-bits
    threshold = 0.2 * bits + 10
    shift = 0 if abs(w) >= threshold else max(0, math.ceil(threshold - float(w.real)))
    v = w + shift
    log_v = gmpy2.log(v)
    lg = (v - 0.5) * log_v - v + gmpy2.log(2 * gmpy2.const_pi()) / 2
    v2 = v * v
    power = v
    eps = mpfr(2) ** (-bits - 8)
    for k in range(1, bits):
        b = _bernoulli_even(k)
        term = mpfr(b.numerator) / (mpfr(b.denominator) * (2 * k) * (2 * k - 1)) / power
        lg += term
        if abs(term) < eps:
            break
        power *= v2
    value = gmpy2.exp(lg)
    if shift:
        product = mpc(1)
        for k in range(shift):
            product *= w + k
        value /= product
    return value


def complex_gamma(z, precision_bits: int | None = None) -> BigComplex:
    """Gamma function of a complex argument.

    Stirling series after an upward shift, reflection for ``Re z < 0.5``.
    Raises PoleError within ``INTEGER_TOL`` of a nonpositive integer.
    """
    z = BigComplex.coerce(z)
    bits = max(53, precision_bits or z.precision_bits)
    if nearest_nonpositive_integer(complex(z)) is not None:
        raise PoleError(f"gamma has a pole at {complex(z)}")
    size = float(abs(z))
    guard = 48 + math.ceil(math.log2(2.0 + size * math.log(2.0 + size)))
    with working(bits + guard):
        value = _gamma_mpc(as_mpc(z, bits + guard), bits + guard)
    return BigComplex.from_mpc(value, bits)


# -- logarithm and powers ---------------------------------------------------


def principal_log(z, precision_bits: int | None = None) -> BigComplex:
    """log|z| + i arg z with arg in (-pi, pi]."""
    z = BigComplex.coerce(z)
    bits = max(53, precision_bits or z.precision_bits)
    if z.re == 0 and z.im == 0:
        raise DomainError("logarithm of zero")
    # MPC keeps signed zeros; -1 - 0i must still map to +i pi
    im = z.im if z.im != 0 else mpfr(0)
    with working(bits):
        return BigComplex.from_mpc(gmpy2.log(mpc(z.re, im)), bits)


def principal_power(w, s, precision_bits: int | None = None) -> BigComplex:
    """w**s := exp(s * principal_log(w))."""
    w = BigComplex.coerce(w)
    s = BigComplex.coerce(s)
    bits = max(53, precision_bits or max(w.precision_bits, s.precision_bits))
    log_w = principal_log(w, bits + 16)
    with working(bits + 16):
        value = gmpy2.exp(as_mpc(s, bits + 16) * log_w.mpc)
    return BigComplex.from_mpc(value, bits)


# -- summation --------------------------------------------------------------


def _exact_parts(x) -> tuple[int, int]:
    """(mantissa, exponent) with x == mantissa * 2**exponent exactly."""
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError("non-finite summand")
        num, den = x.as_integer_ratio()
        return num, 1 - den.bit_length()
    if not gmpy2.is_finite(x):
        raise ValueError("non-finite summand")
    man, exp = x.as_mantissa_exp()
    return int(man), int(exp)


def _parts_of(term) -> tuple[object, object, int]:
    if isinstance(term, BigComplex):
        return term.re, term.im, term.precision_bits
    kind = type(term).__name__
    if kind == "mpc":
        return term.real, term.imag, max(term.precision)
    if kind == "mpfr":
        return term, 0.0, term.precision
    term = complex(term)
    return term.real, term.imag, 53


def _round_exact(pairs: list[tuple[int, int]], bits: int):
    pairs = [(m, e) for m, e in pairs if m]
    if not pairs:
        return mpfr(0)
    base = min(e for _, e in pairs)
    total = 0
    for m, e in pairs:
        total += m << (e - base)
    with working(bits):
        return gmpy2.mul_2exp(mpfr(total), base)


def compensated_sum(terms: Iterable, precision_bits: int | None = None) -> BigComplex:
    """Sum complex terms with a single final rounding.

    The real and imaginary parts are accumulated exactly as dyadic
    rationals, so the result is within half an ulp of the true sum and is
    independent of evaluation order.
    """
    re_parts: list[tuple[int, int]] = []
    im_parts: list[tuple[int, int]] = []
    bits = 53
    for term in terms:
        re, im, b = _parts_of(term)
        bits = max(bits, b)
        re_parts.append(_exact_parts(re))
        im_parts.append(_exact_parts(im))
    if precision_bits is not None:
        bits = max(53, precision_bits)
    return BigComplex(_round_exact(re_parts, bits), _round_exact(im_parts, bits), bits)
