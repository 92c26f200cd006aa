r"""Modified Bessel functions of the first kind by direct power series.

.. math::
    I_m(z) = \sum_{j\ge 0} \frac{(z/2)^{2j+m}}{j!\,(j+m)!}

For real ``z`` every term has the sign of ``z**m``, so the partial sums never
cancel and the series is accurate to a few ulps in relative terms. The
truncation error is certified by a geometric majorant of the tail.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

Z_MAX = 700.0
_EPS = sys.float_info.epsilon
_MAX_TERMS = 100_000


class BesselRangeError(ValueError):
    """Argument outside the range the series evaluation accepts."""


@dataclass(frozen=True)
class BesselEval:
    """Result of :func:`bessel_i`.

    ``tail_bound`` bounds the neglected part of the series. ``rounding_bound``
    estimates the floating-point error of the summed part; when a requested
    tolerance lies below it, it is the best accuracy on offer.
    """

    order: int
    argument: float
    value: float
    terms_used: int
    tail_bound: float
    rounding_bound: float

    @property
    def error_bound(self) -> float:
        return self.tail_bound + self.rounding_bound


def _tail(term: float, ratio: float) -> float:
    return abs(term) * ratio / (1.0 - ratio)


def bessel_i(m: int, z: float, tol: float = 1e-15) -> BesselEval:
    """Evaluate ``I_m(z)`` for integer ``m >= 0`` and real ``|z| <= 700``.

    Summation continues until the tail bound is below both ``tol`` and half an
    ulp of the running sum, so the value is as accurate as float64 allows even
    for tiny ``I_m``.

    Raises:
        BesselRangeError: if ``|z|`` exceeds :data:`Z_MAX`.
        ValueError: on a negative order or nonpositive ``tol``.
    """
    m = int(m)
    z = float(z)
    if m < 0:
        raise ValueError(f"order must be nonnegative, got {m}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not math.isfinite(z) or abs(z) > Z_MAX:
        raise BesselRangeError(f"|z| = {abs(z)} exceeds the series guard {Z_MAX}")
    if z == 0.0:
        return BesselEval(m, z, 1.0 if m == 0 else 0.0, 1, 0.0, 0.0)

    half = 0.5 * z
    q = half * half
    # leading term (z/2)^m / m!, built by incremental multiplication
    term = 1.0
    for i in range(1, m + 1):
        term *= half / i
    total = term
    j = 0
    while True:
        ratio = q / ((j + 1) * (j + m + 1))
        if ratio < 1.0:
            tail = _tail(term, ratio)
            if tail <= tol and tail <= 0.5 * _EPS * abs(total):
                break
        if j >= _MAX_TERMS:
            raise RuntimeError(f"I_{m}({z}) did not converge in {_MAX_TERMS} terms")
        term *= ratio
        total += term
        j += 1
    # each term carries about (m + 3j) roundings; the sum adds one per term
    rounding = _EPS * abs(total) * (m + 4 * (j + 1))
    return BesselEval(m, z, total, j + 1, tail, rounding)


def bessel_recurrence_defect(m: int, z: float, tol: float = 1e-15) -> float:
    """``|I_{m-1}(z) - I_{m+1}(z) - (2m/z) I_m(z)|``; zero up to rounding."""
    if m < 1:
        raise ValueError(f"recurrence needs m >= 1, got {m}")
    if z == 0:
        raise ValueError("recurrence is undefined at z = 0")
    lo = bessel_i(m - 1, z, tol).value
    mid = bessel_i(m, z, tol).value
    hi = bessel_i(m + 1, z, tol).value
    return abs(lo - hi - (2.0 * m / z) * mid)


def coefficient_decay_bound(m: int, z: float) -> float:
    """Factorial envelope ``exp((|z|/2)^2) (|z|/2)^m / m!``, which dominates ``|I_m(z)|``."""
    m = int(m)
    if m < 0:
        raise ValueError("order must be nonnegative")
    h = 0.5 * abs(float(z))
    if h == 0.0:
        return 1.0 if m == 0 else 0.0
    return math.exp(h * h + m * math.log(h) - math.lgamma(m + 1))
