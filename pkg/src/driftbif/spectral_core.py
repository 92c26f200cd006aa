"""Exact arithmetic on truncated even cosine series over the unit torus.

A :class:`CosineSeries` of order ``M`` stores ``V_1..V_M`` and represents

    v(x) = sum_{m=1}^{M} V_m cos(2 pi m x),

with the mean mode fixed at zero. Products are carried out in coefficient
space with ``cos(n)cos(q) = [cos(n+q) + cos(n-q)] / 2`` (and the matching
sine identity), so nothing is aliased; quadratic terms live on modes up to
``2M`` and are truncated only when the caller asks for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .kernel import KernelSpectrum

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class CosineSeries:
    """Zero-mean even function ``sum_m V_m cos(2 pi m x)``; ``coeffs[m-1] = V_m``."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.coeffs, dtype=float, copy=True).reshape(-1)
        if c.size < 1:
            raise ValueError("a CosineSeries needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("CosineSeries coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, order: int) -> "CosineSeries":
        return cls(np.zeros(order))

    @classmethod
    def mode(cls, m: int, order: int, amplitude: float = 1.0) -> "CosineSeries":
        """``amplitude * cos(2 pi m x)`` stored at the given order."""
        c = np.zeros(order)
        c[m - 1] = amplitude
        return cls(c)

    @property
    def order(self) -> int:
        return self.coeffs.size

    def __getitem__(self, m: int) -> float:
        """Coefficient ``V_m`` (1-based); ``V_0`` and modes past the order read as zero."""
        if 1 <= m <= self.order:
            return float(self.coeffs[m - 1])
        return 0.0

    def resize(self, order: int) -> "CosineSeries":
        """Truncate or zero-pad to ``order`` modes."""
        out = np.zeros(order)
        n = min(order, self.order)
        out[:n] = self.coeffs[:n]
        return CosineSeries(out)

    def __add__(self, other: "CosineSeries") -> "CosineSeries":
        n = max(self.order, other.order)
        return CosineSeries(self.resize(n).coeffs + other.resize(n).coeffs)

    def __sub__(self, other: "CosineSeries") -> "CosineSeries":
        return self + (-1.0) * other

    def __mul__(self, alpha: float) -> "CosineSeries":
        return CosineSeries(float(alpha) * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self) -> "CosineSeries":
        return CosineSeries(-self.coeffs)

    def norm(self) -> float:
        """Euclidean norm of the coefficient vector."""
        return float(np.linalg.norm(self.coeffs))

    def __repr__(self) -> str:
        return f"CosineSeries(order={self.order}, coeffs={self.coeffs!r})"


@dataclass(frozen=True)
class SolveConfig:
    """Truncation and Newton settings for branch computations.

    ``sobolev_index`` only affects which ``H^s`` norm is reported.
    """

    truncation: int = 32
    newton_tol: float = 1e-11
    newton_max_iter: int = 25
    fd_step: float = 1e-6
    sobolev_index: float = 1.0

    def __post_init__(self) -> None:
        if self.truncation < 2:
            raise ValueError(f"truncation must be >= 2, got {self.truncation}")
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if not self.fd_step > 0:
            raise ValueError("fd_step must be positive")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be positive")
        if self.sobolev_index < 0:
            raise ValueError("sobolev_index must be nonnegative")


def _wavenumbers(order: int) -> np.ndarray:
    return TWO_PI * np.arange(1, order + 1)


def evaluate(v: CosineSeries, x: float | np.ndarray) -> float | np.ndarray:
    """Sum the series at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    m = np.arange(1, v.order + 1)
    vals = np.cos(TWO_PI * np.multiply.outer(x, m)) @ v.coeffs
    return float(vals) if vals.ndim == 0 else vals


def derivative2(v: CosineSeries) -> CosineSeries:
    return CosineSeries(-(_wavenumbers(v.order) ** 2) * v.coeffs)


def convolve(v: CosineSeries, kernel: KernelSpectrum) -> CosineSeries:
    """``Phi * v``: a diagonal scaling of mode ``m`` by ``Phihat(m)``."""
    return CosineSeries(kernel.values_1d(v.order) * v.coeffs)


def _divergence_of_product(mean: float, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Cosine coefficients of ``d/dx[(mean + u) * w]`` on modes ``1..len(u)+len(w)``.

    ``u[n-1]`` multiplies ``cos(2 pi n x)``, ``w[q-1]`` multiplies ``sin(2 pi q x)``.
    """
    nu, nw = u.size, w.size
    size = nu + nw + 1
    # sine coefficients of the product, index p = 0..nu+nw
    prod = np.zeros(size)
    prod[1 : nw + 1] += mean * w
    if nu and nw:
        # cos(n) sin(q) = [sin(q+n) + sin(q-n)] / 2
        full = np.convolve(u, w)  # index i <-> n+q = i+2
        prod[2 : 2 + full.size] += 0.5 * full
        # q - n = p > 0 and n - q = p > 0
        cross = np.correlate(w, u, mode="full")  # index i <-> q-n = i-(nu-1)
        lags = np.arange(cross.size) - (nu - 1)
        pos = lags > 0
        np.add.at(prod, lags[pos], 0.5 * cross[pos])
        neg = lags < 0
        np.add.at(prod, -lags[neg], -0.5 * cross[neg])
    p = np.arange(size)
    return (TWO_PI * p * prod)[1:]


def _drift_full(c: float, v: CosineSeries, kernel: KernelSpectrum) -> np.ndarray:
    # Phi * v_x as a sine series: -2 pi m Phihat(m) V_m sin(2 pi m x)
    w = -_wavenumbers(v.order) * kernel.values_1d(v.order) * v.coeffs
    return _divergence_of_product(c, v.coeffs, w)


def _check_1d(kernel: KernelSpectrum) -> None:
    if kernel.dim != 1:
        raise ValueError(f"cosine-series operations need a 1-D kernel, got dim={kernel.dim}")


def _fit(coeffs: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros(order)
    n = min(order, coeffs.size)
    out[:n] = coeffs[:n]
    return out


def nonlinear_drift_term(
    c: float, v: CosineSeries, kernel: KernelSpectrum, m_out: int | None = None
) -> CosineSeries:
    """Coefficients of ``d/dx[(c + v) (Phi * v_x)]`` on modes ``1..m_out``.

    The exact product reaches mode ``2M``; modes above ``m_out`` (default
    ``v.order``) are discarded. Use :func:`nonlinear_drift_tail` for their size.
    """
    _check_1d(kernel)
    m_out = v.order if m_out is None else int(m_out)
    if m_out < 1:
        raise ValueError("m_out must be positive")
    return CosineSeries(_fit(_drift_full(c, v, kernel), m_out))


def nonlinear_drift_tail(c: float, v: CosineSeries, kernel: KernelSpectrum, m_out: int | None = None) -> float:
    """l2 size of the drift coefficients dropped by truncating at ``m_out``."""
    _check_1d(kernel)
    m_out = v.order if m_out is None else int(m_out)
    full = _drift_full(c, v, kernel)
    return float(np.linalg.norm(full[m_out:]))


def bilinear_drift(u: CosineSeries, w: CosineSeries, kernel: KernelSpectrum, m_out: int) -> CosineSeries:
    """``B(u, w) = d/dx[u (Phi * w_x)]`` truncated to ``m_out`` modes."""
    _check_1d(kernel)
    ws = -_wavenumbers(w.order) * kernel.values_1d(w.order) * w.coeffs
    return CosineSeries(_fit(_divergence_of_product(0.0, u.coeffs, ws), m_out))


def sobolev_norm(v: CosineSeries, s: float) -> float:
    """``H^s`` norm on the unit torus; each ``cos`` mode carries ``int cos^2 = 1/2``."""
    if s < 0:
        raise ValueError("Sobolev index must be nonnegative")
    weights = (1.0 + _wavenumbers(v.order) ** 2) ** s
    return math.sqrt(float(np.sum(weights * v.coeffs**2)) / 2.0)


def as_series(coeffs: Sequence[float] | np.ndarray | CosineSeries) -> CosineSeries:
    return coeffs if isinstance(coeffs, CosineSeries) else CosineSeries(np.asarray(coeffs, dtype=float))
