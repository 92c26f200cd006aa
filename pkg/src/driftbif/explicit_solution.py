"""Closed-form nonconstant solutions for the kernel ``Phi(x) = 2 cos(2 pi x)``.

With ``u = c + sum_m V_m cos(2 pi m x)`` the equation ``a u'' + (u Phi*u')' = 0``
reduces mode by mode to

    V_2 = 2 (a + c),
    V_{m-1} - V_{m+1} = -(2 m a / V_1) V_m,   m >= 2,

which the Bessel recurrence ``I_{m-1} - I_{m+1} = (2m/z) I_m`` solves with
``V_m = -a z I_m(z) / I_1(z)`` and ``c = -a (z I_2(z) / (2 I_1(z)) + 1)`` for any
real ``z != 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bessel import bessel_i, coefficient_decay_bound
from .kernel import KernelSpectrum, cosine_kernel
from .spectral_core import CosineSeries, derivative2, nonlinear_drift_term

TINY_I1 = 1e-300


class SingularNormalizationError(ArithmeticError):
    """``I_1(z)`` is too small to normalize the coefficient family."""


@dataclass(frozen=True)
class ExplicitFamilyMember:
    a: float
    z: float
    order: int
    c: float
    coeffs: CosineSeries
    amplitude: float
    scale: float
    tail_certificate: float
    bessel_tol: float

    def as_dict(self) -> dict:
        return {
            "a": self.a,
            "z": self.z,
            "M": self.order,
            "c": self.c,
            "amplitude": self.amplitude,
            "scale": self.scale,
            "coeffs": self.coeffs.coeffs.tolist(),
            "tail_certificate": self.tail_certificate,
        }


@dataclass(frozen=True)
class ResidualReport:
    """Mode-wise residual of the full equation for a truncated member.

    ``truncation_l2`` collects modes ``>= M`` (where truncation couples in);
    ``rounding_l2`` collects the lower modes, which are exact up to rounding.
    ``truncation_bound`` is a rigorous a priori bound on ``truncation_l2``
    apart from rounding.
    """

    l2: float
    per_mode: np.ndarray
    truncation_l2: float
    rounding_l2: float
    truncation_bound: float

    def as_dict(self) -> dict:
        return {
            "residual_l2": self.l2,
            "truncation_l2": self.truncation_l2,
            "rounding_l2": self.rounding_l2,
            "truncation_bound": self.truncation_bound,
            "per_mode": self.per_mode.tolist(),
        }


def _check_kernel(kernel: KernelSpectrum | None) -> None:
    if kernel is None:
        return
    ref = cosine_kernel()
    if kernel.dim != 1:
        raise ValueError("the closed-form family is one-dimensional")
    order = max(kernel.lattice_radius, 1)
    if not np.allclose(kernel.values_1d(order), ref.values_1d(order), rtol=0, atol=1e-12):
        raise ValueError("the closed-form family requires Phihat(1) = 1 and Phihat(m>=2) = 0")


def _tail_sum(h: float, start: int) -> float:
    """Bound on ``sum_{m >= start} h^m / m!``."""
    if h == 0.0:
        return 0.0
    term = math.exp(start * math.log(h) - math.lgamma(start + 1))
    total, m = term, start
    while True:
        ratio = h / (m + 1)
        if ratio < 1.0:
            tail = term * ratio / (1.0 - ratio)
            if tail <= 1e-17 * total:
                return total + tail
        term *= ratio
        total += term
        m += 1


def construct(
    a: float, z: float, M: int, tol: float = 1e-15, kernel: KernelSpectrum | None = None
) -> ExplicitFamilyMember:
    """Member of the closed-form family at parameter ``z``, truncated to ``M`` modes.

    Each Bessel value is evaluated at tolerance ``tol / M``. ``kernel``, when
    given, must be the two-cosine kernel; it is only checked, never used.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    if z == 0 or not math.isfinite(z):
        raise ValueError("z must be a nonzero real number (z = 0 is the constant state)")
    if M < 2:
        raise ValueError("M must be at least 2")
    _check_kernel(kernel)
    btol = tol / M
    values = np.array([bessel_i(m, z, btol).value for m in range(1, M + 1)])
    i1 = values[0]
    if abs(i1) < TINY_I1:
        raise SingularNormalizationError(f"I_1({z}) = {i1} cannot normalize the family")
    scale = -a * z / i1
    coeffs = scale * values
    coeffs[0] = -a * z  # V_1 = C I_1(z) exactly
    c = -a * (z * values[1] / (2.0 * i1) + 1.0)
    h = 0.5 * abs(z)
    tail = abs(scale) * coefficient_decay_bound(0, z) * _tail_sum(h, M + 1)
    return ExplicitFamilyMember(
        a=float(a),
        z=float(z),
        order=M,
        c=float(c),
        coeffs=CosineSeries(coeffs),
        amplitude=float(-a * z),
        scale=float(scale),
        tail_certificate=float(tail),
        bessel_tol=btol,
    )


def recurrence_defect(member: ExplicitFamilyMember) -> np.ndarray:
    """Entry 0: ``|V_2 - 2(a+c)|``; entry ``m-1`` for ``2 <= m <= M-1``: the three-term defect."""
    if member.order < 3:
        raise ValueError("recurrence check needs M >= 3")
    V = np.concatenate([[0.0], member.coeffs.coeffs])
    a, v1 = member.a, V[1]
    out = np.empty(member.order - 1)
    out[0] = abs(V[2] - 2.0 * (a + member.c))
    m = np.arange(2, member.order)
    out[1:] = np.abs(V[m - 1] - V[m + 1] + (2.0 * m * a / v1) * V[m])
    return out


def full_equation_residual(member: ExplicitFamilyMember, M_check: int | None = None) -> ResidualReport:
    """Cosine coefficients of ``a u'' + (u Phi*u')'`` for ``u = c + v``, modes ``1..M_check``."""
    M = member.order
    M_check = M + 1 if M_check is None else int(M_check)
    if M_check < M:
        raise ValueError("M_check must be at least the member order")
    # one extra mode keeps the (M+1) coupling visible even when M_check == M
    width = max(M_check, M + 1)
    v = member.coeffs
    res = member.a * derivative2(v).resize(width).coeffs
    res = res + nonlinear_drift_term(member.c, v, cosine_kernel(), width).coeffs
    per_mode = res[:M_check]
    trunc = float(np.linalg.norm(per_mode[M - 1 :]))
    low = float(np.linalg.norm(per_mode[: M - 1]))
    # truncation only perturbs modes M and M+1:
    #   mode M   : 2 pi^2 |V_1| M |V_{M+1}|,   mode M+1 : 2 pi^2 |V_1| (M+1) |V_M|
    env = abs(member.scale) * coefficient_decay_bound(M, member.z)
    q = 0.5 * abs(member.z) / (M + 1)
    bound = 2 * math.pi**2 * abs(member.amplitude) * env * math.hypot(M + 1, M * q)
    return ResidualReport(
        l2=float(np.linalg.norm(per_mode)),
        per_mode=per_mode,
        truncation_l2=trunc,
        rounding_l2=low,
        truncation_bound=bound,
    )


def family_curve(a: float, z_values, M: int = 32) -> list[tuple[float, float, float]]:
    """``(z, V_1, c)`` along the family; ``V_1 = -a z`` is odd in ``z`` and ``c`` is even."""
    return [(m.z, m.amplitude, m.c) for m in (construct(a, z, M) for z in z_values)]
