"""Linearized operator, hypothesis (H) and bifurcation detection.

At a constant state ``u = c`` the linearization ``L_c h = a h'' + c div(Phi * grad h)``
acts on ``exp(2 pi i k.x)`` as multiplication by

    m(k) = -(2 pi)^2 |k|^2 (a + c Phihat(k)).

A mode ``k0`` with ``Phihat(k0) != 0`` makes ``m(k0)`` vanish at
``c0 = -a / Phihat(k0)``. Whether the kernel of ``L_{c0}`` on even functions is
one-dimensional depends on no other mode sharing the value ``Phihat(k0)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .kernel import KernelSpectrum, Mode, canonical, is_zero
from .spectral_core import CosineSeries, convolve, derivative2

EQ_TOL = 1e-12
ZERO_KERNEL_DIAGNOSTIC = (
    "kernel is identically zero (constant Phi): no mode can bifurcate and the "
    "non-uniqueness argument does not apply"
)


class OutsideLatticeWarning(UserWarning):
    """A multiplier was requested for a mode the kernel does not represent."""


@dataclass(frozen=True)
class HypothesisVerdict:
    nonzero: bool
    separated: bool
    violating_modes: tuple[Mode, ...] = ()
    gaps: tuple[float, ...] = ()

    @property
    def holds(self) -> bool:
        return self.nonzero and self.separated


@dataclass(frozen=True)
class BifurcationCandidate:
    """Mode ``k0`` with critical constant ``c0 = -a / Phihat(k0)``."""

    k0: Mode
    c0: float
    phi_hat: float
    hypothesis_H: HypothesisVerdict
    kernel_dim: int
    lattice_radius: int

    def as_dict(self) -> dict:
        return {
            "k0": list(self.k0),
            "c0": self.c0,
            "phi_hat_k0": self.phi_hat,
            "hypothesis_H": {
                "pass": self.hypothesis_H.holds,
                "nonzero": self.hypothesis_H.nonzero,
                "separated": self.hypothesis_H.separated,
                "violating_modes": [list(k) for k in self.hypothesis_H.violating_modes],
                "gaps": list(self.hypothesis_H.gaps),
            },
            "kernel_dim": self.kernel_dim,
            "lattice_radius": self.lattice_radius,
        }


@dataclass(frozen=True)
class Detection:
    """Output of :func:`detect_bifurcations`; iterates over the candidates."""

    candidates: tuple[BifurcationCandidate, ...]
    diagnostics: tuple[str, ...] = ()

    def __iter__(self):
        return iter(self.candidates)

    def __len__(self) -> int:
        return len(self.candidates)

    def __getitem__(self, i: int) -> BifurcationCandidate:
        return self.candidates[i]


@dataclass(frozen=True)
class UniquenessCertificate:
    energy_criterion: bool
    spectral_criterion: bool
    kernel_l2_norm: float
    threshold: float
    nullspace: tuple[Mode, ...] = field(default=())
    lattice_radius: int = 0

    def as_dict(self) -> dict:
        return {
            "energy_criterion": self.energy_criterion,
            "spectral_criterion": self.spectral_criterion,
            "kernel_l2_norm": self.kernel_l2_norm,
            "energy_threshold": self.threshold,
            "nullspace": [list(k) for k in self.nullspace],
            "lattice_radius": self.lattice_radius,
        }


@dataclass(frozen=True)
class TransversalityResult:
    """Action of ``h -> div(Phi * grad h)`` on ``cos(2 pi k0.x)`` versus its predicted multiple."""

    prefactor: float
    defect: float
    holds: bool

    def as_dict(self) -> dict:
        return {"prefactor": self.prefactor, "defect": self.defect, "holds": self.holds}


def _norm2(k) -> int:
    return sum(int(c) * int(c) for c in k)


def multiplier(k, a: float, c: float, kernel: KernelSpectrum) -> float:
    """Symbol ``-(2 pi)^2 |k|^2 (a + c Phihat(k))`` of the linearization at ``u = c``."""
    if not a > 0:
        raise ValueError("a must be positive")
    if isinstance(k, (int, np.integer)):
        k = (int(k),)
    if len(k) != kernel.dim:
        raise ValueError(f"mode {tuple(k)} does not match kernel dimension {kernel.dim}")
    if not kernel.in_lattice(k):
        warnings.warn(
            f"mode {tuple(k)} lies outside lattice radius {kernel.lattice_radius}; Phihat taken as 0",
            OutsideLatticeWarning,
            stacklevel=2,
        )
        phi = 0.0
    else:
        phi = kernel(k)
    return -((2 * math.pi) ** 2) * _norm2(k) * (a + c * phi)


def hypothesis_h(k0, kernel: KernelSpectrum, eq_tol: float = EQ_TOL) -> HypothesisVerdict:
    """Check ``Phihat(k0) != 0`` and ``Phihat(k) != Phihat(k0)`` for stored ``k != +-k0, 0``."""
    k0 = canonical(k0)
    target = kernel(k0)
    violating, gaps = [], []
    for k, value in kernel.entries.items():
        if k == k0 or is_zero(k):
            continue
        gap = abs(value - target)
        if gap <= eq_tol:
            violating.append(k)
            gaps.append(gap)
    return HypothesisVerdict(
        nonzero=abs(target) > eq_tol,
        separated=not violating,
        violating_modes=tuple(violating),
        gaps=tuple(gaps),
    )


def detect_bifurcations(a: float, kernel: KernelSpectrum, eq_tol: float = EQ_TOL) -> Detection:
    """One candidate per stored mode with a nonzero coefficient.

    An identically zero kernel yields no candidates and a diagnostic.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    if kernel.is_zero_kernel(eq_tol):
        return Detection((), (ZERO_KERNEL_DIAGNOSTIC,))
    out = []
    for k0 in kernel.nonzero_modes:
        phi = kernel(k0)
        if abs(phi) <= eq_tol:
            continue
        verdict = hypothesis_h(k0, kernel, eq_tol)
        out.append(
            BifurcationCandidate(
                k0=k0,
                c0=-a / phi,
                phi_hat=phi,
                hypothesis_H=verdict,
                kernel_dim=1 + len(verdict.violating_modes),
                lattice_radius=kernel.lattice_radius,
            )
        )
    diagnostics = ()
    if not out:
        diagnostics = ("no stored mode has a coefficient above the equality tolerance",)
    return Detection(tuple(out), diagnostics)


def linear_nullspace(a: float, b: float, kernel: KernelSpectrum, eq_tol: float = EQ_TOL) -> list[Mode]:
    """Nonzero modes with ``a + b Phihat(k) = 0``: nonconstant solutions of ``a u'' + b Phi * u'' = 0``."""
    if not a > 0:
        raise ValueError("a must be positive")
    if b == 0:
        return []
    return [k for k in kernel.nonzero_modes if abs(a + b * kernel(k)) <= eq_tol]


def linear_uniqueness_certificate(
    a: float, b: float, kernel: KernelSpectrum, eq_tol: float = EQ_TOL
) -> UniquenessCertificate:
    """Energy (``||Phi||_2 < a/|b|``) and spectral (empty nullspace) uniqueness criteria.

    For ``b = 0`` the equation is ``a u'' = 0`` and both criteria hold trivially.
    """
    null = tuple(linear_nullspace(a, b, kernel, eq_tol))
    threshold = math.inf if b == 0 else a / abs(b)
    energy = kernel.l2_norm < threshold
    spectral = not null
    if energy and not spectral:
        raise AssertionError("energy criterion holds but the linear nullspace is nonempty")
    return UniquenessCertificate(energy, spectral, kernel.l2_norm, threshold, null, kernel.lattice_radius)


def _apply_drift_operator_nd(k0: Mode, kernel: KernelSpectrum) -> tuple[np.ndarray, np.ndarray]:
    """Apply ``div(Phi * grad .)`` to ``cos(2 pi k0.x)`` on a grid; return (result, input)."""
    n = 2 * kernel.lattice_radius + 2
    axes = [np.arange(n) / n] * kernel.dim
    grids = np.meshgrid(*axes, indexing="ij")
    phase = sum(k * g for k, g in zip(k0, grids))
    v0 = np.cos(2 * np.pi * phase)
    freqs = np.meshgrid(*[np.fft.fftfreq(n, 1.0 / n)] * kernel.dim, indexing="ij")
    symbol = np.zeros(v0.shape)
    for idx in np.ndindex(v0.shape):
        k = tuple(int(round(f[idx])) for f in freqs)
        if kernel.in_lattice(k):
            symbol[idx] = -((2 * np.pi) ** 2) * _norm2(k) * kernel(k)
    out = np.fft.ifftn(symbol * np.fft.fftn(v0)).real
    return out, v0


def transversality_check(candidate: BifurcationCandidate, a: float, kernel: KernelSpectrum) -> TransversalityResult:
    """Verify ``div(Phi * grad v0) = -(2 pi)^2 |k0|^2 Phihat(k0) v0`` for ``v0 = cos(2 pi k0.x)``.

    A nonzero prefactor means the parameter derivative of ``L_c`` pushes ``v0``
    out of the range of ``L_{c0}``.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    k0 = candidate.k0
    phi = kernel(k0)
    prefactor = -((2 * math.pi) ** 2) * _norm2(k0) * phi
    if kernel.dim == 1:
        (k,) = k0
        v0 = CosineSeries.mode(k, max(k, 1))
        applied = derivative2(convolve(v0, kernel)).coeffs
        target = v0.coeffs
    else:
        applied, target = _apply_drift_operator_nd(k0, kernel)
        applied, target = applied.ravel(), target.ravel()
    err = float(np.linalg.norm(applied - prefactor * target))
    scale = float(np.linalg.norm(prefactor * target))
    defect = err / scale if scale > 0 else err
    return TransversalityResult(prefactor=prefactor, defect=defect, holds=abs(phi) > EQ_TOL)
