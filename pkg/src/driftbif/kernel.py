"""Even, real interaction kernels stored by their Fourier coefficients.

A kernel ``Phi`` on the unit torus ``[0, 1)^d`` is represented through

    Phi(x) = sum_k Phihat(k) exp(2 pi i k.x),

with ``Phihat(-k) == Phihat(k)`` real. Only one representative of each pair
``{k, -k}`` is stored: the one whose first nonzero component is positive.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

Mode = tuple[int, ...]


def canonical(k: Sequence[int]) -> Mode:
    """Return the stored representative of the pair ``{k, -k}``."""
    k = tuple(int(c) for c in k)
    for c in k:
        if c > 0:
            return k
        if c < 0:
            return tuple(-c for c in k)
    return k


def is_zero(k: Sequence[int]) -> bool:
    return all(c == 0 for c in k)


@dataclass(frozen=True)
class KernelSpectrum:
    """Fourier coefficients of an even real kernel over a finite lattice.

    Attributes:
        dim: Spatial dimension ``d``.
        entries: Map from canonical lattice points to ``Phihat(k)``. Absent
            modes within ``lattice_radius`` are zero.
        lattice_radius: Every mode with ``max|k_i| <= R`` is represented.
        l2_norm: ``||Phi||_{L^2}``; computed by Parseval when not supplied.
        evenness_defect: Size of the odd/imaginary part removed on ingestion
            (zero for kernels built from explicit coefficients).
    """

    dim: int
    entries: Mapping[Mode, float]
    lattice_radius: int
    l2_norm: float = float("nan")
    evenness_defect: float = 0.0
    _dense: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if self.lattice_radius < 1:
            raise ValueError(f"lattice_radius must be positive, got {self.lattice_radius}")
        clean: dict[Mode, float] = {}
        for k, value in self.entries.items():
            k = tuple(int(c) for c in k)
            if len(k) != self.dim:
                raise ValueError(f"mode {k} does not have dimension {self.dim}")
            if max(abs(c) for c in k) > self.lattice_radius:
                raise ValueError(f"mode {k} lies outside lattice radius {self.lattice_radius}")
            value = float(value)
            if not math.isfinite(value):
                raise ValueError(f"coefficient at {k} is not finite")
            ck = canonical(k)
            if ck in clean and clean[ck] != value:
                raise ValueError(f"modes {k} and {ck} given different coefficients")
            clean[ck] = value
        object.__setattr__(self, "entries", MappingProxyType(dict(sorted(clean.items()))))
        if math.isnan(self.l2_norm):
            total = sum((1 if is_zero(k) else 2) * v * v for k, v in clean.items())
            object.__setattr__(self, "l2_norm", math.sqrt(total))
        if self.dim == 1:
            dense = np.zeros(self.lattice_radius + 1)
            for (k,), v in clean.items():
                dense[k] = v
            object.__setattr__(self, "_dense", dense)

    def __call__(self, k: Sequence[int] | int) -> float:
        if isinstance(k, (int, np.integer)):
            k = (int(k),)
        return self.entries.get(canonical(k), 0.0)

    def in_lattice(self, k: Sequence[int]) -> bool:
        return max(abs(int(c)) for c in k) <= self.lattice_radius

    @property
    def nonzero_modes(self) -> list[Mode]:
        """Stored nonzero-wavenumber modes, in canonical order."""
        return [k for k in self.entries if not is_zero(k)]

    def is_zero_kernel(self, tol: float = 0.0) -> bool:
        return all(abs(v) <= tol for v in self.entries.values())

    def is_nonnegative(self) -> bool:
        """Whether every Fourier coefficient is >= 0 (not a pointwise statement)."""
        return all(v >= 0 for v in self.entries.values())

    def values_1d(self, order: int) -> np.ndarray:
        """``Phihat(1..order)`` as an array; modes past the lattice read as zero."""
        if self.dim != 1:
            raise ValueError(f"a 1-D kernel is required, got dim={self.dim}")
        out = np.zeros(order)
        n = min(order, self.lattice_radius)
        out[:n] = self._dense[1 : n + 1]
        return out

    def pointwise_sign_report(self, grid_size: int = 256) -> dict:
        """Sample ``Phi`` in 1-D and report whether it stays nonnegative.

        Positivity is informational only; sign-changing kernels are accepted.
        """
        if self.dim != 1:
            return {"checked": False}
        x = np.arange(grid_size) / grid_size
        phi = np.full(grid_size, self(0))
        for (k,), v in self.entries.items():
            if k:
                phi += 2.0 * v * np.cos(2 * np.pi * k * x)
        return {"checked": True, "min_value": float(phi.min()), "nonnegative": bool(phi.min() >= 0)}

    @classmethod
    def from_coefficients(
        cls,
        coefficients: Mapping[Mode | int, float] | Iterable[tuple[Sequence[int] | int, float]],
        dim: int = 1,
        lattice_radius: int | None = None,
        l2_norm: float | None = None,
    ) -> "KernelSpectrum":
        """Build from ``{k: Phihat(k)}``; integer keys are accepted for ``dim=1``."""
        items = coefficients.items() if isinstance(coefficients, Mapping) else coefficients
        entries: dict[Mode, float] = {}
        for k, v in items:
            k = (int(k),) if isinstance(k, (int, np.integer)) else tuple(int(c) for c in k)
            entries[k] = float(v)
        if lattice_radius is None:
            lattice_radius = max([1] + [max(abs(c) for c in k) for k in entries])
        return cls(
            dim=dim,
            entries=entries,
            lattice_radius=lattice_radius,
            l2_norm=float("nan") if l2_norm is None else float(l2_norm),
        )

    @classmethod
    def from_samples(cls, samples: Sequence[float], lattice_radius: int | None = None) -> "KernelSpectrum":
        """Recover a 1-D kernel from samples ``Phi(j/N)``, ``j = 0..N-1``.

        The discrete transform is symmetrized to enforce evenness; the removed
        odd and imaginary parts are reported as ``evenness_defect``.
        """
        phi = np.asarray(samples, dtype=float)
        n = phi.size
        if n < 3:
            raise ValueError("at least 3 samples are required")
        coef = np.fft.fft(phi) / n
        radius = (n - 1) // 2 if lattice_radius is None else int(lattice_radius)
        if radius < 1 or radius > (n - 1) // 2:
            raise ValueError(f"lattice_radius must lie in [1, {(n - 1) // 2}] for {n} samples")
        pos = coef[1 : radius + 1]
        neg = coef[-1 : -radius - 1 : -1]
        sym = 0.5 * (pos + neg)
        defect = max(
            float(np.max(np.abs(pos - neg), initial=0.0)),
            float(np.max(np.abs(sym.imag), initial=0.0)),
            abs(coef[0].imag),
        )
        entries: dict[Mode, float] = {(0,): float(coef[0].real)}
        for k, v in enumerate(sym.real, start=1):
            entries[(k,)] = float(v)
        return cls(dim=1, entries=entries, lattice_radius=radius, evenness_defect=defect)


def lattice_points(dim: int, radius: int) -> Iterable[Mode]:
    """Canonical nonzero points of ``{|k|_inf <= radius}``."""
    for k in itertools.product(range(-radius, radius + 1), repeat=dim):
        if not is_zero(k) and canonical(k) == k:
            yield k


def cosine_kernel(amplitude: float = 1.0) -> KernelSpectrum:
    """``Phi(x) = 2 * amplitude * cos(2 pi x)``, i.e. ``Phihat(+-1) = amplitude``."""
    return KernelSpectrum.from_coefficients({1: amplitude}, dim=1, lattice_radius=1)
