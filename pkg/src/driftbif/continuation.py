"""Newton continuation of nonconstant branches in one dimension.

The steady-state map, for ``u = c + v`` with ``v`` a zero-mean cosine series, is

    F(c, v) = a v'' + c A v + B(v, v),   A v = (Phi * v')',   B(v, w) = (v (Phi * w'))'.

It is exactly quadratic in ``(c, v)``. Near a bifurcation mode ``k0`` the branch
is indexed by its amplitude ``s = V_{k0}``: for each ``s`` Newton's method
solves the bordered system ``{F(c, v) = 0 on modes 1..M, V_{k0} = s}`` for the
other coefficients and ``c``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg

from .kernel import KernelSpectrum
from .kernel_analysis import BifurcationCandidate
from .spectral_core import (
    TWO_PI,
    CosineSeries,
    SolveConfig,
    bilinear_drift,
    derivative2,
    nonlinear_drift_tail,
    nonlinear_drift_term,
    sobolev_norm,
)

log = logging.getLogger(__name__)

PIVOT_RTOL = 1e-13
ENLARGE = 8


class DegenerateHypothesisWarning(UserWarning):
    """Tracing from a mode whose coefficient is shared by another mode."""


class BranchNotFound(RuntimeError):
    """The first continuation step did not converge at this truncation."""


@dataclass(frozen=True)
class BranchPoint:
    amplitude: float
    c: float
    solution: CosineSeries
    residual_l2: float
    newton_iters: int
    converged: bool
    enlarged_residual: float = math.nan
    truncation_tail: float = math.nan
    sobolev_norm: float = math.nan
    message: str = ""


@dataclass
class Branch:
    k0: int
    a: float
    kernel: KernelSpectrum
    c0: float
    points: list[BranchPoint] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def all_converged(self) -> bool:
        return bool(self.points) and all(p.converged for p in self.points)

    def nearest(self, s: float) -> BranchPoint:
        return min(self.points, key=lambda p: abs(p.amplitude - s))


def operator_A(v: CosineSeries, kernel: KernelSpectrum, M_out: int | None = None) -> CosineSeries:
    """``(Phi * v')'``, diagonal with entries ``-(2 pi m)^2 Phihat(m)``."""
    M_out = v.order if M_out is None else int(M_out)
    k = TWO_PI * np.arange(1, v.order + 1)
    return CosineSeries(-(k**2) * kernel.values_1d(v.order) * v.coeffs).resize(M_out)


def evaluate_F(c: float, v: CosineSeries, a: float, kernel: KernelSpectrum, M_out: int | None = None) -> CosineSeries:
    """``a v'' + c A v + B(v, v)`` on modes ``1..M_out`` (default: the order of ``v``)."""
    M_out = v.order if M_out is None else int(M_out)
    return a * derivative2(v).resize(M_out) + nonlinear_drift_term(c, v, kernel, M_out)


def assemble_jacobian(
    c: float, v: CosineSeries, a: float, kernel: KernelSpectrum, M: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Matrix of ``h -> DF(c, v)[0, h]`` in the basis ``cos(2 pi m x)``, and the ``dc`` column ``A v``.

    ``DF(c, v)[0, h] = a h'' + ((c + v)(Phi * h'))' + (h (Phi * v'))'``.
    """
    M = v.order if M is None else int(M)
    v = v.resize(M)
    J = np.empty((M, M))
    for m in range(1, M + 1):
        e = CosineSeries.mode(m, M)
        col = a * derivative2(e) + c * operator_A(e, kernel) + bilinear_drift(v, e, kernel, M) + bilinear_drift(e, v, kernel, M)
        J[:, m - 1] = col.coeffs
    return J, operator_A(v, kernel, M).coeffs


def second_derivative_action(
    h1: CosineSeries,
    h2: CosineSeries,
    dc1: float,
    dc2: float,
    kernel: KernelSpectrum,
    M_out: int,
) -> CosineSeries:
    """``D^2F[(dc1, h1), (dc2, h2)]``. The base point drops out: ``F`` is quadratic."""
    return (
        dc1 * operator_A(h2, kernel, M_out)
        + dc2 * operator_A(h1, kernel, M_out)
        + bilinear_drift(h1, h2, kernel, M_out)
        + bilinear_drift(h2, h1, kernel, M_out)
    )


def _bordered(J: np.ndarray, col: np.ndarray, k0: int) -> np.ndarray:
    M = J.shape[0]
    out = np.zeros((M + 1, M + 1))
    out[:M, :M] = J
    out[:M, M] = col
    out[M, k0 - 1] = 1.0
    return out


def bordered_condition(c: float, v: CosineSeries, a: float, kernel: KernelSpectrum, k0: int) -> float:
    J, col = assemble_jacobian(c, v, a, kernel)
    return float(np.linalg.cond(_bordered(J, col, k0)))


def _finish(s, c, v, a, kernel, config, iters, converged, message="") -> BranchPoint:
    M = v.order
    res = evaluate_F(c, v, a, kernel, M).norm()
    return BranchPoint(
        amplitude=float(s),
        c=float(c),
        solution=v,
        residual_l2=res,
        newton_iters=iters,
        converged=converged,
        enlarged_residual=evaluate_F(c, v, a, kernel, M + ENLARGE).norm(),
        truncation_tail=nonlinear_drift_tail(c, v, kernel, M),
        sobolev_norm=sobolev_norm(v, config.sobolev_index),
        message=message,
    )


def corrector(
    s: float,
    guess: tuple[float, CosineSeries],
    a: float,
    kernel: KernelSpectrum,
    k0: int,
    config: SolveConfig = SolveConfig(),
) -> BranchPoint:
    """Solve ``F(c, v) = 0`` with ``V_{k0} = s`` by Newton's method from ``guess = (c, v)``.

    A bordered Jacobian with a pivot below ``1e-13`` of the largest is reported
    as non-convergence rather than pushed through.
    """
    M = config.truncation
    if not 1 <= k0 <= M:
        raise ValueError(f"k0 = {k0} must lie in 1..{M}")
    c, v = float(guess[0]), guess[1].resize(M)
    x = np.append(v.coeffs, c)
    x[k0 - 1] = s
    for it in range(config.newton_max_iter + 1):
        v, c = CosineSeries(x[:M]), float(x[M])
        F = evaluate_F(c, v, a, kernel, M).coeffs
        res = float(np.linalg.norm(F))
        if not math.isfinite(res):
            return _finish(s, c, v, a, kernel, config, it, False, "residual overflow")
        if res <= config.newton_tol:
            return _finish(s, c, v, a, kernel, config, it, True)
        if it == config.newton_max_iter:
            break
        J, col = assemble_jacobian(c, v, a, kernel, M)
        with warnings.catch_warnings():
            # exact zero pivots are handled just below
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(_bordered(J, col, k0))
        pivots = np.abs(np.diag(lu))
        if pivots.min() < PIVOT_RTOL * pivots.max():
            msg = f"singular bordered Jacobian (pivot ratio {pivots.min() / pivots.max():.3e})"
            log.warning("s=%g: %s", s, msg)
            return _finish(s, c, v, a, kernel, config, it, False, msg)
        rhs = -np.append(F, x[k0 - 1] - s)
        x = x + scipy.linalg.lu_solve((lu, piv), rhs)
        x[k0 - 1] = s
    return _finish(s, c, v, a, kernel, config, config.newton_max_iter, False, "newton_max_iter reached")


def extrapolate_c0(points: list[BranchPoint], n: int = 6) -> float:
    """Quadratic fit of ``c(s)`` through the ``n`` smallest-amplitude points, read at ``s = 0``."""
    pts = sorted((p for p in points if p.converged), key=lambda p: abs(p.amplitude))[:n]
    if len(pts) < 3:
        return math.nan
    s = np.array([p.amplitude for p in pts])
    c = np.array([p.c for p in pts])
    return float(np.polyfit(s, c, 2)[-1])


def trace_branch(
    a: float,
    kernel: KernelSpectrum,
    candidate: BifurcationCandidate,
    s_max: float = 1.0,
    steps: int = 20,
    config: SolveConfig = SolveConfig(),
) -> Branch:
    """Follow the branch born at ``(candidate.c0, 0)`` for ``0 < |s| <= s_max``.

    Each sign is walked outward in ``steps`` equal increments. The first step
    starts from the tangent guess ``(c0, s cos(2 pi k0 x))``; later steps start
    from the previous solution. A direction stops at its first failure.

    Raises:
        BranchNotFound: if the first step of either direction fails.
        ValueError: on ``Phihat(k0) = 0`` or invalid step settings.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    if not s_max > 0:
        raise ValueError("s_max must be positive")
    if kernel.dim != 1 or len(candidate.k0) != 1:
        raise ValueError("branch tracing is one-dimensional")
    (k0,) = candidate.k0
    if not candidate.hypothesis_H.nonzero:
        raise ValueError(f"Phihat({k0}) = 0: hypothesis (H) fails, no bifurcation at this mode")
    M = config.truncation
    branch = Branch(
        k0=k0,
        a=float(a),
        kernel=kernel,
        c0=candidate.c0,
        provenance={
            "a": float(a),
            "k0": k0,
            "c0": candidate.c0,
            "s_max": float(s_max),
            "steps": int(steps),
            "config": asdict(config),
        },
    )
    if not candidate.hypothesis_H.separated:
        others = [list(k) for k in candidate.hypothesis_H.violating_modes]
        warnings.warn(
            f"mode {k0} shares its coefficient with {others}; the kernel of the "
            "linearization is not one-dimensional and the traced curve is one of several",
            DegenerateHypothesisWarning,
            stacklevel=2,
        )
        branch.diagnostics["violating_modes"] = others
    ds = s_max / steps
    for sign in (1.0, -1.0):
        prev = None
        for j in range(1, steps + 1):
            s = sign * j * ds
            guess = (candidate.c0, CosineSeries.mode(k0, M, s)) if prev is None else (prev.c, prev.solution)
            if prev is None:
                branch.diagnostics.setdefault("first_step_condition", {})[str(int(sign))] = bordered_condition(
                    guess[0], guess[1], a, kernel, k0
                )
            point = corrector(s, guess, a, kernel, k0, config)
            branch.points.append(point)
            if not point.converged:
                if prev is None:
                    raise BranchNotFound(
                        f"no branch found at this truncation (M={M}): first step s={s:g} failed: {point.message}"
                    )
                log.warning("continuation stopped at s=%g: %s", s, point.message)
                break
            prev = point
    branch.points.sort(key=lambda p: p.amplitude)
    c_ext = extrapolate_c0(branch.points)
    branch.diagnostics["c_extrapolated"] = c_ext
    branch.diagnostics["c0_gap"] = abs(c_ext - candidate.c0)
    conv = [p for p in branch.points if p.converged]
    branch.diagnostics["s_max_converged"] = max((abs(p.amplitude) for p in conv), default=0.0)
    return branch
