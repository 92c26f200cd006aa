"""Bifurcation and explicit non-uniqueness for a nonlocal elliptic equation on the torus.

The equation is ``div(a grad u + u Phi * grad u) = 0``. Constants always solve
it; this package locates where nonconstant periodic branches split off the
constants, traces them numerically, and builds the closed-form Bessel family
available for ``Phi(x) = 2 cos(2 pi x)``.
"""

__version__ = "0.1.0"

from .bessel import BesselEval, bessel_i, bessel_recurrence_defect, coefficient_decay_bound
from .continuation import Branch, BranchPoint, assemble_jacobian, corrector, evaluate_F, trace_branch
from .explicit_solution import construct, family_curve, full_equation_residual, recurrence_defect
from .kernel import KernelSpectrum, cosine_kernel
from .kernel_analysis import (
    BifurcationCandidate,
    detect_bifurcations,
    linear_nullspace,
    linear_uniqueness_certificate,
    multiplier,
    transversality_check,
)
from .spectral_core import CosineSeries, SolveConfig

__all__ = [
    "BesselEval",
    "BifurcationCandidate",
    "Branch",
    "BranchPoint",
    "CosineSeries",
    "KernelSpectrum",
    "SolveConfig",
    "assemble_jacobian",
    "bessel_i",
    "bessel_recurrence_defect",
    "coefficient_decay_bound",
    "construct",
    "corrector",
    "cosine_kernel",
    "detect_bifurcations",
    "evaluate_F",
    "family_curve",
    "full_equation_residual",
    "linear_nullspace",
    "linear_uniqueness_certificate",
    "multiplier",
    "recurrence_defect",
    "trace_branch",
    "transversality_check",
]
