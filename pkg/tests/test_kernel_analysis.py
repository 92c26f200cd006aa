import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driftbif.kernel import KernelSpectrum, canonical, cosine_kernel
from driftbif.kernel_analysis import (
    ZERO_KERNEL_DIAGNOSTIC,
    OutsideLatticeWarning,
    detect_bifurcations,
    linear_nullspace,
    linear_uniqueness_certificate,
    multiplier,
    transversality_check,
)

FOUR_PI2 = 4 * math.pi**2


def k1(entries, **kw):
    return KernelSpectrum.from_coefficients(entries, **kw)


class TestKernelSpectrum:
    def test_canonical_representative(self):
        assert canonical((-1, 2)) == (1, -2)
        assert canonical((0, -3)) == (0, 3)
        assert canonical((0, 0)) == (0, 0)

    def test_even_lookup(self):
        k = k1({(1, -2): 0.3}, dim=2)
        assert k((-1, 2)) == 0.3
        assert k((1, -2)) == 0.3
        assert k((1, 2)) == 0.0

    def test_conflicting_pair_rejected(self):
        with pytest.raises(ValueError):
            k1({1: 1.0, -1: 2.0})

    def test_l2_norm_parseval(self):
        assert cosine_kernel().l2_norm == pytest.approx(math.sqrt(2))
        assert k1({0: 0.5, 2: 1.0}).l2_norm == pytest.approx(math.sqrt(0.25 + 2.0))

    def test_from_samples_recovers_coefficients(self):
        x = np.arange(32) / 32
        phi = 2 * np.cos(2 * np.pi * x) - 0.6 * np.cos(6 * np.pi * x)
        k = KernelSpectrum.from_samples(phi)
        assert k(1) == pytest.approx(1.0, abs=1e-14)
        assert k(3) == pytest.approx(-0.3, abs=1e-14)
        assert k(2) == pytest.approx(0.0, abs=1e-14)
        assert k.evenness_defect < 1e-14

    def test_from_samples_reports_odd_part(self):
        x = np.arange(16) / 16
        k = KernelSpectrum.from_samples(2 * np.cos(2 * np.pi * x) + 0.2 * np.sin(2 * np.pi * x))
        assert k(1) == pytest.approx(1.0, abs=1e-14)
        assert k.evenness_defect == pytest.approx(0.2, rel=1e-12)

    def test_sign_changing_kernel_is_reported_not_rejected(self):
        report = cosine_kernel().pointwise_sign_report()
        assert report["nonnegative"] is False
        assert report["min_value"] == pytest.approx(-2.0)


def test_multiplier_examples():
    k = k1({1: 1.0, 2: 0.0}, lattice_radius=2)
    assert multiplier((0,), 1.0, 5.0, k) == 0.0
    assert multiplier(1, 1.0, -1.0, k) == 0.0
    assert multiplier(2, 1.0, -1.0, k) == pytest.approx(-16 * math.pi**2)


def test_multiplier_outside_lattice_flagged():
    with pytest.warns(OutsideLatticeWarning):
        val = multiplier(5, 1.0, -1.0, cosine_kernel())
    assert val == pytest.approx(-FOUR_PI2 * 25)


class TestDetection:
    def test_two_cos_kernel(self):
        (cand,) = detect_bifurcations(1.0, cosine_kernel())
        assert cand.k0 == (1,)
        assert cand.c0 == -1.0
        assert cand.hypothesis_H.holds
        assert cand.kernel_dim == 1

    def test_shared_coefficient_violates_h(self):
        cands = detect_bifurcations(1.0, k1({1: 1.0, 2: 1.0}))
        assert [c.k0 for c in cands] == [(1,), (2,)]
        assert cands[0].hypothesis_H.violating_modes == ((2,),)
        assert cands[1].hypothesis_H.violating_modes == ((1,),)
        assert not any(c.hypothesis_H.separated for c in cands)
        assert all(c.kernel_dim == 2 for c in cands)

    def test_critical_constant(self):
        (cand,) = detect_bifurcations(2.0, k1({3: 0.5}))
        assert cand.k0 == (3,)
        assert cand.c0 == -4.0

    def test_zero_kernel(self):
        det = detect_bifurcations(1.0, k1({1: 0.0, 2: 0.0}))
        assert len(det) == 0
        assert ZERO_KERNEL_DIAGNOSTIC in det.diagnostics

    def test_near_tie_within_tolerance(self):
        cands = detect_bifurcations(1.0, k1({1: 0.4, 2: 0.4 + 5e-13}))
        assert cands[0].hypothesis_H.gaps[0] == pytest.approx(5e-13, rel=1e-3)

    def test_multidimensional_lattice(self):
        # |k| = 1 modes (1,0) and (0,1) share a value: a square-symmetric kernel
        k = k1({(1, 0): 0.5, (0, 1): 0.5, (1, 1): -0.2}, dim=2)
        cands = {c.k0: c for c in detect_bifurcations(1.0, k)}
        assert not cands[(1, 0)].hypothesis_H.separated
        assert cands[(1, 1)].hypothesis_H.holds
        assert cands[(1, 1)].c0 == pytest.approx(5.0)


kernels = st.dictionaries(st.integers(1, 8), st.floats(-2, 2).filter(lambda v: abs(v) > 1e-6), min_size=1, max_size=6)


@given(kernels, st.floats(0.1, 10))
def test_multiplier_vanishes_at_every_candidate(entries, a):
    kernel = k1(entries, lattice_radius=8)
    for cand in detect_bifurcations(a, kernel):
        assert multiplier(cand.k0, a, cand.c0, kernel) == pytest.approx(0.0, abs=1e-12 * a * FOUR_PI2 * 64)


@given(kernels, st.floats(0.1, 10))
def test_separated_candidates_have_one_dimensional_kernel(entries, a):
    kernel = k1(entries, lattice_radius=8)
    for cand in detect_bifurcations(a, kernel):
        if cand.hypothesis_H.holds:
            assert cand.kernel_dim == 1
        # the counted kernel modes are exactly those where the multiplier vanishes
        zeros = [k for k in kernel.nonzero_modes if abs(kernel(k) - cand.phi_hat) <= 1e-12]
        assert cand.kernel_dim == len(zeros)


@given(kernels, st.floats(0.1, 10), st.floats(0.1, 10))
def test_scaling_covariance(entries, a, lam):
    kernel = k1(entries, lattice_radius=8)
    base = detect_bifurcations(a, kernel)
    scaled = detect_bifurcations(lam * a, kernel)
    assert [c.k0 for c in base] == [c.k0 for c in scaled]
    for b, s in zip(base, scaled):
        assert s.c0 == pytest.approx(lam * b.c0, rel=1e-14)


def test_linear_nullspace_examples():
    assert linear_nullspace(1.0, 1.0, k1({2: -1.0})) == [(2,)]
    assert linear_nullspace(1.0, 1.0, k1({1: 0.3, 2: 2.0, 3: 0.0})) == []
    assert linear_nullspace(1.0, -0.5, k1({1: 2.0})) == [(1,)]
    assert linear_nullspace(1.0, 0.0, k1({1: -1.0})) == []


def test_uniqueness_certificate_examples():
    cert = linear_uniqueness_certificate(1.0, 1.0, cosine_kernel())
    assert cert.kernel_l2_norm == pytest.approx(math.sqrt(2))
    assert not cert.energy_criterion
    assert cert.spectral_criterion
    assert linear_uniqueness_certificate(10.0, 1.0, cosine_kernel()).energy_criterion
    assert not linear_uniqueness_certificate(1.0, 1.0, k1({1: -1.0})).spectral_criterion
    zero_b = linear_uniqueness_certificate(1.0, 0.0, k1({1: -1.0}))
    assert zero_b.energy_criterion and zero_b.spectral_criterion


@settings(max_examples=100)
@given(kernels, st.floats(0.1, 5), st.floats(-5, 5))
def test_energy_implies_spectral(entries, a, b):
    cert = linear_uniqueness_certificate(a, b, k1(entries, lattice_radius=8))
    assert not cert.energy_criterion or cert.spectral_criterion


class TestTransversality:
    def test_two_cos(self):
        (cand,) = detect_bifurcations(1.0, cosine_kernel())
        res = transversality_check(cand, 1.0, cosine_kernel())
        assert res.prefactor == pytest.approx(-FOUR_PI2)
        assert res.defect <= 1e-14
        assert res.holds

    def test_negative_coefficient_mode_two(self):
        kernel = k1({1: 1.0, 2: -0.3})
        cand = [c for c in detect_bifurcations(1.0, kernel) if c.k0 == (2,)][0]
        res = transversality_check(cand, 1.0, kernel)
        assert res.prefactor == pytest.approx(4.8 * math.pi**2)
        assert res.defect <= 1e-14

    def test_vanishing_coefficient_flagged(self):
        (cand,) = detect_bifurcations(1.0, cosine_kernel())
        res = transversality_check(cand, 1.0, k1({1: 0.0}))
        assert not res.holds
        assert res.prefactor == 0.0

    def test_two_dimensional(self):
        kernel = k1({(1, 1): -0.2, (1, 0): 0.5}, dim=2)
        cand = [c for c in detect_bifurcations(1.0, kernel) if c.k0 == (1, 1)][0]
        res = transversality_check(cand, 1.0, kernel)
        assert res.prefactor == pytest.approx(FOUR_PI2 * 2 * 0.2)
        assert res.defect <= 1e-13
