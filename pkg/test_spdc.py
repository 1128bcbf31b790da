#!/usr/bin/env python3
"""
Tests for the joint spectral amplitude, nonlinear overlap and pair rates
"""
import numpy as np
import pytest

from conftest import linear_mismatch
from brw_source.exceptions import GridContractError
from brw_source.models.mode import ModeProfile2D
from brw_source.services.materials import FiberMode
from brw_source.services.spdc import (
    BRIGHTNESS_BANDWIDTH, NonlinearCoupling, compute_jsa, emission_rate, fiber_coupling, jsi_fwhm,
    optimal_fiber_mfd, overlap_gamma, pump_flux_per_mw, sigma, symmetric_grid,
)
from brw_source.utils import HBAR, omega_to_wavelength_um

SINC2_HALF = 1.391557377


def gaussian(x, waist):
    return (2.0 / (np.pi * waist ** 2)) ** 0.25 * np.exp(-x ** 2 / waist ** 2)


def gaussian_profile(waist, axis=np.linspace(-15.0, 15.0, 1501)):
    return ModeProfile2D(x_um=axis, y_um=axis, x_field=gaussian(axis, waist), y_field=gaussian(axis, waist))


def test_symmetric_grid():
    """Test the detuning grid contains -Omega for every Omega"""
    grid = symmetric_grid(1.0e14, 101)
    assert grid.size == 101
    assert grid[50] == 0.0
    np.testing.assert_array_equal(grid, -grid[::-1])


def test_even_sample_count_rejected():
    """Test even sample counts"""
    with pytest.raises(GridContractError):
        symmetric_grid(1.0e14, 100)


def test_phase_matched_everywhere_gives_flat_jsa(symmetric_mismatch):
    """Test |Phi| = 1 when Delta_k vanishes for every detuning"""
    jsa = compute_jsa(symmetric_mismatch, 1.0, symmetric_grid(2.0 * np.pi * 25e12, 401))
    np.testing.assert_allclose(np.abs(jsa.phi), 1.0, atol=1e-9)


def test_linear_toy_fwhm(omega_0):
    """Test the sinc^2 FWHM of a linear group-velocity mismatch"""
    walk_off = 1.0e-10
    pm = linear_mismatch(omega_0, 1.1e-8, 1.1e-8 + walk_off)
    jsa = compute_jsa(pm, 1.0)
    half_width = 2.0 * SINC2_HALF / (walk_off * 1e-3)
    expected = (omega_to_wavelength_um(omega_0 - half_width) - omega_to_wavelength_um(omega_0 + half_width)) * 1e3
    assert jsi_fwhm(jsa) == pytest.approx(expected, rel=1e-3)


def test_fwhm_scales_inversely_with_length(omega_0):
    """Test a longer device narrows the spectrum"""
    pm = linear_mismatch(omega_0, 1.1e-8, 1.2e-8)
    assert jsi_fwhm(compute_jsa(pm, 2.0)) < jsi_fwhm(compute_jsa(pm, 1.0))


def test_clipped_spectrum(omega_0):
    """Test FWHM refuses a spectrum wider than the grid"""
    pm = linear_mismatch(omega_0, 1.1e-8, 1.1e-8 + 1.0e-14)
    with pytest.raises(GridContractError):
        jsi_fwhm(compute_jsa(pm, 1.0))


def test_asymmetric_grid_rejected(symmetric_mismatch):
    """Test JSA grids must be symmetric"""
    with pytest.raises(GridContractError):
        compute_jsa(symmetric_mismatch, 1.0, np.linspace(-1.0e13, 2.0e13, 101))


def test_gaussian_overlap():
    """Test Gamma of three identical Gaussians"""
    waist = 2.0
    profile = gaussian_profile(waist)
    gamma, a_eff = overlap_gamma(profile, profile, profile)
    expected_um = np.sqrt(2.0 / (np.pi * waist ** 2)) * 2.0 / 3.0
    assert gamma == pytest.approx(expected_um * 1e6, rel=1e-6)
    assert a_eff == pytest.approx(1.0 / expected_um ** 2, rel=1e-6)


def test_odd_idler_does_not_couple():
    """Test parity forbids an odd idler"""
    axis = np.linspace(-15.0, 15.0, 1501)
    even = gaussian_profile(2.0, axis)
    odd = ModeProfile2D(x_um=axis, y_um=axis, x_field=axis * gaussian(axis, 2.0), y_field=gaussian(axis, 2.0))
    gamma, _ = overlap_gamma(even, even, odd)
    reference, _ = overlap_gamma(even, even, even)
    assert abs(gamma) < 1e-9 * reference


def test_overlap_grid_mismatch():
    """Test profiles on different grids"""
    with pytest.raises(GridContractError):
        overlap_gamma(gaussian_profile(2.0), gaussian_profile(2.0), gaussian_profile(2.0, np.linspace(-10, 10, 801)))


def test_sigma_scaling():
    """Test sigma is linear in chi2 and Gamma"""
    args = dict(n_s=3.1, n_i=3.05, n_p=3.0, omega_0=1.2e15, omega_p=2.4e15)
    assert sigma(0.0, 2.5e5, **args) == 0.0
    base = sigma(238.0, 2.5e5, **args)
    assert sigma(238.0, 5.0e5, **args) == pytest.approx(2.0 * base, rel=1e-12)
    assert sigma(476.0, 2.5e5, **args) == pytest.approx(2.0 * base, rel=1e-12)


def test_pump_flux():
    """Test photons per second in 1 mW"""
    assert pump_flux_per_mw(2.4e15) == pytest.approx(1e-3 / (HBAR * 2.4e15))


def test_brightness():
    """Test brightness = sigma^2 L^2 times 1 THz"""
    coupling = NonlinearCoupling(
        gamma_per_m=2.5e5, a_eff_um2=16.0, n_s=3.1, n_i=3.05, n_p=3.0, omega_0=1.2e15, omega_p=2.4e15,
    )
    assert coupling.brightness(2.0) == pytest.approx(coupling.sigma ** 2 * 4e-6 * BRIGHTNESS_BANDWIDTH)


def test_rate_scales_with_length_squared(symmetric_mismatch):
    """Test R grows as L^2 for a fixed spectrum"""
    jsa = compute_jsa(symmetric_mismatch, 1.0, symmetric_grid(2.0 * np.pi * 25e12, 401))
    one = emission_rate(jsa, 1.0e-3, 1.0, 2.4e15, check_coverage=False)
    two = emission_rate(jsa, 1.0e-3, 2.0, 2.4e15, check_coverage=False)
    assert two == pytest.approx(4.0 * one, rel=1e-12)


def test_rate_requires_full_coverage(symmetric_mismatch):
    """Test a flat spectrum is not fully covered"""
    jsa = compute_jsa(symmetric_mismatch, 1.0, symmetric_grid(2.0 * np.pi * 25e12, 401))
    with pytest.raises(GridContractError):
        emission_rate(jsa, 1.0e-3, 1.0, 2.4e15)


def test_rate_of_covered_spectrum(omega_0):
    """Test R against the analytic sinc^2 integral"""
    walk_off = 1.0e-9
    pm = linear_mismatch(omega_0, 1.1e-8, 1.1e-8 + walk_off)
    jsa = compute_jsa(pm, 1.0)
    rate = emission_rate(jsa, 1.0e-3, 1.0, 2.0 * omega_0, check_coverage=False)
    integral = 2.0 * np.pi / (walk_off * 1e-3)
    expected = 1.0e-6 * 1.0e-6 * integral * pump_flux_per_mw(2.0 * omega_0)
    assert rate == pytest.approx(expected, rel=0.01)


def test_fiber_coupling_matched_gaussian():
    """Test a mode equal to the fiber mode couples fully"""
    fiber = FiberMode(mfd_um=10.4)
    axis = np.linspace(-30.0, 30.0, 1201)
    mode = gaussian_profile(fiber.waist_um, axis)
    assert fiber_coupling(mode, fiber) == pytest.approx(1.0, abs=1e-6)


def test_fiber_coupling_mismatched_gaussian():
    """Test the Gaussian mode-mismatch formula"""
    fiber = FiberMode(mfd_um=10.4)
    axis = np.linspace(-30.0, 30.0, 1201)
    waist = 2.0
    mode = gaussian_profile(waist, axis)
    w0 = fiber.waist_um
    expected = (2.0 * waist * w0 / (waist ** 2 + w0 ** 2)) ** 2
    assert fiber_coupling(mode, fiber) == pytest.approx(expected, rel=1e-6)


def test_fiber_coupling_rejects_unnormalized_mode():
    """Test a mode with more than unit power is reported instead of clamped"""
    fiber = FiberMode(mfd_um=10.4)
    axis = np.linspace(-30.0, 30.0, 1201)
    mode = gaussian_profile(fiber.waist_um, axis)
    scaled = mode.model_copy(update={"x_field": 1.1 * mode.x_field})
    with pytest.raises(GridContractError):
        fiber_coupling(scaled, fiber)


def test_optimal_fiber_matches_mode_waist():
    """Test the best mode-field diameter equals the Gaussian mode diameter"""
    mode = gaussian_profile(2.0)
    mfd_um, coupling = optimal_fiber_mfd(mode, FiberMode(mfd_um=10.4))
    assert mfd_um == pytest.approx(4.0, abs=1e-3)
    assert coupling == pytest.approx(1.0, abs=1e-6)
    assert coupling >= fiber_coupling(mode, FiberMode(mfd_um=10.4))
