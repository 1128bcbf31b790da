#!/usr/bin/env python3
"""
Tests for the AlGaAs index model and the fiber mode
"""
import numpy as np
import pytest
from scipy.integrate import trapezoid

from brw_source.exceptions import MaterialDomainError
from brw_source.services.materials import (
    DEFAULT_MATERIAL, FiberMode, MaterialModel, fiber_fundamental_profile, refractive_index,
)


def test_reference_indices_at_pump():
    """Test the reference-stack indices at 775.1 nm"""
    assert refractive_index(0.7, 0.7751) == pytest.approx(3.177, abs=0.01)
    assert refractive_index(0.9, 0.7751) == pytest.approx(3.064, abs=0.01)
    assert refractive_index(0.4, 0.7751) == pytest.approx(3.365, abs=0.05)


@pytest.mark.parametrize("wavelength, expected", [
    (0.9, 3.5928), (1.0, 3.5079), (1.3, 3.4099), (1.55, 3.3741), (1.8, 3.3534),
])
def test_gaas_dispersion_curve(wavelength, expected):
    """Test GaAs at room temperature across the transparency window"""
    assert refractive_index(0.0, wavelength) == pytest.approx(expected, abs=1e-3)


def test_gaas_near_telecom():
    """Test GaAs at 1.55 um against the commonly quoted 3.374"""
    assert refractive_index(0.0, 1.55) == pytest.approx(3.374, abs=1e-3)


def test_index_falls_with_aluminium():
    """Test n decreases monotonically in x"""
    indices = [refractive_index(x, 1.55) for x in np.linspace(0.0, 1.0, 11)]
    assert all(np.diff(indices) < 0)


def test_index_falls_with_wavelength():
    """Test normal dispersion below the gap"""
    wavelengths = np.linspace(0.9, 1.8, 20)
    indices = refractive_index(0.5, wavelengths)
    assert isinstance(indices, np.ndarray)
    assert np.all(np.diff(indices) < 0)


def test_group_index_exceeds_phase_index():
    """Test material group index against phase index"""
    n = DEFAULT_MATERIAL.refractive_index(0.4, 1.55)
    assert DEFAULT_MATERIAL.group_index(0.4, 1.55) > n


def test_band_edge_rejected():
    """Test GaAs is opaque at the pump wavelength"""
    with pytest.raises(MaterialDomainError) as excinfo:
        refractive_index(0.0, 0.7751)
    assert excinfo.value.parameter == "wavelength"
    assert DEFAULT_MATERIAL.band_edge_um(0.0) > 0.7751


@pytest.mark.parametrize("x, wavelength", [(-0.1, 1.55), (1.2, 1.55), (0.5, 0.6), (0.5, 2.5)])
def test_domain_errors(x, wavelength):
    """Test out-of-domain composition and wavelength"""
    with pytest.raises(MaterialDomainError):
        refractive_index(x, wavelength)


def test_domain_error_is_value_error():
    """Test MaterialDomainError can be caught as ValueError"""
    with pytest.raises(ValueError):
        refractive_index(1.5, 1.55)


def test_temperature_raises_index():
    """Test warmer material has a higher index"""
    cold = MaterialModel(temperature_k=250.0).refractive_index(0.3, 1.55)
    warm = MaterialModel(temperature_k=350.0).refractive_index(0.3, 1.55)
    assert warm > cold


def test_fiber_profile_normalized_on_grid():
    """Test fiber mode has unit power on its sampling grid"""
    x = np.linspace(-20.0, 20.0, 401)
    y = np.linspace(-15.0, 15.0, 301)
    field = fiber_fundamental_profile(FiberMode(), x, y)
    assert field.shape == (401, 301)
    power = trapezoid(trapezoid(field ** 2, y, axis=1), x)
    assert power == pytest.approx(1.0, rel=1e-12)


def test_fiber_profile_continuum_normalization():
    """Test analytic normalization on a wide grid"""
    x = np.linspace(-30.0, 30.0, 1201)
    field = fiber_fundamental_profile(FiberMode(mfd_um=10.4), x, x, normalize_on_grid=False)
    power = trapezoid(trapezoid(field ** 2, x, axis=1), x)
    assert power == pytest.approx(1.0, rel=1e-6)


def test_fiber_rejects_non_positive_mfd():
    """Test invalid mode-field diameter"""
    with pytest.raises(MaterialDomainError):
        fiber_fundamental_profile(FiberMode(mfd_um=0.0), [0.0], [0.0])
