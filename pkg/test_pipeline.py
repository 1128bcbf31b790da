#!/usr/bin/env python3
"""
Tests for the end-to-end pipeline wiring that need no mode solves
"""
import pytest

from brw_source.exceptions import ConfigError, GridContractError
from brw_source.schemas import parse_config
from brw_source.services.pipeline import Pipeline, sensitivity_scan
from brw_source.utils import omega_to_wavelength_um

BASE = {
    "stack": {
        "core": {"al_fraction": 0.7, "thickness_nm": 370.0},
        "reflector": [
            {"al_fraction": 0.4, "thickness_nm": 127.0},
            {"al_fraction": 0.9, "thickness_nm": 309.0},
        ],
    },
}


def config_with(**sections):
    return parse_config({**BASE, **sections})


def test_default_band_covers_jsa_span():
    """Test the derived dispersion band contains omega_0 +/- span"""
    pipeline = Pipeline(config_with())
    lo, hi = pipeline.table_band_um()
    span = pipeline.detuning_grid[-1]
    assert lo < omega_to_wavelength_um(pipeline.omega_0 + span)
    assert hi > omega_to_wavelength_um(pipeline.omega_0 - span)


def test_narrow_band_rejected():
    """Test an explicit band narrower than the JSA span"""
    pipeline = Pipeline(config_with(dispersion={"band_nm": [1500.0, 1600.0]}))
    with pytest.raises(GridContractError):
        pipeline.table_band_um()


def test_explicit_band_accepted():
    """Test an explicit band wide enough for the JSA"""
    pipeline = Pipeline(config_with(dispersion={"band_nm": [1700.0, 1400.0]}, jsa={"span_thz": 10.0}))
    assert pipeline.table_band_um() == pytest.approx((1.4, 1.7))


def test_fixed_pump_wavelength():
    """Test the pump wavelength without phase-matching search"""
    pipeline = Pipeline(config_with(pump={"wavelength_nm": 780.0}))
    assert pipeline.pump_wavelength_um == pytest.approx(0.78)
    assert pipeline.wavelength_for("signal") == pytest.approx(1.56)


def test_even_jsa_samples_rejected():
    """Test the schema keeps the JSA grid odd"""
    with pytest.raises(ConfigError):
        config_with(jsa={"samples": 4096})


def test_sensitivity_unknown_parameter():
    """Test sensitivity scan parameter names"""
    with pytest.raises(ConfigError):
        sensitivity_scan(config_with(), "colour", [0.0])
