"""Shared fixtures for the root-level test scripts."""
import numpy as np
import pytest

from brw_source.models.stack import LayerStack
from brw_source.services.dispersion import DispersionTable, PhaseMismatch
from brw_source.utils import wavelength_um_to_omega

CENTER_WAVELENGTH_UM = 1.55


@pytest.fixture
def table1():
    return LayerStack.table1()


@pytest.fixture
def omega_0():
    return wavelength_um_to_omega(CENTER_WAVELENGTH_UM)


def linear_table(omega_0: float, beta_0: float, inv_vg: float, reach: float, polarization: str = "TE"):
    """beta = beta_0 + inv_vg * (omega - omega_0) sampled over omega_0 +/- reach."""
    omega = np.linspace(omega_0 - reach, omega_0 + reach, 201)
    return DispersionTable.from_samples(omega, beta_0 + inv_vg * (omega - omega_0), polarization=polarization)


def linear_mismatch(omega_0: float, inv_vg_signal: float, inv_vg_idler: float,
                    reach: float = 2.0 * np.pi * 40e12) -> PhaseMismatch:
    """Toy phase mismatch that vanishes at degeneracy; inverse group velocities in s/m."""
    beta_0 = 3.0 * omega_0 / 299792458.0
    return PhaseMismatch(
        beta_p=2.0 * beta_0,
        omega_p=2.0 * omega_0,
        signal=linear_table(omega_0, beta_0, inv_vg_signal, reach, "TE"),
        idler=linear_table(omega_0, beta_0, inv_vg_idler, reach, "TM"),
    )


@pytest.fixture
def symmetric_mismatch(omega_0):
    return linear_mismatch(omega_0, 1.1e-8, 1.1e-8)
