"""Propagation-constant tables beta(omega) and the SPDC phase functions."""
import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, PrivateAttr
from scipy.interpolate import CubicSpline

from brw_source.exceptions import GridContractError, ModeNotFoundError
from brw_source.models.mode import ModeClass, Polarization
from brw_source.models.stack import LayerStack
from brw_source.services.materials import DEFAULT_MATERIAL, MaterialModel
from brw_source.services.modesolver import DEFAULT_SETTINGS, SolverSettings, effective_index_2d
from brw_source.utils import C_LIGHT, omega_to_wavelength_um, wavelength_um_to_omega

logger = logging.getLogger(__name__)

GROUP_VELOCITY_STEP = 2.0 * np.pi * 10e9  # rad/s
# Largest accepted spline error in n_eff at the held-out midpoints.
INTERPOLATION_TOL = 1e-7
LOCAL_GROUP_VELOCITY_STEP = 2.0 * np.pi * 1e12  # rad/s

IndexSource = Union[LayerStack, Callable[[float], float]]


class ModeSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    polarization: Polarization
    mode_class: ModeClass

    def __str__(self) -> str:
        return f"{self.polarization} {self.mode_class}"


class DispersionTable(BaseModel):
    """Sampled beta(omega) of one mode with a cubic interpolant.

    omega in rad/s (ascending), beta in rad/m.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mode: ModeSpec
    omega: np.ndarray
    beta: np.ndarray
    interpolation_error: Optional[float] = None

    _spline: CubicSpline = PrivateAttr()

    def model_post_init(self, __context) -> None:
        if self.omega.shape != self.beta.shape or self.omega.size < 4:
            raise ValueError("omega and beta must be equal-length arrays with at least 4 samples")
        if np.any(np.diff(self.omega) <= 0):
            raise ValueError("omega samples must be strictly ascending")
        self._spline = CubicSpline(self.omega, self.beta)

    @classmethod
    def from_samples(cls, omega, beta, polarization: Polarization = "TE",
                     mode_class: ModeClass = "TIR") -> "DispersionTable":
        return cls(
            mode=ModeSpec(polarization=polarization, mode_class=mode_class),
            omega=np.asarray(omega, dtype=float),
            beta=np.asarray(beta, dtype=float),
        )

    @property
    def omega_range(self) -> Tuple[float, float]:
        return float(self.omega[0]), float(self.omega[-1])

    def covers(self, omega) -> bool:
        omega = np.asarray(omega)
        lo, hi = self.omega_range
        return bool(np.all((omega >= lo) & (omega <= hi)))

    def beta_at(self, omega):
        return self._spline(omega)

    def n_eff_at(self, omega):
        return self._spline(omega) * C_LIGHT / omega

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "lambda_nm": omega_to_wavelength_um(self.omega) * 1e3,
            "n_eff": self.beta * C_LIGHT / self.omega,
            "beta_rad_per_m": self.beta,
            "inv_vg_ns_per_m": _central_difference(self._spline, self.omega, GROUP_VELOCITY_STEP) * 1e9,
        })


def _central_difference(spline: CubicSpline, omega, step: float):
    return (spline(omega + step) - spline(omega - step)) / (2.0 * step)


def inverse_group_velocity(table: DispersionTable, omega) -> float:
    """d(beta)/d(omega) in ns/m by central difference on the interpolant."""
    if not table.covers(omega):
        raise GridContractError(f"omega={omega} lies outside the {table.mode} table")
    value = _central_difference(table._spline, omega, GROUP_VELOCITY_STEP) * 1e9
    return float(value) if np.ndim(value) == 0 else value


def _ridge_index(stack: LayerStack, mode: ModeSpec, material: MaterialModel,
                 settings: SolverSettings, wavelength_um: float) -> float:
    try:
        return effective_index_2d(stack, wavelength_um, mode.polarization, mode.mode_class, material, settings)
    except ModeNotFoundError as e:
        raise ModeNotFoundError(f"{mode} mode lost at {wavelength_um:.6f} um: {e}") from e


def _solve_all(solver: Callable[[float], float], wavelengths: np.ndarray, workers: int) -> np.ndarray:
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            return np.array(list(executor.map(solver, wavelengths)), dtype=float)
    return np.array([solver(lam) for lam in wavelengths], dtype=float)


def build_table(stack: IndexSource, mode: ModeSpec, wavelength_range_um: Tuple[float, float],
                sample_count: int = 121, material: MaterialModel = DEFAULT_MATERIAL,
                settings: SolverSettings = DEFAULT_SETTINGS, workers: int = 1,
                verify_midpoints: bool = True) -> DispersionTable:
    """Sample n_eff uniformly in omega over the wavelength range and tabulate beta.

    `stack` is either a LayerStack (effective-index ridge solve per sample) or
    any callable returning n_eff for a wavelength in um. With
    `verify_midpoints` every midpoint between samples is solved as well and
    the largest spline error in n_eff is stored on the table; errors above
    INTERPOLATION_TOL are logged as warnings.
    """
    if sample_count < 50:
        raise ValueError(f"sample_count must be at least 50, got {sample_count}")
    lam_lo, lam_hi = sorted(wavelength_range_um)
    omega = np.linspace(wavelength_um_to_omega(lam_hi), wavelength_um_to_omega(lam_lo), sample_count)

    if isinstance(stack, LayerStack):
        solver = partial(_ridge_index, stack, mode, material, settings)
    else:
        solver = stack

    try:
        n_eff = _solve_all(solver, omega_to_wavelength_um(omega), workers)
        beta = n_eff * omega / C_LIGHT
        table = DispersionTable(mode=mode, omega=omega, beta=beta)
        if verify_midpoints:
            midpoints = 0.5 * (omega[:-1] + omega[1:])
            held_out = _solve_all(solver, omega_to_wavelength_um(midpoints), workers)
            error = float(np.max(np.abs(table.n_eff_at(midpoints) - held_out)))
            table = DispersionTable(mode=mode, omega=omega, beta=beta, interpolation_error=error)
    except ModeNotFoundError as e:
        logger.error(f"Dispersion table for {mode} failed: {e}")
        raise

    if np.any(np.diff(beta) <= 0):
        logger.warning(f"beta is not monotonically increasing over the {mode} table")
    if table.interpolation_error is not None and table.interpolation_error > INTERPOLATION_TOL:
        logger.warning(
            f"{mode} table interpolation error {table.interpolation_error:.2e} in n_eff exceeds "
            f"{INTERPOLATION_TOL:.0e}; raise the sample count"
        )
    logger.info(f"Built {mode} table: {sample_count} samples over {lam_lo:.4f}-{lam_hi:.4f} um")
    return table


def local_inverse_group_velocity(stack: LayerStack, mode: ModeSpec, omega: float,
                                 material: MaterialModel = DEFAULT_MATERIAL,
                                 settings: SolverSettings = DEFAULT_SETTINGS,
                                 step: float = LOCAL_GROUP_VELOCITY_STEP) -> float:
    """Three-point d(beta)/d(omega) in ns/m from direct solves around omega."""
    betas = []
    for w in (omega - step, omega + step):
        n_eff = _ridge_index(stack, mode, material, settings, omega_to_wavelength_um(w))
        betas.append(n_eff * w / C_LIGHT)
    return (betas[1] - betas[0]) / (2.0 * step) * 1e9


class PhaseMismatch(BaseModel):
    """CW pump propagation constant plus the signal and idler tables."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    beta_p: float
    omega_p: float
    signal: DispersionTable
    idler: DispersionTable

    @property
    def omega_0(self) -> float:
        return self.omega_p / 2.0

    def _check(self, detuning) -> None:
        if not self.signal.covers(self.omega_0 + detuning):
            raise GridContractError("omega_0 + Omega leaves the signal table")
        if not self.idler.covers(self.omega_0 - detuning):
            raise GridContractError("omega_0 - Omega leaves the idler table")


def phase_mismatch(pm: PhaseMismatch, detuning):
    """Delta_k(Omega) = beta_p - beta_s(omega_0 + Omega) - beta_i(omega_0 - Omega), rad/m."""
    pm._check(detuning)
    return pm.beta_p - pm.signal.beta_at(pm.omega_0 + detuning) - pm.idler.beta_at(pm.omega_0 - detuning)


def phase_sum(pm: PhaseMismatch, detuning):
    """s_k(Omega) = beta_p + beta_s(omega_0 + Omega) + beta_i(omega_0 - Omega), rad/m."""
    pm._check(detuning)
    return pm.beta_p + pm.signal.beta_at(pm.omega_0 + detuning) + pm.idler.beta_at(pm.omega_0 - detuning)
