"""Joint spectral amplitude, nonlinear coupling and pair rates."""
import logging
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import trapezoid
from scipy.optimize import brentq, minimize_scalar

from brw_source.exceptions import BRWError, GridContractError, PhaseMatchingError
from brw_source.models.mode import ModeProfile2D
from brw_source.models.stack import LayerStack
from brw_source.services.dispersion import PhaseMismatch, phase_mismatch, phase_sum
from brw_source.services.materials import DEFAULT_MATERIAL, FiberMode, MaterialModel, fiber_fundamental_profile
from brw_source.services.modesolver import DEFAULT_SETTINGS, SolverSettings, effective_index_2d
from brw_source.utils import C_LIGHT, EPSILON_0, HBAR, omega_to_wavelength_um, wavelength_um_to_omega

logger = logging.getLogger(__name__)

DEFAULT_SPAN = 2.0 * np.pi * 25e12  # rad/s
DEFAULT_SAMPLES = 2 ** 12 + 1
# Edge level, relative to the peak, below which the JSI counts as fully covered.
COVERAGE_LEVEL = 0.01
BRIGHTNESS_BANDWIDTH = 2.0 * np.pi * 1e12  # rad/s
# Quadrature slack allowed above unit fiber coupling.
COUPLING_TOL = 1e-6


class Jsa(BaseModel):
    """Phi(Omega) on a uniform grid symmetric about zero."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    detuning: np.ndarray
    phi: np.ndarray
    length_mm: float
    omega_0: float

    @property
    def jsi(self) -> np.ndarray:
        return np.abs(self.phi) ** 2

    @property
    def signal_wavelength_nm(self) -> np.ndarray:
        return omega_to_wavelength_um(self.omega_0 + self.detuning) * 1e3


def symmetric_grid(span: float = DEFAULT_SPAN, samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    """Uniform detuning grid over [-span, span] containing -Omega for every Omega."""
    if samples < 3 or samples % 2 == 0:
        raise GridContractError(f"samples must be odd and at least 3, got {samples}")
    half = np.linspace(0.0, span, samples // 2 + 1)
    return np.concatenate((-half[:0:-1], half))


def check_symmetric(grid: np.ndarray) -> None:
    grid = np.asarray(grid, dtype=float)
    scale = np.max(np.abs(grid)) if grid.size else 0.0
    if grid.size < 3 or grid.size % 2 == 0 or not np.allclose(grid, -grid[::-1], rtol=0.0, atol=1e-12 * scale):
        raise GridContractError("detuning grid must be symmetric about zero")
    steps = np.diff(grid)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise GridContractError("detuning grid must be uniform")


def compute_jsa(pm: PhaseMismatch, length_mm: float, grid: np.ndarray = None) -> Jsa:
    """Phi(Omega) = sinc(Delta_k L / 2) exp(i s_k L / 2) with sinc(x) = sin(x)/x."""
    grid = symmetric_grid() if grid is None else np.asarray(grid, dtype=float)
    check_symmetric(grid)
    length_m = length_mm * 1e-3
    half_mismatch = phase_mismatch(pm, grid) * length_m / 2.0
    half_sum = phase_sum(pm, grid) * length_m / 2.0
    phi = np.sinc(half_mismatch / np.pi) * np.exp(1j * half_sum)
    return Jsa(detuning=grid, phi=phi, length_mm=length_mm, omega_0=pm.omega_0)


def _half_crossing(x0, y0, x1, y1, level):
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0)


def jsi_fwhm(jsa: Jsa) -> float:
    """FWHM of |Phi|^2 against signal wavelength, in nm."""
    jsi = jsa.jsi
    peak = int(np.argmax(jsi))
    level = jsi[peak] / 2.0
    if not jsi[peak] > 0:
        raise GridContractError("JSI is zero on the whole grid")

    below = np.nonzero(jsi[:peak] < level)[0]
    above = np.nonzero(jsi[peak:] < level)[0]
    if below.size == 0 or above.size == 0:
        raise GridContractError("detuning grid clips the JSI peak before half maximum")
    i = below[-1]
    j = peak + above[0]
    omega = jsa.detuning
    left = _half_crossing(omega[i], jsi[i], omega[i + 1], jsi[i + 1], level)
    right = _half_crossing(omega[j - 1], jsi[j - 1], omega[j], jsi[j], level)
    lam = omega_to_wavelength_um(jsa.omega_0 + np.array([left, right])) * 1e3
    return float(abs(lam[0] - lam[1]))


def overlap_gamma(pump: ModeProfile2D, signal: ModeProfile2D, idler: ModeProfile2D):
    """Spatial overlap Gamma in 1/m and effective area 1/Gamma^2 in um^2."""
    for profile in (signal, idler):
        if profile.x_um.shape != pump.x_um.shape or profile.y_um.shape != pump.y_um.shape \
                or not np.allclose(profile.x_um, pump.x_um) or not np.allclose(profile.y_um, pump.y_um):
            raise GridContractError("overlap requires profiles sampled on a common grid")
    gx = trapezoid(pump.x_field * np.conj(signal.x_field) * np.conj(idler.x_field), pump.x_um)
    gy = trapezoid(pump.y_field * np.conj(signal.y_field) * np.conj(idler.y_field), pump.y_um)
    gamma_um = gx * gy
    gamma = float(np.real(gamma_um)) * 1e6
    a_eff = 1.0 / abs(gamma_um) ** 2 if gamma_um != 0 else np.inf
    return gamma, float(a_eff)


def sigma(chi2_pm_per_v: float, gamma_per_m: float, n_s: float, n_i: float, n_p: float,
          omega_0: float, omega_p: float) -> float:
    """Nonlinear coefficient in s^(1/2)/m.

    sigma^2 = hbar omega_0^2 omega_p chi2^2 Gamma^2 / (16 pi eps0 c^3 n_s n_i n_p)
    """
    chi2 = chi2_pm_per_v * 1e-12
    value = HBAR * omega_0 ** 2 * omega_p * chi2 ** 2 * gamma_per_m ** 2 / (
        16.0 * np.pi * EPSILON_0 * C_LIGHT ** 3 * n_s * n_i * n_p
    )
    return float(np.sqrt(value))


def pump_flux_per_mw(omega_p: float) -> float:
    """Pump photons per second for 1 mW."""
    return 1e-3 / (HBAR * omega_p)


class NonlinearCoupling(BaseModel):
    model_config = ConfigDict(frozen=True)

    chi2_pm_per_v: float = 238.0
    gamma_per_m: float
    a_eff_um2: float = Field(gt=0.0)
    n_s: float
    n_i: float
    n_p: float
    omega_0: float
    omega_p: float

    @property
    def sigma(self) -> float:
        return sigma(self.chi2_pm_per_v, self.gamma_per_m, self.n_s, self.n_i, self.n_p, self.omega_0, self.omega_p)

    @property
    def pump_flux_per_mw(self) -> float:
        return pump_flux_per_mw(self.omega_p)

    def brightness(self, length_mm: float) -> float:
        """Pairs per pump photon per THz of phase-matched bandwidth (dimensionless)."""
        return self.sigma ** 2 * (length_mm * 1e-3) ** 2 * BRIGHTNESS_BANDWIDTH


def emission_rate(jsa: Jsa, sigma_value: float, length_mm: float, omega_p: float,
                  check_coverage: bool = True) -> float:
    """Total pair rate R = sigma^2 L^2 F_p integral |Phi|^2 dOmega, photons/s per mW."""
    jsi = jsa.jsi
    if check_coverage and max(jsi[0], jsi[-1]) >= COVERAGE_LEVEL * jsi.max():
        raise GridContractError("JSA grid does not cover the full emission band")
    length_m = length_mm * 1e-3
    integral = trapezoid(jsi, jsa.detuning)
    return float(sigma_value ** 2 * length_m ** 2 * integral * pump_flux_per_mw(omega_p))


def fiber_coupling(mode: ModeProfile2D, fiber: FiberMode) -> float:
    """|integral U U0*|^2 for a fiber centred on the mode grid."""
    fiber_field = fiber_fundamental_profile(fiber, mode.x_um, mode.y_um, normalize_on_grid=False)
    integrand = mode.field * np.conj(fiber_field)
    overlap = trapezoid(trapezoid(integrand, mode.y_um, axis=1), mode.x_um)
    coupling = float(abs(overlap) ** 2)
    if coupling > 1.0 + COUPLING_TOL:
        raise GridContractError(f"fiber coupling {coupling:.9g} exceeds one; mode profile is not normalized")
    return coupling


def optimal_fiber_mfd(mode: ModeProfile2D, fiber: FiberMode,
                      bounds_um: Tuple[float, float] = (1.0, 20.0)) -> Tuple[float, float]:
    """Mode-field diameter that maximizes the coupling to `mode`, and that coupling."""
    def loss(mfd_um):
        return -fiber_coupling(mode, fiber.model_copy(update={"mfd_um": float(mfd_um)}))

    result = minimize_scalar(loss, bounds=bounds_um, method="bounded", options={"xatol": 1e-4})
    return float(result.x), float(-result.fun)


def degenerate_mismatch(stack: LayerStack, pump_wavelength_um: float,
                        material: MaterialModel = DEFAULT_MATERIAL,
                        settings: SolverSettings = DEFAULT_SETTINGS) -> float:
    """Delta_k(0) in rad/m from direct ridge solves at the pump and at the degenerate point."""
    omega_p = wavelength_um_to_omega(pump_wavelength_um)
    signal_wavelength_um = 2.0 * pump_wavelength_um
    n_p = effective_index_2d(stack, pump_wavelength_um, "TM", "Bragg", material, settings)
    n_s = effective_index_2d(stack, signal_wavelength_um, "TE", "TIR", material, settings)
    n_i = effective_index_2d(stack, signal_wavelength_um, "TM", "TIR", material, settings)
    return (n_p * omega_p - (n_s + n_i) * omega_p / 2.0) / C_LIGHT


def phase_matched_pump_wavelength(stack: LayerStack, guess_um: float, span_um: float = 0.02,
                                  material: MaterialModel = DEFAULT_MATERIAL,
                                  settings: SolverSettings = DEFAULT_SETTINGS,
                                  points: int = 21) -> float:
    """Pump wavelength closest to `guess_um` at which Delta_k(0) vanishes."""
    wavelengths = np.linspace(guess_um - span_um, guess_um + span_um, points)
    values = []
    for lam in wavelengths:
        try:
            values.append(degenerate_mismatch(stack, lam, material, settings))
        except BRWError as e:
            logger.debug(f"Phase-matching scan skipped {lam:.6f} um: {e}")
            values.append(np.nan)
    values = np.array(values)

    roots = []
    for i in range(points - 1):
        lo, hi = values[i], values[i + 1]
        if np.isfinite(lo) and np.isfinite(hi) and lo * hi <= 0.0:
            if lo == 0.0:
                roots.append(float(wavelengths[i]))
                continue
            roots.append(brentq(
                lambda lam: degenerate_mismatch(stack, lam, material, settings),
                wavelengths[i], wavelengths[i + 1], xtol=1e-10,
            ))
    if not roots:
        raise PhaseMatchingError(
            f"No phase-matched pump wavelength within {guess_um:.4f} +/- {span_um:.4f} um"
        )
    best = min(roots, key=lambda lam: abs(lam - guess_um))
    logger.info(f"Phase-matched pump wavelength: {best * 1e3:.4f} nm")
    return float(best)
