"""End-to-end evaluation of one configuration: modes, tables, JSA, channels, rates."""
import logging
from functools import cached_property
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
import pandas as pd

from brw_source.exceptions import BRWError, ConfigError, GridContractError
from brw_source.models.mode import RidgeMode
from brw_source.models.stack import STACK_PARAMETERS, LayerStack
from brw_source.schemas import RunConfig
from brw_source.services.dispersion import (
    DispersionTable, ModeSpec, PhaseMismatch, build_table, inverse_group_velocity, phase_mismatch,
)
from brw_source.services.modesolver import ridge_profile_2d, solve_ridge_mode
from brw_source.services.spdc import (
    Jsa, NonlinearCoupling, compute_jsa, emission_rate, fiber_coupling, jsi_fwhm, optimal_fiber_mfd,
    overlap_gamma, phase_matched_pump_wavelength, symmetric_grid,
)
from brw_source.services.wdm import ChannelGrid, ChannelReport, build_channel_report, channels_above
from brw_source.utils import C_LIGHT, omega_to_wavelength_um, wavelength_um_to_omega

logger = logging.getLogger(__name__)

MODE_ROLES: Dict[str, ModeSpec] = {
    "pump": ModeSpec(polarization="TM", mode_class="Bragg"),
    "signal": ModeSpec(polarization="TE", mode_class="TIR"),
    "idler": ModeSpec(polarization="TM", mode_class="TIR"),
}

SENSITIVITY_COLUMNS = [
    "parameter", "delta", "value", "fwhm_nm", "fwhm_rematched_nm", "delta_k0_rad_per_m",
    "phase_matched_pump_nm", "central_wavelength_nm", "central_shift_nm", "channels_c90",
]


class Pipeline:
    """Lazily evaluated chain for one stack; every stage is cached."""

    def __init__(self, config: RunConfig, stack: Optional[LayerStack] = None, workers: int = 1):
        self.config = config
        self.stack = stack if stack is not None else config.layer_stack()
        self.material = config.material
        self.settings = config.solver
        self.workers = workers

    @cached_property
    def pump_wavelength_um(self) -> float:
        guess = self.config.pump.wavelength_nm * 1e-3
        if not self.config.pump.auto_phase_match:
            return guess
        return phase_matched_pump_wavelength(
            self.stack, guess, self.config.pump.search_span_nm * 1e-3, self.material, self.settings,
        )

    @property
    def omega_p(self) -> float:
        return wavelength_um_to_omega(self.pump_wavelength_um)

    @property
    def omega_0(self) -> float:
        return self.omega_p / 2.0

    def wavelength_for(self, role: str) -> float:
        return self.pump_wavelength_um if role == "pump" else 2.0 * self.pump_wavelength_um

    @cached_property
    def modes(self) -> Dict[str, RidgeMode]:
        """Pump Bragg mode and signal/idler TIR modes with sampled profiles."""
        modes = {}
        for role, role_mode in MODE_ROLES.items():
            modes[role] = solve_ridge_mode(
                self.stack, self.wavelength_for(role), role_mode.polarization, role_mode.mode_class,
                self.material, self.settings, with_profile=True,
            )
            logger.info(f"Solved {role} {role_mode} mode: n_eff={modes[role].n_eff:.6f}")
        return modes

    def mode_summary(self) -> pd.DataFrame:
        rows = []
        half_core = self.stack.core.thickness_nm / 2.0
        first_bilayer = half_core + sum(layer.thickness_nm for layer in self.stack.bilayer)
        for role, mode in self.modes.items():
            vertical = mode.vertical
            rows.append({
                "role": role,
                "polarization": mode.polarization,
                "mode_class": mode.mode_class,
                "wavelength_nm": vertical.wavelength_um * 1e3,
                "n_eff_vertical": vertical.n_eff,
                "n_eff": mode.n_eff,
                "core_confinement": vertical.power_fraction(-half_core, half_core),
                "inner_confinement": vertical.power_fraction(-first_bilayer, first_bilayer),
                "lateral_cutoff": mode.lateral_cutoff,
            })
        return pd.DataFrame(rows)

    @cached_property
    def detuning_grid(self) -> np.ndarray:
        return symmetric_grid(2.0 * np.pi * self.config.jsa.span_thz * 1e12, self.config.jsa.samples)

    def table_band_um(self) -> Tuple[float, float]:
        span = self.detuning_grid[-1]
        needed = (
            omega_to_wavelength_um(self.omega_0 + span),
            omega_to_wavelength_um(self.omega_0 - span),
        )
        band = self.config.dispersion.band_nm
        if band is None:
            margin = self.config.dispersion.margin
            reach = span * (1.0 + margin)
            return (
                omega_to_wavelength_um(self.omega_0 + reach),
                omega_to_wavelength_um(self.omega_0 - reach),
            )
        lo, hi = sorted(value * 1e-3 for value in band)
        if lo > needed[0] or hi < needed[1]:
            raise GridContractError(
                f"dispersion band {lo:.4f}-{hi:.4f} um does not cover the JSA span "
                f"{needed[0]:.4f}-{needed[1]:.4f} um"
            )
        return lo, hi

    def _table(self, role: str) -> DispersionTable:
        return build_table(
            self.stack, MODE_ROLES[role], self.table_band_um(), self.config.dispersion.samples,
            self.material, self.settings, self.workers, self.config.dispersion.verify_midpoints,
        )

    @cached_property
    def signal_table(self) -> DispersionTable:
        return self._table("signal")

    @cached_property
    def idler_table(self) -> DispersionTable:
        return self._table("idler")

    @cached_property
    def pump_n_eff(self) -> float:
        role_mode = MODE_ROLES["pump"]
        if "modes" in self.__dict__:
            return self.modes["pump"].n_eff
        return solve_ridge_mode(
            self.stack, self.pump_wavelength_um, role_mode.polarization, role_mode.mode_class, self.material, self.settings,
        ).n_eff

    @cached_property
    def phase_mismatch(self) -> PhaseMismatch:
        return PhaseMismatch(
            beta_p=self.pump_n_eff * self.omega_p / C_LIGHT,
            omega_p=self.omega_p,
            signal=self.signal_table,
            idler=self.idler_table,
        )

    def delta_k0(self) -> float:
        return float(phase_mismatch(self.phase_mismatch, 0.0))

    def group_velocities(self) -> Tuple[float, float]:
        """Signal and idler inverse group velocities at omega_0, ns/m."""
        return (
            inverse_group_velocity(self.signal_table, self.omega_0),
            inverse_group_velocity(self.idler_table, self.omega_0),
        )

    @cached_property
    def jsa(self) -> Jsa:
        return compute_jsa(self.phase_mismatch, self.stack.length_mm, self.detuning_grid)

    def fwhm_nm(self) -> float:
        return jsi_fwhm(self.jsa)

    @cached_property
    def coupling(self) -> NonlinearCoupling:
        profiles = {role: ridge_profile_2d(mode) for role, mode in self.modes.items()}
        gamma, a_eff = overlap_gamma(profiles["pump"], profiles["signal"], profiles["idler"])
        return NonlinearCoupling(
            chi2_pm_per_v=self.config.nonlinear.chi2_pm_per_v,
            gamma_per_m=gamma,
            a_eff_um2=a_eff,
            n_s=self.modes["signal"].n_eff,
            n_i=self.modes["idler"].n_eff,
            n_p=self.modes["pump"].n_eff,
            omega_0=self.omega_0,
            omega_p=self.omega_p,
        )

    @cached_property
    def fiber_couplings(self) -> Tuple[float, float]:
        fiber = self.config.fiber
        return (
            fiber_coupling(ridge_profile_2d(self.modes["signal"]), fiber),
            fiber_coupling(ridge_profile_2d(self.modes["idler"]), fiber),
        )

    @cached_property
    def optimal_fiber(self) -> Tuple[float, float]:
        """Signal-matched fiber mode-field diameter in um and its coupling."""
        return optimal_fiber_mfd(ridge_profile_2d(self.modes["signal"]), self.config.fiber)

    def emission_rate(self) -> float:
        """Pairs/s per mW of pump."""
        return emission_rate(self.jsa, self.coupling.sigma, self.stack.length_mm, self.omega_p)

    def rate_summary(self) -> pd.DataFrame:
        coupling = self.coupling
        gamma_s, gamma_i = self.fiber_couplings
        mfd_um, best_coupling = self.optimal_fiber
        rate = self.emission_rate()
        return pd.DataFrame([{
            "pump_wavelength_nm": self.pump_wavelength_um * 1e3,
            "rate_per_mw": rate,
            "rate_at_pump_power": rate * self.config.pump.power_mw,
            "coupled_rate_at_pump_power": rate * self.config.pump.power_mw * gamma_s * gamma_i,
            "sigma": coupling.sigma,
            "brightness": coupling.brightness(self.stack.length_mm),
            "gamma_per_m": coupling.gamma_per_m,
            "a_eff_um2": coupling.a_eff_um2,
            "fiber_coupling_signal": gamma_s,
            "fiber_coupling_idler": gamma_i,
            "optimal_fiber_mfd_um": mfd_um,
            "optimal_fiber_coupling_signal": best_coupling,
        }])

    def channel_grid(self) -> ChannelGrid:
        channels = self.config.channels
        return ChannelGrid(
            omega_0=self.omega_0,
            spacing_ghz=channels.spacing_ghz,
            bandwidth_ghz=channels.bandwidth_ghz,
            n_max=channels.n_max,
        )

    def channel_report(self, with_rates: bool = False) -> ChannelReport:
        rate_scale = None
        if with_rates:
            gamma_s, gamma_i = self.fiber_couplings
            length_m = self.stack.length_m
            rate_scale = (
                self.coupling.sigma ** 2 * length_m ** 2 * self.coupling.pump_flux_per_mw
                * self.config.pump.power_mw * gamma_s * gamma_i
            )
        return build_channel_report(self.jsa, self.channel_grid(), rate_scale)


def _pump_config(config: RunConfig, wavelength_um: float, auto_phase_match: bool) -> RunConfig:
    pump = config.pump.model_copy(update={
        "wavelength_nm": wavelength_um * 1e3, "auto_phase_match": auto_phase_match,
    })
    return config.model_copy(update={"pump": pump})


def _rematched(config: RunConfig, stack: LayerStack, workers: int) -> Tuple[float, float]:
    """Phase-matched pump wavelength in um and the FWHM there; NaN when no match is found."""
    pipeline = Pipeline(config, stack, workers)
    try:
        matched = pipeline.pump_wavelength_um
    except BRWError as e:
        logger.warning(f"Phase-matching search failed: {e}")
        return float("nan"), float("nan")
    try:
        return matched, pipeline.fwhm_nm()
    except BRWError as e:
        logger.warning(f"No FWHM at the rematched pump {matched * 1e3:.4f} nm: {e}")
        return matched, float("nan")


def sensitivity_scan(config: RunConfig, parameter: str, deltas: Iterable[float],
                     stack: Optional[LayerStack] = None, workers: int = 1) -> pd.DataFrame:
    """One pipeline evaluation per relative perturbation of a stack parameter.

    fwhm_nm, delta_k0_rad_per_m and channels_c90 are taken with the pump held
    at the unperturbed design's pump wavelength. phase_matched_pump_nm and
    fwhm_rematched_nm come from a fresh phase-matching search on the
    perturbed stack.
    """
    if parameter not in STACK_PARAMETERS:
        raise ConfigError(f"Unknown parameter: {parameter} (choose from {', '.join(STACK_PARAMETERS)})")
    base = stack if stack is not None else config.layer_stack()
    baseline_um = Pipeline(config, base, workers).pump_wavelength_um
    fixed_config = _pump_config(config, baseline_um, auto_phase_match=False)
    search_config = _pump_config(config, baseline_um, auto_phase_match=True)
    baseline_matched, _ = _rematched(search_config, base, workers)
    logger.info(f"Sensitivity baseline pump {baseline_um * 1e3:.4f} nm")

    rows = []
    for delta in deltas:
        value = base.parameters()[parameter] * (1.0 + delta)
        try:
            perturbed = base.with_parameters(**{parameter: value})
        except ValueError as e:
            raise ConfigError(f"{parameter}={value} is not a valid stack: {e}") from e
        pipeline = Pipeline(fixed_config, perturbed, workers)
        matched, fwhm_rematched = _rematched(search_config, perturbed, workers)
        report = pipeline.channel_report()
        rows.append({
            "parameter": parameter,
            "delta": delta,
            "value": value,
            "fwhm_nm": pipeline.fwhm_nm(),
            "fwhm_rematched_nm": fwhm_rematched,
            "delta_k0_rad_per_m": pipeline.delta_k0(),
            "phase_matched_pump_nm": matched * 1e3,
            "central_wavelength_nm": 2.0 * matched * 1e3,
            "central_shift_nm": 2.0 * (matched - baseline_matched) * 1e3,
            "channels_c90": channels_above(report, 0.9).contiguous,
        })
        logger.info(
            f"Sensitivity {parameter} delta={delta:+.4f}: FWHM {rows[-1]['fwhm_nm']:.2f} nm, "
            f"rematched {fwhm_rematched:.2f} nm"
        )
    return pd.DataFrame(rows, columns=SENSITIVITY_COLUMNS)
