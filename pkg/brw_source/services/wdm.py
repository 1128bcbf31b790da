"""WDM channel grid and per-channel polarization-entanglement metrics."""
import logging
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import trapezoid

from brw_source.exceptions import ChannelRangeError
from brw_source.services.spdc import Jsa
from brw_source.utils import omega_to_wavelength_um

logger = logging.getLogger(__name__)

CHANNEL_COLUMNS = [
    "n", "lambda_upper_nm", "lambda_lower_nm", "alpha", "beta",
    "re_gamma", "im_gamma", "concurrence", "pair_rate_in_channel",
]

PAULI_Y2 = np.array([
    [0, 0, 0, -1],
    [0, 0, 1, 0],
    [0, 1, 0, 0],
    [-1, 0, 0, 0],
], dtype=complex)


class ChannelGrid(BaseModel):
    """Conjugate channel pairs at omega_0 +/- n * spacing."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    omega_0: float
    spacing_ghz: float = Field(default=50.0, gt=0.0)
    bandwidth_ghz: float = Field(default=50.0, gt=0.0)
    n_max: int = Field(default=200, ge=0)

    @property
    def spacing(self) -> float:
        """Channel spacing in rad/s."""
        return 2.0 * np.pi * self.spacing_ghz * 1e9

    @property
    def bandwidth(self) -> float:
        return 2.0 * np.pi * self.bandwidth_ghz * 1e9

    def band(self, n: int) -> Tuple[float, float]:
        """Detuning band B_n of channel n (upper path)."""
        center = n * self.spacing
        return center - self.bandwidth / 2.0, center + self.bandwidth / 2.0

    def center_wavelengths_nm(self, n: int) -> Tuple[float, float]:
        upper = omega_to_wavelength_um(self.omega_0 + n * self.spacing) * 1e3
        lower = omega_to_wavelength_um(self.omega_0 - n * self.spacing) * 1e3
        return float(upper), float(lower)


class ChannelRecord(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    alpha: float
    beta: float
    gamma: complex
    concurrence: float
    lambda_upper_nm: float
    lambda_lower_nm: float
    pair_rate: Optional[float] = None


class ChannelReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    channels: List[ChannelRecord] = []

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "n": record.n,
                "lambda_upper_nm": record.lambda_upper_nm,
                "lambda_lower_nm": record.lambda_lower_nm,
                "alpha": record.alpha,
                "beta": record.beta,
                "re_gamma": record.gamma.real,
                "im_gamma": record.gamma.imag,
                "concurrence": record.concurrence,
                "pair_rate_in_channel": np.nan if record.pair_rate is None else record.pair_rate,
            }
            for record in self.channels
        ]
        return pd.DataFrame(rows, columns=CHANNEL_COLUMNS)


class ChannelCount(BaseModel):
    model_config = ConfigDict(frozen=True)

    threshold: float
    contiguous: int
    total: int


def _band_samples(detuning: np.ndarray, values: np.ndarray, lo: float, hi: float):
    """Grid points inside [lo, hi] plus linearly interpolated end points."""
    inside = (detuning > lo) & (detuning < hi)
    x = np.concatenate(([lo], detuning[inside], [hi]))
    edges = np.array([lo, hi])
    ends = np.interp(edges, detuning, values.real) + 1j * np.interp(edges, detuning, values.imag)
    v = np.concatenate((ends[:1], values[inside], ends[1:]))
    return x, v


def _band_integrals(jsa: Jsa, grid: ChannelGrid, n: int):
    lo, hi = grid.band(n)
    detuning = jsa.detuning
    if lo < detuning[0] or hi > detuning[-1]:
        raise ChannelRangeError(n, "band lies outside the JSA grid")
    x, forward = _band_samples(detuning, jsa.phi, lo, hi)
    _, backward = _band_samples(detuning, jsa.phi[::-1], lo, hi)
    alpha = trapezoid(np.abs(forward) ** 2, x)
    beta = trapezoid(np.abs(backward) ** 2, x)
    gamma = trapezoid(forward * np.conj(backward), x)
    return float(alpha), float(beta), complex(gamma)


def _normalize(n: int, alpha: float, beta: float, gamma: complex):
    total = alpha + beta
    if total <= 0.0:
        logger.warning(f"Channel {n} carries no spectral weight")
        return 0.5, 0.5, 0j
    return alpha / total, beta / total, gamma / total


def channel_coefficients(jsa: Jsa, grid: ChannelGrid, n: int) -> Tuple[float, float, complex]:
    """(alpha_n, beta_n, gamma_n) normalized so that alpha_n + beta_n = 1."""
    return _normalize(n, *_band_integrals(jsa, grid, n))


def concurrence(gamma: complex) -> float:
    return 2.0 * abs(gamma)


def density_matrix(alpha: float, beta: float, gamma: complex) -> np.ndarray:
    """4x4 two-photon state in the basis {TE.TE, TE.TM, TM.TE, TM.TM}."""
    if abs(alpha + beta - 1.0) > 1e-9:
        raise ValueError(f"alpha + beta must equal 1, got {alpha + beta}")
    if alpha < 0 or beta < 0 or abs(gamma) > np.sqrt(alpha * beta) + 1e-12:
        raise ValueError("coefficients do not describe a positive semidefinite state")
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = alpha
    rho[2, 2] = beta
    rho[1, 2] = gamma
    rho[2, 1] = np.conj(gamma)
    return rho


def wootters_concurrence(rho: np.ndarray) -> float:
    """General two-qubit concurrence max(0, l1 - l2 - l3 - l4)."""
    rho_tilde = PAULI_Y2 @ rho.conj() @ PAULI_Y2
    eigenvalues = np.linalg.eigvals(rho @ rho_tilde)
    lambdas = np.sort(np.sqrt(np.clip(eigenvalues.real, 0.0, None)))[::-1]
    return float(max(0.0, lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]))


def build_channel_report(jsa: Jsa, grid: ChannelGrid, rate_scale: Optional[float] = None) -> ChannelReport:
    """Coefficients for channels 1..n_max.

    With `rate_scale` (sigma^2 L^2 F_p times fiber couplings) each record also
    carries the pair rate that lands in the conjugate channel pair.
    """
    records = []
    for n in range(1, grid.n_max + 1):
        raw = _band_integrals(jsa, grid, n)
        alpha, beta, gamma = _normalize(n, *raw)
        upper, lower = grid.center_wavelengths_nm(n)
        records.append(ChannelRecord(
            n=n,
            alpha=alpha,
            beta=beta,
            gamma=gamma,
            concurrence=concurrence(gamma),
            lambda_upper_nm=upper,
            lambda_lower_nm=lower,
            pair_rate=None if rate_scale is None else rate_scale * (raw[0] + raw[1]),
        ))
    logger.info(f"Built channel report with {len(records)} channels")
    return ChannelReport(channels=records)


def channels_above(report: ChannelReport, c_min: float) -> ChannelCount:
    """Channels with C_n > c_min, counted contiguously from n = 1 and in total."""
    flags = [record.concurrence > c_min for record in report.channels]
    contiguous = 0
    for flag in flags:
        if not flag:
            break
        contiguous += 1
    return ChannelCount(threshold=c_min, contiguous=contiguous, total=sum(flags))
