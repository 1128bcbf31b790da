"""Refractive-index model for Al(x)Ga(1-x)As and the single-mode fiber mode.

The index model is the Gehrsitz parametrization written in reciprocal
micrometres. Compositions run over x in [0, 1] and wavelengths over the
0.75-1.8 um window, provided the photon energy stays below the direct gap of
the composition.
"""
import logging
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import trapezoid

from brw_source.exceptions import MaterialDomainError

logger = logging.getLogger(__name__)

WINDOW_UM = (0.75, 1.8)
# Wavelengths closer than this factor to the direct-gap pole are rejected.
BAND_EDGE_MARGIN = 1.02


class MaterialModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: Literal["gehrsitz"] = "gehrsitz"
    temperature_k: float = Field(default=295.0, gt=0.0)

    def gap_energy(self, x: float) -> float:
        """Direct-gap resonance E0 in 1/um for composition x."""
        t = self.temperature_k
        return (
            1.225316977778989
            + 0.023083578135884 * (1.0 - 1.0 / np.tanh(92.255357763322920 / t))
            + 0.029810239269821 * (1.0 - 1.0 / np.tanh(194.9547182923050 / t))
            + 1.1308 * x
            + 0.1436 * x ** 2
        )

    def band_edge_um(self, x: float) -> float:
        """Shortest admissible wavelength for composition x."""
        return BAND_EDGE_MARGIN / self.gap_energy(x)

    def refractive_index(self, x: float, wavelength_um):
        """Real refractive index of Al(x)Ga(1-x)As; accepts scalar or array wavelengths."""
        self._check_domain(x, wavelength_um)
        t = self.temperature_k
        e2 = 1.0 / np.asarray(wavelength_um, dtype=float) ** 2

        a = (
            5.9613 + 7.178e-4 * t - 0.953e-6 * t ** 2
            - 16.159 * x + 43.511 * x ** 2 - 71.317 * x ** 3
            + 57.535 * x ** 4 - 17.451 * x ** 5
        )
        c0 = 1.0 / (
            50.535 - 150.7 * x - 62.209 * x ** 2 + 797.16 * x ** 3
            - 1125.0 * x ** 4 + 503.79 * x ** 5
        )
        e0 = self.gap_energy(x)
        c1 = 21.5647 + 113.74 * x - 122.5 * x ** 2 + 108.401 * x ** 3 - 47.318 * x ** 4
        e1_sq = 4.7171 - 3.237e-4 * t - 1.358e-6 * t ** 2 + 11.006 * x - 3.08 * x ** 2

        n_sq = (
            a
            + c0 / (e0 ** 2 - e2)
            + c1 / (e1_sq - e2)
            + (1.0 - x) * 1.55e-3 / (0.724e-3 - e2)
            + x * 2.61e-3 / (1.331e-3 - e2)
        )
        n = np.sqrt(n_sq)
        return float(n) if n.ndim == 0 else n

    def group_index(self, x: float, wavelength_um: float, step_um: float = 1e-4) -> float:
        """Material group index n - lambda dn/dlambda by central difference."""
        lo = self.refractive_index(x, wavelength_um - step_um)
        hi = self.refractive_index(x, wavelength_um + step_um)
        n = self.refractive_index(x, wavelength_um)
        return n - wavelength_um * (hi - lo) / (2.0 * step_um)

    def _check_domain(self, x: float, wavelength_um) -> None:
        if not 0.0 <= x <= 1.0:
            raise MaterialDomainError("x", x, "Al fraction must lie in [0, 1]")
        lam = np.asarray(wavelength_um, dtype=float)
        if np.any(lam < WINDOW_UM[0]) or np.any(lam > WINDOW_UM[1]):
            raise MaterialDomainError(
                "wavelength", wavelength_um,
                f"outside the supported window {WINDOW_UM[0]}-{WINDOW_UM[1]} um",
            )
        edge = self.band_edge_um(x)
        if np.any(lam <= edge):
            raise MaterialDomainError(
                "wavelength", wavelength_um,
                f"at or below the band edge ({edge:.4f} um) of x={x}",
            )


DEFAULT_MATERIAL = MaterialModel()


def refractive_index(x: float, wavelength_um, model: MaterialModel = DEFAULT_MATERIAL):
    return model.refractive_index(x, wavelength_um)


class FiberMode(BaseModel):
    """Gaussian fundamental mode of a single-mode fiber."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    mfd_um: float = 10.4
    wavelength_um: float = 1.55

    @property
    def waist_um(self) -> float:
        """1/e field radius."""
        return self.mfd_um / 2.0


def fiber_fundamental_profile(fiber: FiberMode, x_um, y_um, normalize_on_grid: bool = True) -> np.ndarray:
    """Sample the fiber mode on the (x, y) grid; rows follow x, columns follow y.

    With normalize_on_grid the samples integrate to one on the grid itself,
    otherwise the continuum normalization of the Gaussian is kept.
    """
    if not fiber.mfd_um > 0.0:
        raise MaterialDomainError("mfd_um", fiber.mfd_um, "mode-field diameter must be positive")
    x = np.asarray(x_um, dtype=float)
    y = np.asarray(y_um, dtype=float)
    w = fiber.waist_um
    r_sq = x[:, None] ** 2 + y[None, :] ** 2
    field = np.sqrt(2.0 / (np.pi * w ** 2)) * np.exp(-r_sq / w ** 2)
    if normalize_on_grid:
        power = trapezoid(trapezoid(np.abs(field) ** 2, y, axis=1), x)
        field = field / np.sqrt(power)
    return field
