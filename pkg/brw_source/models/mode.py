"""Guided-mode results returned by the mode solver."""
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.integrate import trapezoid

Polarization = Literal["TE", "TM"]
ModeClass = Literal["TIR", "Bragg"]
Parity = Literal["even", "odd"]


class GuidedMode(BaseModel):
    """A 1-D slab mode.

    `position_nm` and `field` sample the profile U(y); the field is real and
    normalized so that the integral of U^2 over y in micrometres is one.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    polarization: Polarization
    mode_class: ModeClass
    n_eff: float
    wavelength_um: float
    parity: Parity = "even"
    bloch_eigenvalue: float = 0.0
    sample_spacing_nm: float = 1.0
    position_nm: Optional[np.ndarray] = None
    field: Optional[np.ndarray] = None

    @property
    def has_profile(self) -> bool:
        return self.field is not None

    def power_fraction(self, lower_nm: float, upper_nm: float) -> float:
        """Fraction of |U|^2 between two positions."""
        if not self.has_profile:
            raise ValueError("mode was solved without a profile")
        y = self.position_nm * 1e-3
        inside = (self.position_nm >= lower_nm) & (self.position_nm <= upper_nm)
        total = trapezoid(self.field ** 2, y)
        return float(trapezoid(np.where(inside, self.field ** 2, 0.0), y) / total)


class RidgeMode(BaseModel):
    """Effective-index reduction of the ridge: vertical then lateral slab."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    vertical: GuidedMode
    lateral: Optional[GuidedMode] = None
    n_eff: float
    lateral_cutoff: bool = False

    @property
    def polarization(self) -> Polarization:
        return self.vertical.polarization

    @property
    def mode_class(self) -> ModeClass:
        return self.vertical.mode_class


class ModeProfile2D(BaseModel):
    """Separable transverse profile U(x, y) = X(x) Y(y), coordinates in um."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x_um: np.ndarray
    y_um: np.ndarray
    x_field: np.ndarray
    y_field: np.ndarray

    @property
    def field(self) -> np.ndarray:
        """Full 2-D samples, rows along x."""
        return np.outer(self.x_field, self.y_field)

    def norm(self) -> float:
        return float(
            trapezoid(np.abs(self.x_field) ** 2, self.x_um) * trapezoid(np.abs(self.y_field) ** 2, self.y_um)
        )
