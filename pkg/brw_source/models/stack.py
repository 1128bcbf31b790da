"""Layered waveguide geometry."""
import math
from typing import Dict, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from brw_source.services.materials import DEFAULT_MATERIAL, MaterialModel

# Parameter names shared by the optimizer and the sensitivity scan.
STACK_PARAMETERS = (
    "t_c", "t_1", "t_2", "x_c", "x_1", "x_2", "ridge_width", "lateral_index_contrast",
)


class Layer(BaseModel):
    """One AlGaAs layer; `index` overrides the material model with a fixed value."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    al_fraction: float = Field(default=0.0, ge=0.0, le=1.0)
    thickness_nm: float = Field(gt=0.0)
    index: Optional[float] = Field(default=None, gt=1.0)

    def refractive_index(self, wavelength_um: float, material: MaterialModel = DEFAULT_MATERIAL) -> float:
        if self.index is not None:
            return self.index
        return material.refractive_index(self.al_fraction, wavelength_um)


class IndexProfile(BaseModel):
    """Symmetric stack resolved to indices at one wavelength.

    Thicknesses are in nm; the bilayer is ordered outward from the core.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    core_index: float
    core_thickness_nm: float = Field(gt=0.0)
    bilayer_indices: Tuple[float, float]
    bilayer_thicknesses_nm: Tuple[float, float]
    periods: int = Field(default=8, ge=1)

    @property
    def period_nm(self) -> float:
        return sum(self.bilayer_thicknesses_nm)

    @property
    def half_extent_nm(self) -> float:
        return self.core_thickness_nm / 2.0 + self.periods * self.period_nm

    @property
    def reflector_min_index(self) -> float:
        return min(self.bilayer_indices)

    @property
    def max_index(self) -> float:
        return max(self.core_index, *self.bilayer_indices)

    @classmethod
    def slab(cls, core_index: float, core_thickness_nm: float, cladding_index: float,
             cladding_extent_nm: float = 1000.0) -> "IndexProfile":
        """Symmetric three-layer slab expressed as a stack of identical reflector layers."""
        half = cladding_extent_nm / 2.0
        return cls(
            core_index=core_index,
            core_thickness_nm=core_thickness_nm,
            bilayer_indices=(cladding_index, cladding_index),
            bilayer_thicknesses_nm=(half, half),
            periods=1,
        )


class LayerStack(BaseModel):
    """Symmetric Bragg reflection waveguide: reflector, core, mirrored reflector.

    The outer medium is the periodic continuation of the reflector (Bloch
    boundary condition); the finite period count only bounds the sampled
    field profiles.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    core: Layer
    bilayer: Tuple[Layer, Layer]
    periods: int = Field(default=8, ge=1)
    ridge_width_nm: float = Field(default=1770.0, gt=0.0)
    length_mm: float = Field(default=1.0, gt=0.0)
    lateral_index_contrast: float = Field(default=0.05, gt=0.0)
    outer_medium: Literal["periodic"] = "periodic"

    @model_validator(mode="after")
    def _check_width(self):
        if math.isnan(self.ridge_width_nm):
            raise ValueError("ridge_width_nm must be a number")
        return self

    @classmethod
    def table1(cls) -> "LayerStack":
        return cls(
            core=Layer(al_fraction=0.7, thickness_nm=370.0),
            bilayer=(
                Layer(al_fraction=0.4, thickness_nm=127.0),
                Layer(al_fraction=0.9, thickness_nm=309.0),
            ),
            periods=8,
            ridge_width_nm=1770.0,
            length_mm=1.0,
        )

    @property
    def layers(self) -> list:
        """Full ordered layer list, bottom to top."""
        reflector = list(self.bilayer) * self.periods
        return list(reversed(reflector)) + [self.core] + reflector

    @property
    def core_position(self) -> int:
        return 2 * self.periods

    @property
    def length_m(self) -> float:
        return self.length_mm * 1e-3

    def index_profile(self, wavelength_um: float, material: MaterialModel = DEFAULT_MATERIAL) -> IndexProfile:
        return IndexProfile(
            core_index=self.core.refractive_index(wavelength_um, material),
            core_thickness_nm=self.core.thickness_nm,
            bilayer_indices=tuple(layer.refractive_index(wavelength_um, material) for layer in self.bilayer),
            bilayer_thicknesses_nm=tuple(layer.thickness_nm for layer in self.bilayer),
            periods=self.periods,
        )

    def parameters(self) -> Dict[str, float]:
        return {
            "t_c": self.core.thickness_nm,
            "t_1": self.bilayer[0].thickness_nm,
            "t_2": self.bilayer[1].thickness_nm,
            "x_c": self.core.al_fraction,
            "x_1": self.bilayer[0].al_fraction,
            "x_2": self.bilayer[1].al_fraction,
            "ridge_width": self.ridge_width_nm,
            "lateral_index_contrast": self.lateral_index_contrast,
        }

    def with_parameters(self, **values: float) -> "LayerStack":
        """Copy of the stack with named parameters replaced."""
        unknown = set(values) - set(STACK_PARAMETERS)
        if unknown:
            raise KeyError(f"Unknown stack parameter(s): {', '.join(sorted(unknown))}")
        params = {**self.parameters(), **values}
        return LayerStack(
            core=Layer(al_fraction=params["x_c"], thickness_nm=params["t_c"], index=self.core.index),
            bilayer=(
                Layer(al_fraction=params["x_1"], thickness_nm=params["t_1"], index=self.bilayer[0].index),
                Layer(al_fraction=params["x_2"], thickness_nm=params["t_2"], index=self.bilayer[1].index),
            ),
            periods=self.periods,
            ridge_width_nm=params["ridge_width"],
            length_mm=self.length_mm,
            lateral_index_contrast=params["lateral_index_contrast"],
            outer_medium=self.outer_medium,
        )
