"""Run-configuration schema (YAML on disk, validated strictly)."""
import logging
from typing import Dict, List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from brw_source.exceptions import ConfigError
from brw_source.models.stack import Layer, LayerStack
from brw_source.services.materials import FiberMode, MaterialModel
from brw_source.services.modesolver import SolverSettings
from brw_source.services.optimizer import DesignSpace, FitnessWeights, GASettings

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LayerConfig(Strict):
    al_fraction: float = Field(default=0.0, ge=0.0, le=1.0)
    thickness_nm: float = Field(gt=0.0)
    index: Optional[float] = Field(default=None, gt=1.0)

    def to_layer(self) -> Layer:
        return Layer(al_fraction=self.al_fraction, thickness_nm=self.thickness_nm, index=self.index)


class StackConfig(Strict):
    core: LayerConfig
    reflector: List[LayerConfig]
    periods: int = Field(default=8, ge=1)
    ridge_width_nm: float = Field(default=1770.0, gt=0.0)
    length_mm: float = Field(default=1.0, gt=0.0)
    lateral_index_contrast: float = Field(default=0.05, gt=0.0)

    @field_validator("reflector")
    @classmethod
    def _two_layers(cls, value):
        if len(value) != 2:
            raise ValueError(f"reflector must list exactly two layers (a bilayer), got {len(value)}")
        return value

    def to_stack(self) -> LayerStack:
        return LayerStack(
            core=self.core.to_layer(),
            bilayer=(self.reflector[0].to_layer(), self.reflector[1].to_layer()),
            periods=self.periods,
            ridge_width_nm=self.ridge_width_nm,
            length_mm=self.length_mm,
            lateral_index_contrast=self.lateral_index_contrast,
        )


class PumpConfig(Strict):
    wavelength_nm: float = Field(default=775.1, gt=0.0)
    power_mw: float = Field(default=1.0, gt=0.0)
    auto_phase_match: bool = False
    search_span_nm: float = Field(default=20.0, gt=0.0)


class DispersionConfig(Strict):
    band_nm: Optional[Tuple[float, float]] = None
    samples: int = Field(default=121, ge=50)
    margin: float = Field(default=0.01, ge=0.0)
    verify_midpoints: bool = True


class JsaConfig(Strict):
    span_thz: float = Field(default=25.0, gt=0.0)
    samples: int = Field(default=4097, ge=3)

    @field_validator("samples")
    @classmethod
    def _odd(cls, value):
        if value % 2 == 0:
            raise ValueError("samples must be odd so the grid is symmetric about zero")
        return value


class ChannelConfig(Strict):
    spacing_ghz: float = Field(default=50.0, gt=0.0)
    bandwidth_ghz: float = Field(default=50.0, gt=0.0)
    n_max: int = Field(default=200, ge=0)
    thresholds: List[float] = [0.9, 0.95, 0.99]


class NonlinearConfig(Strict):
    chi2_pm_per_v: float = Field(default=238.0, ge=0.0)


class OptimizerConfig(Strict):
    population: int = Field(default=32, ge=8)
    generations: int = Field(default=50, ge=1)
    relative_span: float = Field(default=0.15, gt=0.0, lt=1.0)
    freeze_ridge: bool = True
    bounds: Optional[Dict[str, Tuple[float, float]]] = None
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_scale: float = 0.02
    elite_count: int = 2
    tournament_size: int = 3
    weights: FitnessWeights = FitnessWeights()

    def ga_settings(self, seed: int, workers: int) -> GASettings:
        return GASettings(
            population=self.population,
            generations=self.generations,
            seed=seed,
            crossover_rate=self.crossover_rate,
            mutation_rate=self.mutation_rate,
            mutation_scale=self.mutation_scale,
            elite_count=self.elite_count,
            tournament_size=self.tournament_size,
            workers=workers,
        )

    def design_space(self, stack: LayerStack, pump_wavelength_um: float) -> DesignSpace:
        if self.bounds is None:
            return DesignSpace.around(stack, self.relative_span, self.freeze_ridge, pump_wavelength_um)
        frozen = ("ridge_width",) if self.freeze_ridge and "ridge_width" in self.bounds else ()
        return DesignSpace(bounds=self.bounds, frozen=frozen, base=stack, pump_wavelength_um=pump_wavelength_um)


class RunConfig(Strict):
    schema_version: Literal[1] = SCHEMA_VERSION
    stack: StackConfig
    material: MaterialModel = MaterialModel()
    pump: PumpConfig = PumpConfig()
    dispersion: DispersionConfig = DispersionConfig()
    jsa: JsaConfig = JsaConfig()
    channels: ChannelConfig = ChannelConfig()
    fiber: FiberMode = FiberMode()
    nonlinear: NonlinearConfig = NonlinearConfig()
    solver: SolverSettings = SolverSettings()
    optimizer: OptimizerConfig = OptimizerConfig()
    seed: int = 1
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def _check_band(self):
        if self.dispersion.band_nm is not None:
            lo, hi = sorted(self.dispersion.band_nm)
            if not lo > 0:
                raise ValueError("dispersion band must be positive")
        return self

    def layer_stack(self) -> LayerStack:
        return self.stack.to_stack()


def load_config(path: str) -> RunConfig:
    """Read and validate a YAML run configuration; failures raise ConfigError."""
    try:
        with open(path, "r") as handle:
            raw = yaml.safe_load(handle)
    except (OSError, yaml.YAMLError) as e:
        logger.error(f"Failed to read config {path}: {e}")
        raise ConfigError(f"Failed to read config {path}: {e}") from e
    return parse_config(raw, source=path)


def parse_config(raw, source: str = "<config>") -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        logger.error(f"Invalid config {source}: {e}")
        raise ConfigError(f"Invalid config {source}:\n{e}") from e


def dump_config(config: RunConfig) -> str:
    """Serialize a RunConfig back to YAML (used for optimized designs)."""
    data = config.model_dump(mode="json", exclude_none=True)
    return yaml.safe_dump(data, sort_keys=False)


def config_with_stack(config: RunConfig, stack: LayerStack) -> RunConfig:
    """Copy of the config whose stack section describes `stack`."""
    stack_config = StackConfig(
        core=LayerConfig(**stack.core.model_dump()),
        reflector=[LayerConfig(**layer.model_dump()) for layer in stack.bilayer],
        periods=stack.periods,
        ridge_width_nm=stack.ridge_width_nm,
        length_mm=stack.length_mm,
        lateral_index_contrast=stack.lateral_index_contrast,
    )
    return config.model_copy(update={"stack": stack_config})
