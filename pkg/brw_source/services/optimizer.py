"""Genetic-algorithm design search for phase- and group-velocity-matched stacks."""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from brw_source.exceptions import BRWError, InfeasibleSpaceError
from brw_source.models.stack import STACK_PARAMETERS, LayerStack
from brw_source.services.dispersion import ModeSpec, local_inverse_group_velocity
from brw_source.services.materials import DEFAULT_MATERIAL, MaterialModel
from brw_source.services.modesolver import DEFAULT_SETTINGS, SolverSettings
from brw_source.services.spdc import degenerate_mismatch
from brw_source.utils import C_LIGHT, wavelength_um_to_omega

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["generation", "best_fitness", "mean_fitness"]

SIGNAL = ModeSpec(polarization="TE", mode_class="TIR")
IDLER = ModeSpec(polarization="TM", mode_class="TIR")

# sinc^2 half-power point: sinc(x)^2 = 1/2
SINC2_HALF_POWER = 1.39156


class DesignSpace(BaseModel):
    """Bounds per named gene; frozen genes stay at the base stack value."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    bounds: Dict[str, Tuple[float, float]]
    frozen: Tuple[str, ...] = ()
    base: Optional[LayerStack] = None
    pump_wavelength_um: float = 0.7751

    @model_validator(mode="after")
    def _check_bounds(self):
        for name, (lower, upper) in self.bounds.items():
            if not (math.isfinite(lower) and math.isfinite(upper)) or not lower < upper:
                raise ValueError(f"Invalid bounds for {name}: ({lower}, {upper})")
        if self.base is not None:
            unknown = (set(self.bounds) | set(self.frozen)) - set(STACK_PARAMETERS)
            if unknown:
                raise ValueError(f"Unknown stack parameter(s): {', '.join(sorted(unknown))}")
        if not self.free_names:
            raise ValueError("design space has no free parameters")
        return self

    @classmethod
    def around(cls, stack: LayerStack, relative_span: float = 0.15, freeze_ridge: bool = True,
               pump_wavelength_um: float = 0.7751) -> "DesignSpace":
        """Box of +/- relative_span around a stack; Al fractions are clipped to [0, 1]."""
        params = stack.parameters()
        bounds = {}
        for name in ("t_c", "t_1", "t_2", "x_c", "x_1", "x_2", "ridge_width"):
            value = params[name]
            lower, upper = value * (1.0 - relative_span), value * (1.0 + relative_span)
            if name.startswith("x_"):
                lower, upper = max(lower, 0.0), min(upper, 1.0)
            bounds[name] = (lower, upper)
        frozen = ("ridge_width",) if freeze_ridge else ()
        return cls(bounds=bounds, frozen=frozen, base=stack, pump_wavelength_um=pump_wavelength_um)

    @property
    def free_names(self) -> List[str]:
        return [name for name in self.bounds if name not in self.frozen]

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.bounds[name][0] for name in self.free_names])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.bounds[name][1] for name in self.free_names])

    def decode(self, unit: np.ndarray) -> Dict[str, float]:
        """Map a gene vector in [0, 1]^d onto bounded parameter values."""
        values = np.clip(self.lower + np.asarray(unit) * (self.upper - self.lower), self.lower, self.upper)
        return {name: float(value) for name, value in zip(self.free_names, values)}

    def contains(self, genes: Dict[str, float]) -> bool:
        return all(self.bounds[name][0] <= genes[name] <= self.bounds[name][1] for name in self.free_names)

    def stack_for(self, genes: Dict[str, float]) -> LayerStack:
        if self.base is None:
            raise ValueError("design space has no base stack")
        return self.base.with_parameters(**genes)


class FitnessWeights(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    phase: float = 1.0
    group: float = 10.0
    bandwidth: float = 0.0


class Fitness(BaseModel):
    """Scalarized fitness; lower is better, infeasible designs score +inf."""

    model_config = ConfigDict(frozen=True)

    score: float
    feasible: bool = True
    phase_mismatch: Optional[float] = None
    group_mismatch: Optional[float] = None
    bandwidth_nm: Optional[float] = None

    @classmethod
    def infeasible(cls) -> "Fitness":
        return cls(score=math.inf, feasible=False)


def _linear_bandwidth_nm(group_mismatch_ns_per_m: float, length_m: float, wavelength_um: float,
                         cap_nm: float = 500.0) -> float:
    """FWHM of sinc^2 under a purely linear mismatch, capped."""
    slope = group_mismatch_ns_per_m * 1e-9
    if slope == 0.0:
        return cap_nm
    half_width = 2.0 * SINC2_HALF_POWER / (slope * length_m)
    width_nm = wavelength_um ** 2 * 1e-3 * 2.0 * half_width / (2.0 * np.pi * C_LIGHT)
    return float(min(width_nm, cap_nm))


class StackObjective:
    """Degenerate-point fitness of a stack; picklable for process pools."""

    def __init__(self, space: DesignSpace, weights: FitnessWeights = FitnessWeights(),
                 material: MaterialModel = DEFAULT_MATERIAL, settings: SolverSettings = DEFAULT_SETTINGS):
        self.space = space
        self.weights = weights
        self.material = material
        self.settings = settings

    def __call__(self, genes: Dict[str, float]) -> Fitness:
        try:
            stack = self.space.stack_for(genes)
            return self._evaluate(stack)
        except (BRWError, ValueError) as e:
            logger.debug(f"Infeasible design {genes}: {e}")
            return Fitness.infeasible()

    def _evaluate(self, stack: LayerStack) -> Fitness:
        lam_p = self.space.pump_wavelength_um
        lam_0 = 2.0 * lam_p
        omega_0 = wavelength_um_to_omega(lam_p) / 2.0
        delta_k = degenerate_mismatch(stack, lam_p, self.material, self.settings)

        ivg_s = local_inverse_group_velocity(stack, SIGNAL, omega_0, self.material, self.settings)
        ivg_i = local_inverse_group_velocity(stack, IDLER, omega_0, self.material, self.settings)
        group_mismatch = abs(ivg_s - ivg_i)

        fringe = 2.0 * np.pi / stack.length_m
        score = self.weights.phase * abs(delta_k) / fringe + self.weights.group * group_mismatch
        bandwidth = None
        if self.weights.bandwidth > 0.0:
            bandwidth = _linear_bandwidth_nm(group_mismatch, stack.length_m, lam_0)
            score -= self.weights.bandwidth * bandwidth / 100.0
        return Fitness(
            score=float(score),
            phase_mismatch=float(abs(delta_k)),
            group_mismatch=float(group_mismatch),
            bandwidth_nm=bandwidth,
        )


class SphereObjective:
    """Convex benchmark: sum of squared genes, optimum 0 at the origin."""

    def __call__(self, genes: Dict[str, float]) -> Fitness:
        return Fitness(score=float(sum(value ** 2 for value in genes.values())))


def evaluate_fitness(genes: Dict[str, float], space: DesignSpace, weights: FitnessWeights = FitnessWeights(),
                     material: MaterialModel = DEFAULT_MATERIAL,
                     settings: SolverSettings = DEFAULT_SETTINGS) -> Fitness:
    if not space.contains(genes):
        raise ValueError(f"Genes out of bounds: {genes}")
    return StackObjective(space, weights, material, settings)(genes)


class GASettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    population: int = Field(default=32, ge=8)
    generations: int = Field(default=50, ge=1)
    seed: int = 1
    crossover_rate: float = Field(default=0.9, ge=0.0, le=1.0)
    mutation_rate: float = Field(default=0.1, ge=0.0, le=1.0)
    mutation_scale: float = Field(default=0.02, gt=0.0)
    elite_count: int = Field(default=2, ge=1)
    tournament_size: int = Field(default=3, ge=1)
    sbx_eta: float = Field(default=15.0, gt=0.0)
    init_retries: int = Field(default=10, ge=1)
    workers: int = Field(default=1, ge=1)


class GAResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    best_genes: Dict[str, float]
    best_fitness: Fitness
    trace: pd.DataFrame
    best_stack: Optional[LayerStack] = None


class GeneticOptimizer:
    """Elitist generational GA on genes normalized to [0, 1].

    Every offspring draws from its own stream spawned from the seed, so the
    trace does not depend on how evaluations are scheduled.
    """

    def __init__(self, space: DesignSpace, settings: GASettings = GASettings()):
        if settings.elite_count >= settings.population:
            raise ValueError("elite_count must be smaller than the population")
        self.space = space
        self.settings = settings

    def run(self, objective) -> GAResult:
        settings = self.settings
        seeds = np.random.SeedSequence(settings.seed).spawn(settings.generations + 1)
        rng = np.random.default_rng(seeds[0])
        dims = len(self.space.free_names)

        population = fitness = None
        for attempt in range(settings.init_retries):
            population = rng.random((settings.population, dims))
            fitness = self._evaluate(objective, population)
            if any(f.feasible for f in fitness):
                break
            logger.warning(f"Initial population {attempt + 1} has no feasible design; resampling")
        else:
            raise InfeasibleSpaceError(
                f"No feasible design after {settings.init_retries} initial samplings"
            )

        trace = [self._record(0, fitness)]
        for generation in range(1, settings.generations + 1):
            scores = np.array([f.score for f in fitness])
            elites = np.argsort(scores, kind="stable")[:settings.elite_count]
            streams = seeds[generation].spawn(settings.population - settings.elite_count)
            children = np.array([
                self._offspring(np.random.default_rng(stream), population, scores) for stream in streams
            ])
            child_fitness = self._evaluate(objective, children)
            population = np.vstack((population[elites], children))
            fitness = [fitness[i] for i in elites] + child_fitness
            trace.append(self._record(generation, fitness))
            logger.debug(f"Generation {generation}: best {trace[-1]['best_fitness']:.6g}")

        scores = np.array([f.score for f in fitness])
        best = int(np.argsort(scores, kind="stable")[0])
        best_genes = self.space.decode(population[best])
        logger.info(f"GA finished: best fitness {fitness[best].score:.6g}")
        return GAResult(
            best_genes=best_genes,
            best_fitness=fitness[best],
            trace=pd.DataFrame(trace, columns=TRACE_COLUMNS),
            best_stack=self.space.stack_for(best_genes) if self.space.base is not None else None,
        )

    def _evaluate(self, objective, population: np.ndarray) -> List[Fitness]:
        genes = [self.space.decode(unit) for unit in population]
        if self.settings.workers > 1:
            with ProcessPoolExecutor(max_workers=self.settings.workers) as executor:
                return list(executor.map(objective, genes))
        return [objective(g) for g in genes]

    def _tournament(self, rng: np.random.Generator, scores: np.ndarray) -> int:
        entrants = rng.integers(0, len(scores), size=self.settings.tournament_size)
        return int(entrants[np.argmin(scores[entrants])])

    def _offspring(self, rng: np.random.Generator, population: np.ndarray, scores: np.ndarray) -> np.ndarray:
        settings = self.settings
        first = population[self._tournament(rng, scores)]
        second = population[self._tournament(rng, scores)]
        dims = first.size

        u = rng.random(dims)
        swap = rng.random(dims) < 0.5
        crossover = rng.random() < settings.crossover_rate
        exponent = 1.0 / (settings.sbx_eta + 1.0)
        spread = np.where(u <= 0.5, (2.0 * u) ** exponent, (1.0 / (2.0 * (1.0 - u))) ** exponent)
        blended = 0.5 * ((1.0 + spread) * first + (1.0 - spread) * second)
        child = np.where(swap & crossover, blended, first)

        mutate = rng.random(dims) < settings.mutation_rate
        child = child + mutate * rng.normal(0.0, settings.mutation_scale, dims)
        return np.clip(child, 0.0, 1.0)

    @staticmethod
    def _record(generation: int, fitness: List[Fitness]) -> dict:
        scores = np.array([f.score for f in fitness])
        finite = scores[np.isfinite(scores)]
        return {
            "generation": generation,
            "best_fitness": float(scores.min()),
            "mean_fitness": float(finite.mean()) if finite.size else math.inf,
        }


def run_ga(space: DesignSpace, settings: GASettings = GASettings(), objective=None,
           weights: FitnessWeights = FitnessWeights(), material: MaterialModel = DEFAULT_MATERIAL,
           solver_settings: SolverSettings = DEFAULT_SETTINGS) -> GAResult:
    """Run the GA; the default objective is the degenerate-point stack fitness."""
    if objective is None:
        objective = StackObjective(space, weights, material, solver_settings)
    return GeneticOptimizer(space, settings).run(objective)
