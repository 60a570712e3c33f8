"""Covariance Matrix Adaptation Evolution Strategy with box constraints.

Strategy parameters follow the canonical setting (log-linear positive
recombination weights, cumulative step-size adaptation, rank-one plus
rank-mu covariance update). Out-of-box samples are redrawn up to
``resample_limit`` times and then clipped; the distribution update uses the
unclipped sample while the objective sees the clipped point.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator

logger = logging.getLogger(__name__)

EIGEN_FLOOR = 1e-14


class CmaesError(ValueError):
    """Raised for invalid input to the strategy, such as non-finite costs."""


def default_population(dimension: int) -> int:
    return 4 + int(3 * math.log(dimension))


class CmaesConfig(BaseModel):
    """Static settings of one optimization run."""
    model_config = ConfigDict(frozen=True)

    dimension: PositiveInt
    population: Optional[int] = None
    sigma0: PositiveFloat = 0.3
    max_generations: PositiveInt = 1000
    target_cost: Optional[float] = None
    seed: int = 0
    lower: Optional[List[float]] = None
    upper: Optional[List[float]] = None
    resample_limit: int = Field(default=10, ge=0)

    @model_validator(mode="after")
    def _check(self) -> "CmaesConfig":
        if self.lam < 2:
            raise ValueError(f"population must be at least 2, got {self.lam}")
        lo, hi = self.bounds()
        if lo.shape != (self.dimension,) or hi.shape != (self.dimension,):
            raise ValueError("bounds must have one entry per dimension")
        if not np.all(lo < hi):
            raise ValueError("every lower bound must be below its upper bound")
        return self

    @property
    def lam(self) -> int:
        return self.population if self.population is not None else default_population(self.dimension)

    @property
    def mu(self) -> int:
        return self.lam // 2

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        lo = np.full(self.dimension, -np.inf) if self.lower is None else np.asarray(self.lower, float)
        hi = np.full(self.dimension, np.inf) if self.upper is None else np.asarray(self.upper, float)
        return lo, hi


@dataclass(frozen=True)
class StrategyParameters:
    weights: np.ndarray
    mueff: float
    cc: float
    cs: float
    c1: float
    cmu: float
    damps: float
    chi_n: float

    @classmethod
    def for_config(cls, config: CmaesConfig) -> "StrategyParameters":
        n, lam, mu = config.dimension, config.lam, config.mu
        raw = np.log(lam / 2 + 0.5) - np.log(np.arange(1, mu + 1))
        weights = raw / raw.sum()
        mueff = 1.0 / float(np.sum(weights ** 2))
        cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
        cs = (mueff + 2) / (n + mueff + 5)
        c1 = 2 / ((n + 1.3) ** 2 + mueff)
        cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
        damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + cs
        chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n ** 2))
        return cls(weights, mueff, cc, cs, c1, cmu, damps, chi_n)


@dataclass
class CmaesState:
    """Distribution and evolution paths; owned by one optimization run."""
    mean: np.ndarray
    sigma: float
    C: np.ndarray
    B: np.ndarray
    D: np.ndarray  # square roots of the eigenvalues of C
    pc: np.ndarray
    ps: np.ndarray
    rng: np.random.Generator
    params: StrategyParameters
    generation: int = 0
    evaluations: int = 0
    repaired: bool = False


@dataclass
class Population:
    candidates: np.ndarray  # clipped, what the objective sees
    samples: np.ndarray  # unclipped, used for the update


@dataclass
class GenerationRecord:
    generation: int
    best_cost: float  # best ever
    median_cost: float
    sigma: float


@dataclass
class MinimizeResult:
    best: np.ndarray
    best_cost: float
    history: List[GenerationRecord] = field(default_factory=list)


def init_state(x0: Iterable[float], config: CmaesConfig) -> CmaesState:
    mean = np.array(list(x0), dtype=float)
    if mean.shape != (config.dimension,):
        raise CmaesError(f"x0 has {mean.size} entries, expected {config.dimension}")
    n = config.dimension
    return CmaesState(
        mean=mean,
        sigma=float(config.sigma0),
        C=np.eye(n),
        B=np.eye(n),
        D=np.ones(n),
        pc=np.zeros(n),
        ps=np.zeros(n),
        rng=np.random.default_rng(config.seed),
        params=StrategyParameters.for_config(config),
    )


def _decompose(state: CmaesState) -> None:
    """Refresh B and D from C, flooring eigenvalues to keep C positive definite."""
    C = 0.5 * (state.C + state.C.T)
    try:
        eigenvalues, B = np.linalg.eigh(C)
    except np.linalg.LinAlgError:
        logger.warning("covariance decomposition failed; resetting to the identity")
        eigenvalues, B = np.ones(len(C)), np.eye(len(C))
        state.repaired = True
    if np.min(eigenvalues) < EIGEN_FLOOR or not np.all(np.isfinite(eigenvalues)):
        eigenvalues = np.where(np.isfinite(eigenvalues), np.maximum(eigenvalues, EIGEN_FLOOR), 1.0)
        state.repaired = True
        logger.debug(f"generation {state.generation}: covariance eigenvalues floored")
    state.C = B @ np.diag(eigenvalues) @ B.T
    state.B = B
    state.D = np.sqrt(eigenvalues)


def ask(state: CmaesState, config: CmaesConfig) -> Population:
    """Sample a population, resampling then clipping out-of-box points."""
    lo, hi = config.bounds()
    n, lam = config.dimension, config.lam
    samples = np.empty((lam, n))
    for k in range(lam):
        for _ in range(config.resample_limit + 1):
            z = state.rng.standard_normal(n)
            x = state.mean + state.sigma * (state.B @ (state.D * z))
            if np.all(x >= lo) and np.all(x <= hi):
                break
        samples[k] = x
    return Population(candidates=np.clip(samples, lo, hi), samples=samples)


def tell(state: CmaesState, population: Population, costs, config: CmaesConfig) -> CmaesState:
    """Update mean, step size and covariance from ranked costs.

    Raises:
        CmaesError: If a cost is not finite or the counts do not match
    """
    costs = np.asarray(costs, dtype=float)
    if costs.shape != (len(population.samples),):
        raise CmaesError(f"expected {len(population.samples)} costs, got {costs.size}")
    if not np.all(np.isfinite(costs)):
        raise CmaesError("costs must be finite; penalize infeasible candidates instead")

    p = state.params
    n = config.dimension
    order = np.argsort(costs, kind="stable")
    elite = population.samples[order[:config.mu]]

    old_mean = state.mean
    y = (elite - old_mean) / state.sigma
    y_w = p.weights @ y
    state.mean = old_mean + state.sigma * y_w

    inv_sqrt = state.B @ np.diag(1.0 / state.D) @ state.B.T
    state.ps = (1 - p.cs) * state.ps + math.sqrt(p.cs * (2 - p.cs) * p.mueff) * (inv_sqrt @ y_w)
    generation = state.generation + 1
    ps_norm = float(np.linalg.norm(state.ps))
    hsig = (ps_norm / math.sqrt(1 - (1 - p.cs) ** (2 * generation)) / p.chi_n
            < 1.4 + 2 / (n + 1))
    state.pc = (1 - p.cc) * state.pc + hsig * math.sqrt(p.cc * (2 - p.cc) * p.mueff) * y_w

    c1a = p.c1 * (1 - (1 - hsig) * p.cc * (2 - p.cc))
    rank_mu = (y.T * p.weights) @ y
    state.C = ((1 - c1a - p.cmu) * state.C
               + p.c1 * np.outer(state.pc, state.pc)
               + p.cmu * rank_mu)

    state.sigma *= math.exp((p.cs / p.damps) * (ps_norm / p.chi_n - 1))
    state.generation = generation
    state.evaluations += len(costs)
    _decompose(state)
    return state


def minimize(
    objective: Callable[[np.ndarray], float],
    x0: Iterable[float],
    sigma0: float,
    config: CmaesConfig,
    map_fn: Callable = map,
) -> MinimizeResult:
    """Run ask/tell until the generation budget or the target cost is reached.

    Args:
        objective: Cost of one clipped candidate
        x0: Initial mean
        sigma0: Initial step size (overrides ``config.sigma0``)
        config: Run settings
        map_fn: Evaluates the objective over a population, in order

    Returns:
        Best-ever point and cost with the per-generation history
    """
    config = config.model_copy(update={"sigma0": sigma0})
    state = init_state(x0, config)
    best_x, best_cost = state.mean.copy(), math.inf
    history: List[GenerationRecord] = []

    for _ in range(config.max_generations):
        population = ask(state, config)
        costs = np.array(list(map_fn(objective, population.candidates)), dtype=float)
        tell(state, population, costs, config)

        k = int(np.argmin(costs))
        if costs[k] < best_cost:
            best_cost, best_x = float(costs[k]), population.candidates[k].copy()
        history.append(GenerationRecord(
            generation=state.generation,
            best_cost=best_cost,
            median_cost=float(np.median(costs)),
            sigma=state.sigma,
        ))
        if config.target_cost is not None and best_cost <= config.target_cost:
            logger.debug(f"target cost reached at generation {state.generation}")
            break

    return MinimizeResult(best=best_x, best_cost=best_cost, history=history)
