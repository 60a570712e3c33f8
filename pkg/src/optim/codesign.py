"""Stage 2: co-design of link lengths, gear ratios and controller gains."""

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..actuators.mass_models import link_mass
from ..actuators.stage1 import NoFeasibleActuatorError, lookup
from ..models.actuator import ActuatorCatalog, ActuatorDesign
from ..models.design import VARIABLE_NAMES, CaseSpec, CodesignVariables, CostConfig
from ..models.robot import ControllerParams, JumpResult, RobotModel, TerminationReason
from ..simulation.dynamics import rollout
from ..utils.config import RunConfig
from ..utils.logging_config import setup_worker_logging
from .cmaes import CmaesConfig, ask, init_state, tell

logger = logging.getLogger(__name__)

FAILED_ROLLOUTS = {TerminationReason.NUMERICAL_FAILURE, TerminationReason.SINGULAR}


@dataclass
class Evaluation:
    """Score of one design point."""
    cost: float
    apex_height: float
    energy: float
    feasible: bool
    reason: str
    detail: str = ""


@dataclass
class CodesignGeneration:
    generation: int
    best_cost: float  # best ever
    median_cost: float
    sigma: float
    best_h: float
    best_E: float


@dataclass
class PenaltyAudit:
    max_feasible_cost: float
    infeasible_penalty: float

    @property
    def ok(self) -> bool:
        return self.max_feasible_cost < self.infeasible_penalty


@dataclass
class CodesignResult:
    case: CaseSpec
    best: CodesignVariables
    best_cost: float
    evaluation: Evaluation
    jump: Optional[JumpResult]
    history: List[CodesignGeneration] = field(default_factory=list)
    audit: Optional[PenaltyAudit] = None
    evaluations: int = 0


def decode(
    y: CodesignVariables,
    catalog: ActuatorCatalog,
    config: RunConfig,
) -> Tuple[RobotModel, ControllerParams, Dict[str, ActuatorDesign]]:
    """Turn a design point into a plant and controller.

    Actuators come from the catalog bins holding g_h and g_k; link masses
    from the link mass model.

    Raises:
        ValueError: If y is outside the co-design bounds
        NoFeasibleActuatorError: If a ratio has no catalog actuator
    """
    outside = config.codesign_bounds.violations(y)
    if outside:
        raise ValueError(f"design point outside bounds: {', '.join(outside)}")

    hip = lookup(catalog, y.g_h)
    knee = lookup(catalog, y.g_k)
    rotor = catalog.motor.rotor_inertia if config.robot.reflect_rotor_inertia else 0.0

    model = RobotModel.assemble(
        l1=y.l1,
        l2=y.l2,
        m_l1=link_mass(y.l1, config.link_mass, config.materials),
        m_l2=link_mass(y.l2, config.link_mass, config.materials),
        hip_actuator_mass=hip.mass,
        knee_actuator_mass=knee.mass,
        hip_peak_torque=hip.peak_torque,
        knee_peak_torque=knee.peak_torque,
        base_mass=config.robot.base_mass,
        hip_rotor_inertia=hip.ratio ** 2 * rotor,
        knee_rotor_inertia=knee.ratio ** 2 * rotor,
        gravity=config.robot.gravity,
    )
    params = ControllerParams(
        K=y.K,
        C=y.C,
        T=y.T,
        l0=config.controller.rest_length_factor * (y.l1 + y.l2),
        alpha0=config.controller.alpha0,
        torsional_damping=config.controller.torsional_damping,
    )
    return model, params, {"hip": hip, "knee": knee}


def combined_cost(apex_height: float, energy: float, cost: CostConfig) -> float:
    """lambda1 * K_h * exp(-h) + lambda2 * E."""
    return cost.lambda1 * cost.K_h * math.exp(-apex_height) + cost.lambda2 * energy


def evaluate(
    y: CodesignVariables,
    catalog: ActuatorCatalog,
    config: RunConfig,
    record_trace: bool = False,
) -> Tuple[Evaluation, Optional[JumpResult]]:
    """Simulate one point; infeasible decodes and failed rollouts get the penalty."""
    penalty = config.cost.infeasible_penalty
    try:
        model, params, _ = decode(y, catalog, config)
        sim = config.sim.model_copy(update={"record_trace": record_trace})
        result = rollout(model, params, sim)
    except NoFeasibleActuatorError as e:
        return Evaluation(penalty, math.nan, math.nan, False, "infeasible actuator", str(e)), None
    except ValueError as e:
        return Evaluation(penalty, math.nan, math.nan, False, "invalid start", str(e)), None

    if result.reason in FAILED_ROLLOUTS:
        return Evaluation(penalty, result.apex_height, result.energy, False,
                          result.reason.value, result.detail), result
    value = combined_cost(result.apex_height, result.energy, config.cost)
    return Evaluation(value, result.apex_height, result.energy, True,
                      result.reason.value, result.detail), result


def cost(y: CodesignVariables, catalog: ActuatorCatalog, config: RunConfig) -> float:
    return evaluate(y, catalog, config)[0].cost


class CaseProblem:
    """Maps normalized free coordinates in [0, 1] to full design points."""

    def __init__(self, case: CaseSpec, config: RunConfig):
        self.case = case.resolved()
        self.bounds = config.codesign_bounds
        self.lower = self.bounds.lower()
        self.upper = self.bounds.upper()
        self.free_index = [VARIABLE_NAMES.index(name) for name in self.case.free]

        frozen = CodesignVariables.nominal().to_array()
        for name, value in self.case.frozen.items():
            frozen[VARIABLE_NAMES.index(name)] = value
        self.frozen_point = frozen
        outside = self.bounds.violations(CodesignVariables.from_array(frozen))
        if outside:
            raise ValueError(f"case '{self.case.name}' freezes values outside bounds: {', '.join(outside)}")

    @property
    def dimension(self) -> int:
        return len(self.free_index)

    def to_variables(self, z: np.ndarray) -> CodesignVariables:
        z = np.asarray(z, dtype=float)
        if np.any(z < 0.0) or np.any(z > 1.0):
            raise ValueError(f"normalized point {z} leaves the unit box")
        full = self.frozen_point.copy()
        idx = self.free_index
        full[idx] = np.clip(self.lower[idx] + z * (self.upper[idx] - self.lower[idx]),
                            self.lower[idx], self.upper[idx])
        return CodesignVariables.from_array(full)


# Per-process state for pool workers
_CATALOG: Optional[ActuatorCatalog] = None
_CONFIG: Optional[RunConfig] = None


def _init_pool_worker(catalog: ActuatorCatalog, config: RunConfig) -> None:
    global _CATALOG, _CONFIG
    setup_worker_logging(config.logging.level)
    _CATALOG, _CONFIG = catalog, config


def _evaluate_worker(y: CodesignVariables) -> Evaluation:
    return evaluate(y, _CATALOG, _CONFIG)[0]


class CodesignOptimizer:
    """Runs CMA-ES over the free variables of one case."""

    def __init__(self, catalog: ActuatorCatalog, config: RunConfig, jobs: Optional[int] = None):
        """Initialize optimizer.

        Args:
            catalog: Stage-1 actuator catalog
            config: Run configuration (bounds, cost, simulator, optimizer settings)
            jobs: Worker processes for population evaluation; 1 runs in-process
        """
        self.catalog = catalog
        self.config = config
        self.jobs = jobs or config.jobs or os.cpu_count() or 1
        self.logger = logging.getLogger(__name__)

    def optimize_case(
        self,
        case: Optional[CaseSpec] = None,
        progress: Optional[Callable[[CodesignGeneration], None]] = None,
    ) -> CodesignResult:
        """Optimize one case and re-simulate the best point with a full trace."""
        problem = CaseProblem(case or self.config.case, self.config)
        self.logger.info(
            f"Co-design case '{problem.case.name}': free [{', '.join(problem.case.free) or 'none'}], "
            f"seed {self.config.seed}"
        )

        if problem.dimension == 0:
            y = CodesignVariables.from_array(problem.frozen_point)
            evaluation, jump = evaluate(y, self.catalog, self.config, record_trace=True)
            row = CodesignGeneration(0, evaluation.cost, evaluation.cost, 0.0,
                                     evaluation.apex_height, evaluation.energy)
            return CodesignResult(
                case=problem.case, best=y, best_cost=evaluation.cost, evaluation=evaluation,
                jump=jump, history=[row], audit=self._audit([evaluation]), evaluations=1,
            )

        if self.jobs == 1:
            return self._run(problem, self._evaluate_serial, progress)
        with ProcessPoolExecutor(max_workers=self.jobs, initializer=_init_pool_worker,
                                 initargs=(self.catalog, self.config)) as pool:
            return self._run(problem, lambda points: list(pool.map(_evaluate_worker, points)), progress)

    def _evaluate_serial(self, points: List[CodesignVariables]) -> List[Evaluation]:
        return [evaluate(y, self.catalog, self.config)[0] for y in points]

    def _run(
        self,
        problem: CaseProblem,
        evaluate_batch: Callable[[List[CodesignVariables]], List[Evaluation]],
        progress,
    ) -> CodesignResult:
        settings = self.config.cmaes
        cma = CmaesConfig(
            dimension=problem.dimension,
            population=settings.population,
            sigma0=settings.sigma0,
            max_generations=settings.max_generations,
            target_cost=settings.target_cost,
            seed=self.config.seed,
            lower=[0.0] * problem.dimension,
            upper=[1.0] * problem.dimension,
            resample_limit=settings.resample_limit,
        )
        state = init_state(np.full(problem.dimension, 0.5), cma)

        best: Optional[Tuple[CodesignVariables, Evaluation]] = None
        seen: List[Evaluation] = []
        history: List[CodesignGeneration] = []

        for _ in range(cma.max_generations):
            population = ask(state, cma)
            points = [problem.to_variables(z) for z in population.candidates]
            evaluations = evaluate_batch(points)
            costs = [e.cost for e in evaluations]
            tell(state, population, costs, cma)
            seen.extend(evaluations)

            k = int(np.argmin(costs))
            if best is None or costs[k] < best[1].cost:
                best = (points[k], evaluations[k])
            infeasible = sum(1 for e in evaluations if not e.feasible)
            if infeasible:
                self.logger.warning(f"generation {state.generation}: {infeasible} penalized sample(s)")

            row = CodesignGeneration(
                generation=state.generation,
                best_cost=best[1].cost,
                median_cost=float(np.median(costs)),
                sigma=state.sigma,
                best_h=best[1].apex_height,
                best_E=best[1].energy,
            )
            history.append(row)
            self.logger.debug(
                f"gen {row.generation}: best {row.best_cost:.4f} median {row.median_cost:.4f} "
                f"sigma {row.sigma:.4g}"
            )
            if progress:
                progress(row)
            if cma.target_cost is not None and row.best_cost <= cma.target_cost:
                break

        best_y, _ = best
        evaluation, jump = evaluate(best_y, self.catalog, self.config, record_trace=True)
        audit = self._audit(seen)
        self.logger.info(
            f"Case '{problem.case.name}' done after {len(history)} generations: "
            f"cost {evaluation.cost:.4f}, h {evaluation.apex_height:.3f} m, E {evaluation.energy:.3f} J"
        )
        return CodesignResult(
            case=problem.case, best=best_y, best_cost=evaluation.cost, evaluation=evaluation,
            jump=jump, history=history, audit=audit, evaluations=len(seen),
        )

    def _audit(self, evaluations: List[Evaluation]) -> PenaltyAudit:
        feasible = [e.cost for e in evaluations if e.feasible]
        audit = PenaltyAudit(
            max_feasible_cost=max(feasible) if feasible else -math.inf,
            infeasible_penalty=self.config.cost.infeasible_penalty,
        )
        if not audit.ok:
            self.logger.warning(
                f"penalty {audit.infeasible_penalty} does not dominate feasible cost "
                f"{audit.max_feasible_cost:.4f}"
            )
        return audit


def optimize_case(
    case: CaseSpec,
    catalog: ActuatorCatalog,
    config: RunConfig,
    jobs: Optional[int] = 1,
) -> CodesignResult:
    return CodesignOptimizer(catalog, config, jobs).optimize_case(case)
