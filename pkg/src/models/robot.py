"""Data models for the planar monoped plant, its controller and simulator runs."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, model_validator


GRAVITY = 9.81

TRACE_COLUMNS = (
    "t", "base_z", "theta1", "theta2", "omega_h", "omega_k",
    "tau_h", "tau_k", "l", "alpha", "F_x", "F_z", "phase",
)


class Phase(str, Enum):
    STANCE = "stance"
    FLIGHT = "flight"
    LANDED = "landed"


class TerminationReason(str, Enum):
    """Why a rollout stopped."""
    NO_LIFTOFF = "no liftoff"
    NUMERICAL_FAILURE = "numerical failure"
    SINGULAR = "singular configuration"
    TIMEOUT = "timeout"
    APEX = "apex"
    LANDED = "landed"


class RobotModel(BaseModel):
    """Two-link leg under a non-rotating base.

    Link masses sit at link midpoints; base structure and both actuators sit
    at the hip.
    """
    model_config = ConfigDict(frozen=True)

    l1: float = Field(gt=0.05, le=1.0)  # thigh, m
    l2: float = Field(gt=0.05, le=1.0)  # shank, m
    m_l1: PositiveFloat
    m_l2: PositiveFloat
    hip_actuator_mass: PositiveFloat
    knee_actuator_mass: PositiveFloat
    hip_peak_torque: PositiveFloat
    knee_peak_torque: PositiveFloat
    base_mass: NonNegativeFloat
    total_mass: PositiveFloat
    hip_rotor_inertia: NonNegativeFloat = 0.0  # reflected, kg·m²
    knee_rotor_inertia: NonNegativeFloat = 0.0
    gravity: PositiveFloat = GRAVITY

    @model_validator(mode="after")
    def _check_total(self) -> "RobotModel":
        parts = (self.base_mass + self.hip_actuator_mass + self.knee_actuator_mass
                 + self.m_l1 + self.m_l2)
        if abs(parts - self.total_mass) > 1e-9:
            raise ValueError(f"total_mass {self.total_mass} != sum of parts {parts}")
        return self

    @classmethod
    def assemble(cls, **parts) -> "RobotModel":
        """Build a model, deriving ``total_mass`` from its parts."""
        total = math.fsum((parts.get("base_mass", 0.0), parts["hip_actuator_mass"],
                           parts["knee_actuator_mass"], parts["m_l1"], parts["m_l2"]))
        return cls(total_mass=total, **parts)

    @property
    def hip_mass(self) -> float:
        """Everything lumped at the hip."""
        return self.base_mass + self.hip_actuator_mass + self.knee_actuator_mass

    @property
    def peak_torques(self) -> Tuple[float, float]:
        return self.hip_peak_torque, self.knee_peak_torque


class ControllerParams(BaseModel):
    """Virtual spring-damper gains acting along and across the hip-to-foot line."""
    model_config = ConfigDict(frozen=True)

    K: NonNegativeFloat  # N/m
    C: NonNegativeFloat  # N·s/m
    T: NonNegativeFloat  # N·m/rad
    l0: PositiveFloat  # m
    alpha0: float = 0.0  # rad
    torsional_damping: NonNegativeFloat = 0.0  # N·m·s/rad


class SimConfig(BaseModel):
    """Integrator and termination settings."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    dt: PositiveFloat = 0.002
    h0: PositiveFloat = 0.5
    max_sim_time: PositiveFloat = 2.0
    x0: float = 0.0
    clamp_torques: bool = True
    stop_at_apex: bool = True
    # Knee hard stop near full extension; reaching it while extending locks the leg
    knee_lock_angle: NonNegativeFloat = 0.05
    # Stance ends as a collapse once the knee folds this close to pi
    knee_fold_margin: PositiveFloat = 0.05
    record_trace: bool = True


@dataclass
class SimState:
    """Mutable state owned by a single rollout.

    In stance the base position and velocity follow from the anchor and the
    joint state; in flight the joints are frozen and the base is ballistic.
    """
    phase: Phase
    t: float
    base: np.ndarray  # (x, z)
    base_velocity: np.ndarray
    theta: np.ndarray  # (hip, knee)
    omega: np.ndarray
    anchor: Optional[np.ndarray] = None  # foot contact point while in stance

    def copy(self) -> "SimState":
        return SimState(
            phase=self.phase,
            t=self.t,
            base=self.base.copy(),
            base_velocity=self.base_velocity.copy(),
            theta=self.theta.copy(),
            omega=self.omega.copy(),
            anchor=None if self.anchor is None else self.anchor.copy(),
        )

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.base)) and np.all(np.isfinite(self.base_velocity))
                    and np.all(np.isfinite(self.theta)) and np.all(np.isfinite(self.omega)))


@dataclass
class JumpResult:
    """Metrics and traces of one single-jump rollout."""
    apex_height: float
    energy: float
    reason: TerminationReason
    lifted_off: bool = False
    liftoff_time: Optional[float] = None
    liftoff_height: Optional[float] = None
    liftoff_velocity: Optional[Tuple[float, float]] = None
    knee_locked: bool = False
    detail: str = ""
    trace: Dict[str, np.ndarray] = field(default_factory=dict)
    # Per-step extras: ground reaction (x, z) and total mechanical energy
    reaction: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    mechanical_energy: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def steps(self) -> int:
        return len(self.trace.get("t", ()))

    def summary(self) -> Dict[str, object]:
        return {
            "apex_height_m": self.apex_height,
            "energy_J": self.energy,
            "reason": self.reason.value,
            "lifted_off": self.lifted_off,
            "liftoff_time_s": self.liftoff_time,
            "liftoff_height_m": self.liftoff_height,
            "liftoff_velocity_m_per_s": (list(self.liftoff_velocity)
                                         if self.liftoff_velocity is not None else None),
            "knee_locked": self.knee_locked,
            "detail": self.detail,
            "steps": self.steps,
        }
