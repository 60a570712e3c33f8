"""Planar monoped hopping simulator.

World frame: x forward, z up. Joint angles are measured from the downward
vertical; the knee bends backwards (theta2 in (0, pi)). During stance the foot
is pinned to its anchor and the leg is a 2R chain carrying the base; in flight
the joints are locked and the whole robot moves as one ballistic body.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..models.robot import (
    TRACE_COLUMNS,
    ControllerParams,
    JumpResult,
    Phase,
    RobotModel,
    SimConfig,
    SimState,
    TerminationReason,
)

logger = logging.getLogger(__name__)

SINGULAR_TOL = 1e-9


@dataclass(frozen=True)
class LegGeometry:
    """Hip-to-foot kinematics at one joint configuration."""
    l: float
    alpha: float
    foot: np.ndarray  # foot relative to the hip
    J: np.ndarray  # d(foot)/d(theta)
    singular: bool


def leg_geometry(theta1: float, theta2: float, model: RobotModel) -> LegGeometry:
    """Forward kinematics of the leg.

    ``alpha`` is the angle of the hip-to-foot line from the downward vertical,
    positive when the foot is behind the hip (x_foot < 0).
    """
    l1, l2 = model.l1, model.l2
    s1, c1 = math.sin(theta1), math.cos(theta1)
    s12, c12 = math.sin(theta1 + theta2), math.cos(theta1 + theta2)
    fx = l1 * s1 + l2 * s12
    fz = -l1 * c1 - l2 * c12
    J = np.array([
        [l1 * c1 + l2 * c12, l2 * c12],
        [l1 * s1 + l2 * s12, l2 * s12],
    ])
    return LegGeometry(
        l=math.hypot(fx, fz),
        alpha=math.atan2(-fx, -fz),
        foot=np.array([fx, fz]),
        J=J,
        singular=abs(math.sin(theta2)) < SINGULAR_TOL,
    )


def leg_rates(geometry: LegGeometry, omega: np.ndarray) -> Tuple[float, float]:
    """(l_dot, alpha_dot) from joint velocities."""
    fx, fz = geometry.foot
    vx, vz = geometry.J @ omega
    l = geometry.l
    return (fx * vx + fz * vz) / l, (fz * vx - fx * vz) / (l * l)


def inverse_kinematics(foot_x: float, foot_z: float, model: RobotModel) -> np.ndarray:
    """Joint angles placing the foot at (foot_x, foot_z) relative to the hip.

    Raises:
        ValueError: If the point is out of reach
    """
    l1, l2 = model.l1, model.l2
    r2 = foot_x ** 2 + foot_z ** 2
    cos_knee = (r2 - l1 ** 2 - l2 ** 2) / (2 * l1 * l2)
    if not -1.0 <= cos_knee <= 1.0:
        raise ValueError(
            f"foot at distance {math.sqrt(r2):.3f} m is out of reach for links "
            f"{l1:.3f} + {l2:.3f} m"
        )
    theta2 = math.acos(cos_knee)
    theta1 = (math.atan2(foot_x, -foot_z)
              - math.atan2(l2 * math.sin(theta2), l1 + l2 * math.cos(theta2)))
    return np.array([theta1, theta2])


def vmc_wrench(
    l: float,
    l_dot: float,
    alpha: float,
    alpha_dot: float,
    params: ControllerParams,
    model: RobotModel,
) -> Tuple[float, float]:
    """Force (F_x, F_z) the foot should exert on the ground.

    A linear spring-damper acts along the leg and a torsional spring (with
    optional damping) acts about the hip; the total weight is fed forward.
    Compression at alpha = 0 gives F_z < 0, i.e. the ground pushes the body up.
    """
    f_axial = params.K * (params.l0 - l) - params.C * l_dot
    tau_t = params.T * (params.alpha0 - alpha) - params.torsional_damping * alpha_dot
    s, c = math.sin(alpha), math.cos(alpha)
    f_z = -f_axial * c + (tau_t / l) * s - model.total_mass * model.gravity
    f_x = -f_axial * s - (tau_t / l) * c
    return f_x, f_z


def joint_torques(
    J: np.ndarray,
    f_x: float,
    f_z: float,
    model: RobotModel,
    clamp: bool = True,
) -> np.ndarray:
    """tau = J^T F, each joint clipped to its actuator peak torque."""
    tau = J.T @ np.array([f_x, f_z])
    if clamp:
        limits = np.array(model.peak_torques)
        tau = np.clip(tau, -limits, limits)
    return tau


def _lumped_masses(model: RobotModel) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Masses and their coefficients in p = anchor + A u(theta1) + B u(theta1 + theta2).

    Points: hip (base and actuators), thigh midpoint, shank midpoint.
    """
    masses = np.array([model.hip_mass, model.m_l1, model.m_l2])
    A = np.array([-model.l1, -0.5 * model.l1, 0.0])
    B = np.array([-model.l2, -model.l2, -0.5 * model.l2])
    return masses, A, B


def _point_jacobians(theta: np.ndarray, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    s1, c1 = math.sin(theta[0]), math.cos(theta[0])
    s12, c12 = math.sin(theta[0] + theta[1]), math.cos(theta[0] + theta[1])
    v1 = np.array([c1, s1])
    v12 = np.array([c12, s12])
    Jp = np.empty((len(A), 2, 2))
    Jp[:, :, 0] = A[:, None] * v1 + B[:, None] * v12
    Jp[:, :, 1] = B[:, None] * v12
    return Jp


def stance_dynamics(
    theta: np.ndarray,
    omega: np.ndarray,
    tau: np.ndarray,
    model: RobotModel,
) -> Tuple[np.ndarray, np.ndarray]:
    """Joint accelerations and ground reaction for the pinned-foot chain.

    Returns:
        (theta_ddot, reaction) with reaction the force of the ground on the foot

    Raises:
        numpy.linalg.LinAlgError: If the mass matrix is singular
    """
    masses, A, B = _lumped_masses(model)
    Jp = _point_jacobians(theta, A, B)
    t1, t12 = theta[0], theta[0] + theta[1]
    w1, w12 = omega[0], omega[0] + omega[1]
    u1 = np.array([math.sin(t1), -math.cos(t1)])
    u12 = np.array([math.sin(t12), -math.cos(t12)])
    # velocity-product part of each point's acceleration
    bias = -A[:, None] * u1 * w1 ** 2 - B[:, None] * u12 * w12 ** 2
    gravity = np.array([0.0, model.gravity])

    M = np.einsum("k,kia,kib->ab", masses, Jp, Jp)
    M += np.diag([model.hip_rotor_inertia, model.knee_rotor_inertia])
    rhs = tau - np.einsum("k,kia,ki->a", masses, Jp, bias + gravity)
    theta_ddot = np.linalg.solve(M, rhs)

    accel = np.einsum("kia,a->ki", Jp, theta_ddot) + bias
    reaction = (masses[:, None] * (accel + gravity)).sum(axis=0)
    return theta_ddot, reaction


def _stance_base(state: SimState, model: RobotModel) -> Tuple[np.ndarray, np.ndarray]:
    geo = leg_geometry(state.theta[0], state.theta[1], model)
    return state.anchor - geo.foot, -(geo.J @ state.omega)


def stance_step(
    state: SimState,
    tau: np.ndarray,
    model: RobotModel,
    config: SimConfig,
    theta_ddot: Optional[np.ndarray] = None,
) -> SimState:
    """Advance the pinned-foot chain by one semi-implicit Euler step.

    Args:
        state: Current stance state
        tau: Joint torques held over the step
        model: Plant
        config: Provides dt
        theta_ddot: Accelerations already computed for (state, tau), if any

    Returns:
        New state; base position and velocity follow the joints
    """
    if theta_ddot is None:
        theta_ddot, _ = stance_dynamics(state.theta, state.omega, tau, model)
    nxt = state.copy()
    nxt.omega = state.omega + config.dt * theta_ddot
    nxt.theta = state.theta + config.dt * nxt.omega
    nxt.t = state.t + config.dt
    nxt.base, nxt.base_velocity = _stance_base(nxt, model)
    return nxt


def flight_step(state: SimState, model: RobotModel, config: SimConfig) -> SimState:
    """Exact projectile update of the locked robot over one step."""
    dt, g = config.dt, model.gravity
    nxt = state.copy()
    vx, vz = state.base_velocity
    nxt.base = np.array([state.base[0] + vx * dt, state.base[1] + vz * dt - 0.5 * g * dt * dt])
    nxt.base_velocity = np.array([vx, vz - g * dt])
    nxt.t = state.t + dt
    return nxt


def center_of_mass_velocity(state: SimState, model: RobotModel) -> np.ndarray:
    """Linear momentum / total mass; equals the base velocity once joints are locked."""
    if state.phase != Phase.STANCE:
        return state.base_velocity.copy()
    masses, A, B = _lumped_masses(model)
    Jp = _point_jacobians(state.theta, A, B)
    velocities = np.einsum("kia,a->ki", Jp, state.omega)
    return (masses[:, None] * velocities).sum(axis=0) / model.total_mass


def mechanical_energy(state: SimState, model: RobotModel) -> float:
    """Kinetic (links and reflected rotors) plus gravitational potential energy (J)."""
    masses, A, B = _lumped_masses(model)
    theta = state.theta
    u1 = np.array([math.sin(theta[0]), -math.cos(theta[0])])
    u12 = np.array([math.sin(theta[0] + theta[1]), -math.cos(theta[0] + theta[1])])
    # point heights relative to the hip: hip, thigh middle, shank middle
    rel_z = np.array([0.0, 0.5 * model.l1 * u1[1], model.l1 * u1[1] + 0.5 * model.l2 * u12[1]])
    potential = model.gravity * float(np.dot(masses, state.base[1] + rel_z))

    if state.phase == Phase.STANCE:
        Jp = _point_jacobians(theta, A, B)
        velocities = np.einsum("kia,a->ki", Jp, state.omega)
        kinetic = 0.5 * float(np.sum(masses * np.sum(velocities ** 2, axis=1)))
        kinetic += 0.5 * (model.hip_rotor_inertia * state.omega[0] ** 2
                          + model.knee_rotor_inertia * state.omega[1] ** 2)
    else:
        kinetic = 0.5 * model.total_mass * float(np.dot(state.base_velocity, state.base_velocity))
    return kinetic + potential


def jump_energy(tau: np.ndarray, omega: np.ndarray, dt: float) -> float:
    """Positive joint work sum(max(tau * omega, 0)) * dt; regeneration is not credited.

    Raises:
        ValueError: If the traces differ in shape
    """
    tau = np.asarray(tau, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if tau.shape != omega.shape:
        raise ValueError(f"torque trace {tau.shape} and velocity trace {omega.shape} differ")
    if tau.size == 0:
        return 0.0
    return float(np.maximum(tau * omega, 0.0).sum() * dt)


class _TraceRecorder:
    """Column-wise trace buffer."""

    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.columns: Dict[str, List] = {name: [] for name in TRACE_COLUMNS}
        self.reaction: List[np.ndarray] = []
        self.energy: List[float] = []

    def record(self, state: SimState, tau, l, alpha, f_x, f_z, reaction, model: RobotModel) -> None:
        if not self.enabled:
            return
        row = (state.t, state.base[1], state.theta[0], state.theta[1], state.omega[0],
               state.omega[1], tau[0], tau[1], l, alpha, f_x, f_z, state.phase.value)
        for name, value in zip(TRACE_COLUMNS, row):
            self.columns[name].append(value if name == "phase" else float(value))
        self.reaction.append(np.asarray(reaction, dtype=float))
        self.energy.append(mechanical_energy(state, model))

    def arrays(self) -> Tuple[Dict[str, np.ndarray], np.ndarray, np.ndarray]:
        trace = {name: np.array(values) for name, values in self.columns.items()}
        reaction = np.array(self.reaction).reshape(-1, 2)
        return trace, reaction, np.array(self.energy)


def initial_state(model: RobotModel, config: SimConfig) -> SimState:
    """Foot on the ground directly under the base, everything at rest."""
    theta = inverse_kinematics(0.0, -config.h0, model)
    return SimState(
        phase=Phase.STANCE,
        t=0.0,
        base=np.array([config.x0, config.h0]),
        base_velocity=np.zeros(2),
        theta=theta,
        omega=np.zeros(2),
        anchor=np.array([config.x0, 0.0]),
    )


def _lock_joints(state: SimState, model: RobotModel) -> SimState:
    """Lock the knee and hip at liftoff; linear momentum is conserved."""
    nxt = state.copy()
    nxt.base_velocity = center_of_mass_velocity(state, model)
    nxt.omega = np.zeros(2)
    nxt.phase = Phase.FLIGHT
    nxt.anchor = None
    return nxt


def rollout(
    model: RobotModel,
    params: ControllerParams,
    config: Optional[SimConfig] = None,
) -> JumpResult:
    """Simulate one jump from rest.

    Torques act only in stance. Liftoff happens when the vertical ground
    reaction drops to zero, or when the knee reaches its lock angle while the
    robot still moves upward. Simulator failures end the run with a reason
    instead of raising.

    Raises:
        ValueError: If the start pose is unreachable or l0 does not exceed it
    """
    config = config or SimConfig()
    if params.l0 <= config.h0:
        raise ValueError(f"rest length l0={params.l0:.3f} m must exceed the initial leg length {config.h0} m")
    state = initial_state(model, config)

    recorder = _TraceRecorder(config.record_trace)
    stance_tau: List[np.ndarray] = []
    stance_omega: List[np.ndarray] = []
    max_height = config.h0
    reason: Optional[TerminationReason] = None
    detail = ""
    liftoff: Optional[SimState] = None
    knee_locked = False
    zero = np.zeros(2)

    for _ in range(int(round(config.max_sim_time / config.dt))):
        if state.phase == Phase.STANCE:
            theta2 = state.theta[1]
            if theta2 >= math.pi - config.knee_fold_margin or state.base[1] <= 0.0:
                reason, detail = TerminationReason.NO_LIFTOFF, "leg collapsed"
                break
            if config.knee_lock_angle > 0 and theta2 <= config.knee_lock_angle:
                knee_locked = True
                state = _lock_joints(state, model)
                if state.base_velocity[1] <= 0.0:
                    reason, detail = TerminationReason.NO_LIFTOFF, "knee locked without upward velocity"
                    break
                liftoff = state
                continue

            geo = leg_geometry(state.theta[0], theta2, model)
            if geo.singular:
                reason = TerminationReason.SINGULAR
                break
            l_dot, alpha_dot = leg_rates(geo, state.omega)
            f_x, f_z = vmc_wrench(geo.l, l_dot, geo.alpha, alpha_dot, params, model)
            tau = joint_torques(geo.J, f_x, f_z, model, clamp=config.clamp_torques)
            try:
                theta_ddot, reaction = stance_dynamics(state.theta, state.omega, tau, model)
            except np.linalg.LinAlgError:
                reason = TerminationReason.NUMERICAL_FAILURE
                break
            if reaction[1] <= 0.0:
                state = _lock_joints(state, model)
                liftoff = state
                continue

            # Rows pair a state with the wrench and torques computed from it
            recorder.record(state, tau, geo.l, geo.alpha, f_x, f_z, reaction, model)
            state = stance_step(state, tau, model, config, theta_ddot)
            stance_tau.append(tau)
            stance_omega.append(state.omega)
        else:
            state = flight_step(state, model, config)
            geo = leg_geometry(state.theta[0], state.theta[1], model)
            recorder.record(state, zero, geo.l, geo.alpha, 0.0, 0.0, zero, model)

        if not state.is_finite():
            reason = TerminationReason.NUMERICAL_FAILURE
            break
        max_height = max(max_height, state.base[1])

        if state.phase == Phase.FLIGHT:
            foot_z = state.base[1] + leg_geometry(state.theta[0], state.theta[1], model).foot[1]
            if config.stop_at_apex and state.base_velocity[1] <= 0.0:
                reason = TerminationReason.APEX
                break
            if foot_z <= 0.0 and state.base_velocity[1] < 0.0:
                state.phase = Phase.LANDED
                reason = TerminationReason.LANDED
                break

    if reason is None:
        reason = TerminationReason.TIMEOUT if liftoff is not None else TerminationReason.NO_LIFTOFF
        if liftoff is None:
            detail = "still in stance at the time limit"

    trace, reaction_trace, energy_trace = recorder.arrays()
    dt = config.dt
    energy = jump_energy(np.array(stance_tau).reshape(-1, 2), np.array(stance_omega).reshape(-1, 2), dt)

    if liftoff is None or reason == TerminationReason.NUMERICAL_FAILURE:
        apex = config.h0
    else:
        z_lo, vz_lo = liftoff.base[1], liftoff.base_velocity[1]
        apex = max(max_height, z_lo + max(vz_lo, 0.0) ** 2 / (2.0 * model.gravity))

    result = JumpResult(
        apex_height=float(apex),
        energy=energy,
        reason=reason,
        lifted_off=liftoff is not None,
        liftoff_time=None if liftoff is None else float(liftoff.t),
        liftoff_height=None if liftoff is None else float(liftoff.base[1]),
        liftoff_velocity=None if liftoff is None else (float(liftoff.base_velocity[0]),
                                                       float(liftoff.base_velocity[1])),
        knee_locked=knee_locked,
        detail=detail,
        trace=trace,
        reaction=reaction_trace,
        mechanical_energy=energy_trace,
    )
    logger.debug(f"rollout: h={result.apex_height:.4f} m, E={result.energy:.3f} J, {reason.value}")
    return result
