"""Planar hopping simulator with virtual spring-damper control."""

from .dynamics import (
    jump_energy,
    leg_geometry,
    mechanical_energy,
    rollout,
    vmc_wrench,
    joint_torques,
)

__all__ = [
    "jump_energy",
    "leg_geometry",
    "mechanical_energy",
    "rollout",
    "vmc_wrench",
    "joint_torques",
]
