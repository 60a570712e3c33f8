"""Planetary gearbox constraints, actuator mass models and the Stage-1 catalog."""

from .gearbox import gear_ratio, validate
from .mass_models import InfeasibleGearTrainError, actuator_mass, link_mass, make_actuator
from .stage1 import CatalogBuilder, NoFeasibleActuatorError, build_catalog, lookup

__all__ = [
    "gear_ratio",
    "validate",
    "InfeasibleGearTrainError",
    "actuator_mass",
    "link_mass",
    "make_actuator",
    "CatalogBuilder",
    "NoFeasibleActuatorError",
    "build_catalog",
    "lookup",
]
