"""Data models for the monoped co-design toolkit."""

from .gearing import (
    GearboxKind,
    GearTrain,
    MotorSpec,
    GearboxBounds,
    ConstraintReport,
)
from .actuator import (
    MaterialTable,
    ActuatorGeometry,
    LinkMassParams,
    ActuatorDimensions,
    MassBreakdown,
    ActuatorDesign,
    RatioBin,
    RatioGrid,
    CatalogBin,
    ActuatorCatalog,
)
from .robot import (
    RobotModel,
    ControllerParams,
    SimConfig,
    SimState,
    JumpResult,
    Phase,
    TerminationReason,
)
from .design import (
    CodesignVariables,
    CodesignBounds,
    CostConfig,
    CaseSpec,
    CmaesSettings,
)
from .manifest import DesignManifest

__all__ = [
    "GearboxKind",
    "GearTrain",
    "MotorSpec",
    "GearboxBounds",
    "ConstraintReport",
    "MaterialTable",
    "ActuatorGeometry",
    "LinkMassParams",
    "ActuatorDimensions",
    "MassBreakdown",
    "ActuatorDesign",
    "RatioBin",
    "RatioGrid",
    "CatalogBin",
    "ActuatorCatalog",
    "RobotModel",
    "ControllerParams",
    "SimConfig",
    "SimState",
    "JumpResult",
    "Phase",
    "TerminationReason",
    "CodesignVariables",
    "CodesignBounds",
    "CostConfig",
    "CaseSpec",
    "CmaesSettings",
    "DesignManifest",
]
