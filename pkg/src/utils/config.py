"""Configuration management."""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError

from ..models.actuator import ActuatorGeometry, LinkMassParams, MaterialTable, RatioGrid
from ..models.design import CaseSpec, CmaesSettings, CodesignBounds, CostConfig
from ..models.gearing import GearboxBounds, MotorSpec
from ..models.robot import GRAVITY, SimConfig


class ConfigError(ValueError):
    """Invalid configuration; the message lists every offending field path."""

    def __init__(self, message: str, fields: Optional[Iterable[str]] = None):
        super().__init__(message)
        self.fields = list(fields or [])


class RobotConfigModel(BaseModel):
    """Plant parameters that are not design variables."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    base_mass: float = Field(default=1.5, ge=0.0)  # kg
    gravity: PositiveFloat = GRAVITY
    reflect_rotor_inertia: bool = True


class ControllerConfigModel(BaseModel):
    """Controller settings that are not optimized."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    rest_length_factor: float = Field(default=0.9, gt=0.0, le=1.0)  # l0 = factor * (l1 + l2)
    alpha0: float = 0.0
    torsional_damping: float = Field(default=0.0, ge=0.0)


class LoggingConfigModel(BaseModel):
    """Logging configuration."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    level: str = "INFO"
    file: Optional[str] = None
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class RunConfig(BaseModel):
    """Main configuration model."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    motor: MotorSpec = Field(default_factory=MotorSpec)
    materials: MaterialTable = Field(default_factory=MaterialTable)
    actuator_geometry: ActuatorGeometry = Field(default_factory=ActuatorGeometry)
    link_mass: LinkMassParams = Field(default_factory=LinkMassParams)
    gearbox_bounds: GearboxBounds = Field(default_factory=GearboxBounds)
    ratio_grid: RatioGrid = Field(default_factory=RatioGrid)
    robot: RobotConfigModel = Field(default_factory=RobotConfigModel)
    controller: ControllerConfigModel = Field(default_factory=ControllerConfigModel)
    sim: SimConfig = Field(default_factory=SimConfig)
    codesign_bounds: CodesignBounds = Field(default_factory=CodesignBounds)
    cost: CostConfig = Field(default_factory=CostConfig)
    case: CaseSpec = Field(default_factory=CaseSpec)
    cmaes: CmaesSettings = Field(default_factory=CmaesSettings)
    seed: int = Field(default=0, ge=0)
    output_dir: str = "./output"
    jobs: Optional[PositiveInt] = None
    logging: LoggingConfigModel = Field(default_factory=LoggingConfigModel)

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Copy with CLI overrides applied; ``None`` values are ignored."""
        updates = {k: v for k, v in overrides.items() if v is not None}
        if not updates:
            return self
        return RunConfig.model_validate({**self.model_dump(), **updates})


# Sections that do not change any computed result
_NON_RESULT_SECTIONS = {"output_dir", "jobs", "logging"}

STAGE1_SECTIONS = ("motor", "materials", "actuator_geometry", "gearbox_bounds", "ratio_grid")


def format_validation_error(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"  {path}: {item['msg']}")
    return "\n".join(lines)


def load_config(config_path: Optional[str] = None) -> RunConfig:
    """Load configuration from a YAML or JSON file.

    Args:
        config_path: Path to configuration file; ``None`` gives the defaults

    Returns:
        RunConfig: Loaded configuration

    Raises:
        FileNotFoundError: If config file doesn't exist
        ConfigError: If config is invalid
    """
    if config_path is None:
        return RunConfig()

    config_file = Path(config_path)
    if not config_file.exists():
        raise FileNotFoundError(
            f"Configuration file not found: {config_path}\n"
            f"Copy config.example.json and customize it, or omit --config for defaults."
        )

    try:
        with open(config_file, "r") as f:
            raw_config = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"Could not parse {config_path}: {e}")

    if raw_config is None:
        raw_config = {}
    if not isinstance(raw_config, dict):
        raise ConfigError(f"{config_path} must contain a mapping at the top level")

    try:
        return RunConfig.model_validate(raw_config)
    except ValidationError as e:
        fields = [".".join(str(p) for p in item["loc"]) for item in e.errors()]
        raise ConfigError(f"Invalid configuration in {config_path}:\n{format_validation_error(e)}",
                          fields=fields)


def _digest(payload: Dict[str, Any]) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def config_digest(config: RunConfig) -> str:
    """SHA-256 of the canonical JSON form of every result-affecting section."""
    payload = config.model_dump(mode="json", exclude=_NON_RESULT_SECTIONS)
    return _digest(payload)


def stage1_cache_key(config: RunConfig, kinds: Iterable[str]) -> str:
    """Key identifying a Stage-1 catalog; changes whenever the catalog could change."""
    payload = config.model_dump(mode="json", include=set(STAGE1_SECTIONS))
    payload["kinds"] = sorted(kinds)
    return _digest(payload)
