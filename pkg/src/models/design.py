"""Data models for the Stage-2 co-design problem."""

from typing import ClassVar, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator


VARIABLE_NAMES: Tuple[str, ...] = ("l1", "l2", "g_k", "g_h", "K", "C", "T")

CASE_NAMES = ("nominal", "nominal-eval", "a", "b", "c", "custom")


class CodesignVariables(BaseModel):
    """The 7-D design point Y = [l1, l2, g_k, g_h, K, C, T]."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    l1: float  # m
    l2: float  # m
    g_k: float
    g_h: float
    K: float  # N/m
    C: float  # N·s/m
    T: float  # N·m/rad

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in VARIABLE_NAMES], dtype=float)

    @classmethod
    def from_array(cls, values) -> "CodesignVariables":
        values = [float(v) for v in values]
        if len(values) != len(VARIABLE_NAMES):
            raise ValueError(f"expected {len(VARIABLE_NAMES)} values, got {len(values)}")
        return cls(**dict(zip(VARIABLE_NAMES, values)))

    @classmethod
    def nominal(cls) -> "CodesignVariables":
        return cls(l1=0.4, l2=0.4, g_k=6.0, g_h=6.0, K=50.0, C=2.5, T=10.0)


class CodesignBounds(BaseModel):
    """Box bounds on every co-design variable."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    l_min: PositiveFloat = 0.3
    l_max: PositiveFloat = 0.5
    g_min: PositiveFloat = 4.0
    g_max: PositiveFloat = 8.7
    K_min: float = Field(default=5.0, ge=0.0)
    K_max: float = 200.0
    C_min: float = Field(default=0.0, ge=0.0)
    C_max: float = 10.0
    T_min: float = Field(default=0.0, ge=0.0)
    T_max: float = 50.0

    @model_validator(mode="after")
    def _check_order(self) -> "CodesignBounds":
        for name in ("l", "g", "K", "C", "T"):
            lo, hi = getattr(self, f"{name}_min"), getattr(self, f"{name}_max")
            if not lo < hi:
                raise ValueError(f"{name}_min ({lo}) must be below {name}_max ({hi})")
        return self

    def lower(self) -> np.ndarray:
        return np.array([self.l_min, self.l_min, self.g_min, self.g_min,
                         self.K_min, self.C_min, self.T_min])

    def upper(self) -> np.ndarray:
        return np.array([self.l_max, self.l_max, self.g_max, self.g_max,
                         self.K_max, self.C_max, self.T_max])

    def violations(self, y: CodesignVariables) -> List[str]:
        """Names of the variables outside their bounds."""
        values = y.to_array()
        lo, hi = self.lower(), self.upper()
        return [name for name, v, a, b in zip(VARIABLE_NAMES, values, lo, hi)
                if not a <= v <= b]


class CostConfig(BaseModel):
    """Weights of the combined height/energy cost."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    lambda1: float = Field(default=1.0, ge=0.0)
    lambda2: float = Field(default=1.0, ge=0.0)
    K_h: PositiveFloat = 30.0  # J
    infeasible_penalty: PositiveFloat = 300.0

    @model_validator(mode="after")
    def _check_weights(self) -> "CostConfig":
        if self.lambda1 == 0 and self.lambda2 == 0:
            raise ValueError("lambda1 and lambda2 cannot both be zero")
        return self


class CaseSpec(BaseModel):
    """Which co-design variables are frozen, and at what values.

    Presets: ``nominal`` (alias ``nominal-eval``) freezes everything at the
    nominal point; ``a`` frees gear ratios and gains; ``b`` frees link lengths
    and gains; ``c`` frees all seven; ``custom`` takes ``frozen`` as given.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    PRESET_FROZEN: ClassVar[Dict[str, Tuple[str, ...]]] = {
        "nominal": VARIABLE_NAMES,
        "nominal-eval": VARIABLE_NAMES,
        "a": ("l1", "l2"),
        "b": ("g_k", "g_h"),
        "c": (),
    }

    name: str = "c"
    frozen: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_case(self) -> "CaseSpec":
        if self.name not in CASE_NAMES:
            raise ValueError(f"unknown case '{self.name}', expected one of {', '.join(CASE_NAMES)}")
        unknown = sorted(set(self.frozen) - set(VARIABLE_NAMES))
        if unknown:
            raise ValueError(f"unknown frozen variables: {', '.join(unknown)}")
        return self

    @classmethod
    def preset(cls, name: str, nominal: Optional[CodesignVariables] = None) -> "CaseSpec":
        """Build a preset case with frozen values taken from the nominal point."""
        if name == "custom":
            raise ValueError("the custom case needs explicit frozen values")
        if name not in cls.PRESET_FROZEN:
            raise ValueError(f"unknown case '{name}'")
        nominal = nominal or CodesignVariables.nominal()
        return cls(name=name, frozen={v: getattr(nominal, v) for v in cls.PRESET_FROZEN[name]})

    def resolved(self, nominal: Optional[CodesignVariables] = None) -> "CaseSpec":
        """Presets get their frozen values filled in; custom cases are returned as is."""
        if self.name == "custom":
            return self
        return self.preset(self.name, nominal)

    @property
    def free(self) -> List[str]:
        return [name for name in VARIABLE_NAMES if name not in self.frozen]

    @property
    def is_evaluation_only(self) -> bool:
        return not self.free


class CmaesSettings(BaseModel):
    """Optimizer settings for the co-design run."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    population: Optional[PositiveInt] = 16
    sigma0: PositiveFloat = 0.3  # in normalized [0, 1] coordinates
    max_generations: PositiveInt = 150
    target_cost: Optional[float] = None
    resample_limit: int = Field(default=10, ge=0)
