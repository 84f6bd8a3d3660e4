"""
Data models for gfrac.

All models are Pydantic v2 models. Parameter models are frozen so they can be
shared between threads and used as cache keys.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator


class Side(str, Enum):
    """Side of a fractional operator: integrate over [a, x] (left) or [x, b] (right)."""

    LEFT = "left"
    RIGHT = "right"


class OperatorParams(BaseModel):
    """
    Parameters shared by every operator family.

    Attributes:
        alpha: Order of the operator (> 0)
        rho: Generalization parameter (> 0); rho = 1 is Riemann-Liouville,
             rho -> 0+ is Hadamard
        a: Left endpoint (>= 0)
        b: Right endpoint (finite, > a)
        side: Left or right sided operator

    The integer n = ceil(alpha) is derived, never stored.
    """

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=0)
    rho: float = Field(default=1.0, gt=0)
    a: float = Field(default=0.0, ge=0)
    b: float
    side: Side = Side.LEFT

    @field_validator("b")
    @classmethod
    def validate_finite_b(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("Liouville-type operators (b = inf) are not supported; b must be finite")
        return v

    @model_validator(mode="after")
    def validate_interval(self) -> "OperatorParams":
        if not self.b > self.a:
            raise ValueError(f"interval requires a < b, got a={self.a}, b={self.b}")
        return self

    @property
    def n(self) -> int:
        return math.ceil(self.alpha)


class EKParams(BaseModel):
    """Erdelyi-Kober parameters: the shared operator parameters plus the shift eta."""

    model_config = ConfigDict(frozen=True)

    base: OperatorParams
    eta: float = 0.0


class QuadratureConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    rel_tol: float = Field(default=1e-10, gt=0)
    abs_tol: float = Field(default=1e-12, gt=0)
    max_levels: int = Field(default=12, ge=1)
    base_nodes: int = Field(default=32, ge=1)


class DiffConfig(BaseModel):
    """Step (in the chart variable y) and tableau depth for Richardson differences."""

    model_config = ConfigDict(frozen=True)

    initial_step: float = Field(default=1e-2, gt=0)
    richardson_levels: int = Field(default=4, ge=2)


class EvalResult(BaseModel):
    """
    A numeric value with an a-posteriori error estimate.

    Attributes:
        value: The computed value
        error_estimate: Difference-based estimate of the absolute error
        levels_used: Refinement levels (quadrature) or tableau rows (differences)
    """

    model_config = ConfigDict(frozen=True)

    value: float
    error_estimate: float = Field(ge=0)
    levels_used: int = 0


class PowerTerm(BaseModel):
    """Symbolic monomial x -> coefficient * x**exponent."""

    model_config = ConfigDict(frozen=True)

    coefficient: float
    exponent: float

    @field_validator("coefficient")
    @classmethod
    def validate_finite_coefficient(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("power term coefficient must be finite")
        return v

    def evaluate(self, x: float) -> float:
        if self.coefficient == 0.0:
            return 0.0
        return self.coefficient * x ** self.exponent


class Report(BaseModel):
    """
    Residual table produced by one verification run.

    ``passed`` (serialized as ``pass``) is derived from the residuals:
    every residual within tolerance for the ``max`` criterion, or strictly
    decreasing residuals ending within tolerance for ``monotone``.
    """

    model_config = ConfigDict(populate_by_name=True)

    identity_name: str
    grid: List[float]
    residuals: List[float]
    tolerance: float
    params_echo: Dict[str, Any] = Field(default_factory=dict, serialization_alias="params")
    criterion: Literal["max", "monotone"] = "max"
    diagnostic: Optional[str] = None

    @model_validator(mode="after")
    def validate_lengths(self) -> "Report":
        if len(self.residuals) != len(self.grid):
            raise ValueError(
                f"residuals ({len(self.residuals)}) and grid ({len(self.grid)}) differ in length"
            )
        return self

    @computed_field(alias="pass")
    @property
    def passed(self) -> bool:
        if self.criterion == "monotone":
            decreasing = all(later < earlier for earlier, later in zip(self.residuals, self.residuals[1:]))
            return bool(self.residuals) and decreasing and self.residuals[-1] <= self.tolerance
        return all(r <= self.tolerance for r in self.residuals)

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True)


class SweepOperator(str, Enum):
    GFD = "gfd"
    GFI = "gfi"
    RL = "rl"
    HADAMARD = "hadamard"
    EK = "ek"
    CAPUTO = "caputo"


class XGrid(BaseModel):
    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float
    count: int = Field(ge=2)

    @model_validator(mode="after")
    def validate_bounds(self) -> "XGrid":
        if not self.lo < self.hi:
            raise ValueError(f"x grid requires lo < hi, got lo={self.lo}, hi={self.hi}")
        return self


class SweepSpec(BaseModel):
    """
    Parameter grid for the ``sweep`` command: f = x**nu for every nu,
    evaluated for every (alpha, rho) at every x of the grid.
    """

    model_config = ConfigDict(frozen=True)

    alphas: List[float] = Field(min_length=1)
    rhos: List[float] = Field(min_length=1)
    nus: List[float] = Field(min_length=1)
    x_grid: XGrid
    operator: SweepOperator = SweepOperator.GFD
    a: float = Field(default=0.0, ge=0)
    b: Optional[float] = None
    eta: float = 0.0


class VerifyConfig(BaseModel):
    """Overrides accepted by the ``verify`` command (JSON file and flags)."""

    model_config = ConfigDict(frozen=True)

    a: float = Field(default=0.5, gt=0)
    b: float = 2.0
    grid: Optional[List[float]] = None
    grid_count: int = Field(default=8, ge=1)
    tol: Optional[float] = Field(default=None, ge=0)
    tol_integral: float = Field(default=1e-8, ge=0)
    tol_derivative: float = Field(default=1e-5, ge=0)
    rho_sequence: List[float] = Field(default_factory=lambda: [0.1, 0.01, 0.001], min_length=1)

    @model_validator(mode="after")
    def validate_interval(self) -> "VerifyConfig":
        if not self.b > self.a:
            raise ValueError(f"verification interval requires a < b, got a={self.a}, b={self.b}")
        return self
