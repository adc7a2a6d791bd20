"""Request/response bodies for the HTTP service.

Tensors travel as {"dims": [..], "elems": [..]} with elements in flatten
order, matching the file format; eval results carry booleans, everything
else reals. Endpoints taking a formula accept either inline text or the
handle of a previously registered formula, never both.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class TensorModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dims: list[int]
    elems: list[bool | float]


class TrajectoryModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    positions: list[tuple[float, float]]
    velocities: list[tuple[float, float]] | None = None
    dt: float = 1.0
    fixed_endpoints: bool = True


class FormulaIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    formula: str


class FormulaOut(BaseModel):
    handle: str
    formula: str  # canonical printed form


class _FormulaRef(BaseModel):
    """Base for bodies that name a formula inline or by handle."""

    model_config = ConfigDict(extra="forbid")

    formula: str | None = None
    handle: str | None = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.formula is None) == (self.handle is None):
            raise ValueError("provide exactly one of formula, handle")
        return self


class EvalIn(_FormulaRef):
    trace: TensorModel
    t: int = Field(default=0, ge=0)


class EvalOut(BaseModel):
    result: TensorModel


class LossIn(_FormulaRef):
    trace: TensorModel
    t: int = Field(default=0, ge=0)
    gamma: float = 0.005
    kernel: Literal["stable", "naive"] = "stable"


class LossOut(BaseModel):
    value: TensorModel


class GradOut(BaseModel):
    grad: TensorModel


class LossAndGradOut(BaseModel):
    value: TensorModel
    grad: TensorModel


class GradCheckIn(_FormulaRef):
    trace: TensorModel
    t: int = Field(default=0, ge=0)
    gamma: float = 0.005
    tolerance: float = Field(default=1e-4, gt=0)
    corrupt_index: int | None = None  # test hook, offsets one analytic entry


class GradCheckOut(BaseModel):
    passed: bool
    checked: int
    tolerance: float
    max_abs_err: float
    max_rel_err: float
    worst_index: list[int]
    worst_analytic: float
    worst_numeric: float


class OptimizeIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    formula: str
    trajectory: TrajectoryModel
    gamma: float = 0.005
    ltlf_weight: float = 1.0
    dynamical_weight: float = 0.0
    steps: int = Field(default=500, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0)
    momentum: float = Field(default=0.0, ge=0, lt=1)


class HistoryRow(BaseModel):
    step: int
    total: float
    ltlf: float
    dynamical: float


class OptimizeOut(BaseModel):
    trajectory: TrajectoryModel
    history: list[HistoryRow]


class ExperimentIn(BaseModel):
    """Preset overrides; unset fields keep the preset's values."""

    model_config = ConfigDict(extra="forbid")

    seed: int = 0
    steps: int | None = Field(default=None, ge=1)
    learning_rate: float | None = Field(default=None, gt=0)
    gamma: float | None = Field(default=None, gt=0)
    ltlf_weight: float | None = Field(default=None, gt=0)
    noise: float | None = None
    n: int | None = Field(default=None, ge=2)


class ExperimentOut(BaseModel):
    name: str
    config: dict
    verdict: dict
    trajectory: TrajectoryModel
    history: list[HistoryRow]


class SelftestIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    instances: int = Field(default=25, ge=1, le=500)
    seed: int = 0


class CheckRow(BaseModel):
    name: str
    passed: bool
    detail: str


class SelftestOut(BaseModel):
    passed: bool
    checks: list[CheckRow]


class ErrorDetail(BaseModel):
    code: str
    message: str


class ErrorEnvelope(BaseModel):
    error: ErrorDetail
