"""HTTP wrapper around the engine.

Every numeric path routes straight into the library; the service adds only
formula handles, JSON marshalling, and a uniform error envelope

    {"error": {"code": "parse" | "shape" | "bounds" | "data" | "divergence"
               | "unknown_handle", "message": ...}}

with status 400 for domain errors and 404 for unknown handles. Formulas can
be sent inline per call or registered once via POST /formulas and referred
to by handle. The registry is the only mutable state and is lock-guarded;
all evaluation is pure, so requests are safe to issue concurrently.

Run with: uvicorn softltlf.service:app
"""

from __future__ import annotations

import itertools
import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .errors import (
    BoundsError,
    DataError,
    DivergenceError,
    ParseError,
    ShapeError,
    SoftLtlfError,
)
from .formula import Constraint
from .loss import dloss, gradient_check, loss, loss_and_grad
from .schemas import (
    CheckRow,
    EvalIn,
    EvalOut,
    ExperimentIn,
    ExperimentOut,
    FormulaIn,
    FormulaOut,
    GradCheckIn,
    GradCheckOut,
    GradOut,
    HistoryRow,
    LossAndGradOut,
    LossIn,
    LossOut,
    OptimizeIn,
    OptimizeOut,
    SelftestIn,
    SelftestOut,
    TensorModel,
    TrajectoryModel,
)
from .selftest import run_selftest
from .semantics import TraceBatch, evaluate
from .smoothing import Gamma
from .surface import TraceMeta, lower, narrow_gradient, parse, print_formula, widen_trace
from .tensor import Tensor
from .trajectory import MixedLossSpec, Trajectory, optimize, run_experiment


class ServiceError(Exception):
    """Carries an HTTP status and error code to the envelope handler."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class FormulaRegistry:
    def __init__(self) -> None:
        self._formulas: dict[str, Constraint] = {}
        self._ids = itertools.count(1)
        self._lock = threading.Lock()

    def add(self, rho: Constraint) -> str:
        with self._lock:
            handle = f"f{next(self._ids)}"
            self._formulas[handle] = rho
            return handle

    def get(self, handle: str) -> Constraint:
        with self._lock:
            try:
                return self._formulas[handle]
            except KeyError:
                raise ServiceError(
                    404, "unknown_handle", f"no formula registered as {handle!r}"
                ) from None

    def remove(self, handle: str) -> None:
        with self._lock:
            if self._formulas.pop(handle, None) is None:
                raise ServiceError(
                    404, "unknown_handle", f"no formula registered as {handle!r}"
                )


def _error_code(exc: SoftLtlfError) -> str:
    if isinstance(exc, ParseError):
        return "parse"
    if isinstance(exc, DivergenceError):
        return "divergence"
    if isinstance(exc, ShapeError):
        return "shape"
    if isinstance(exc, BoundsError):
        return "bounds"
    return "data"


def _tensor_out(t: Tensor) -> TensorModel:
    return TensorModel(dims=list(t.dims), elems=list(t.elems))


def _tensor_in(m: TensorModel) -> Tensor:
    return Tensor(tuple(m.dims), tuple(m.elems))


def _trajectory_in(m: TrajectoryModel) -> Trajectory:
    return Trajectory(
        tuple((x, y) for x, y in m.positions),
        tuple((x, y) for x, y in m.velocities) if m.velocities is not None else None,
        m.dt,
        m.fixed_endpoints,
    )


def _trajectory_out(traj: Trajectory) -> TrajectoryModel:
    return TrajectoryModel(
        positions=[list(p) for p in traj.positions],
        velocities=(
            [list(v) for v in traj.velocities] if traj.velocities is not None else None
        ),
        dt=traj.dt,
        fixed_endpoints=traj.fixed_endpoints,
    )


def _history_out(history) -> list[HistoryRow]:
    return [
        HistoryRow(step=step, total=total, ltlf=ltlf, dynamical=dyn)
        for step, total, ltlf, dyn in history
    ]


def create_app() -> FastAPI:
    app = FastAPI(title="softltlf", version=__version__)
    registry = FormulaRegistry()

    @app.exception_handler(ServiceError)
    async def _service_error(_: Request, exc: ServiceError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.exception_handler(SoftLtlfError)
    async def _domain_error(_: Request, exc: SoftLtlfError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"error": {"code": _error_code(exc), "message": str(exc)}},
        )

    @app.exception_handler(OverflowError)
    async def _overflow(_: Request, exc: OverflowError) -> JSONResponse:
        # only the naive kernels can get here; the stable forms never overflow
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "divergence", "message": f"kernel overflow: {exc}"}},
        )

    def resolve(body) -> Constraint:
        if body.handle is not None:
            return registry.get(body.handle)
        return parse(body.formula)

    def lowered(body) -> tuple[Constraint, TraceBatch, TraceBatch, object]:
        """Parse, lower against the trace width, and widen the trace."""
        rho = resolve(body)
        raw = TraceBatch(_tensor_in(body.trace))
        core, plan = lower(rho, TraceMeta(feature_count=raw.feature_count))
        return core, raw, widen_trace(raw, plan), plan

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/formulas", response_model=FormulaOut, status_code=201)
    def register_formula(body: FormulaIn) -> FormulaOut:
        rho = parse(body.formula)
        return FormulaOut(handle=registry.add(rho), formula=print_formula(rho))

    @app.delete("/formulas/{handle}", status_code=204)
    def delete_formula(handle: str) -> None:
        registry.remove(handle)

    @app.post("/eval", response_model=EvalOut)
    def eval_formula(body: EvalIn) -> EvalOut:
        core, _, wide, _ = lowered(body)
        return EvalOut(result=_tensor_out(evaluate(core, wide, body.t)))

    @app.post("/loss", response_model=LossOut)
    def loss_value(body: LossIn) -> LossOut:
        core, _, wide, _ = lowered(body)
        gamma = Gamma(body.gamma, kernel_mode=body.kernel)
        return LossOut(value=_tensor_out(loss(core, wide, body.t, gamma)))

    @app.post("/grad", response_model=GradOut)
    def grad_value(body: LossIn) -> GradOut:
        core, raw, wide, plan = lowered(body)
        gamma = Gamma(body.gamma, kernel_mode=body.kernel)
        grad = narrow_gradient(dloss(core, wide, body.t, gamma), plan, raw.feature_count)
        return GradOut(grad=_tensor_out(grad))

    @app.post("/loss_and_grad", response_model=LossAndGradOut)
    def loss_and_grad_value(body: LossIn) -> LossAndGradOut:
        core, raw, wide, plan = lowered(body)
        gamma = Gamma(body.gamma, kernel_mode=body.kernel)
        result = loss_and_grad(core, wide, body.t, gamma)
        grad = narrow_gradient(result.grad, plan, raw.feature_count)
        return LossAndGradOut(value=_tensor_out(result.value), grad=_tensor_out(grad))

    @app.post("/gradcheck", response_model=GradCheckOut)
    def gradcheck(body: GradCheckIn) -> GradCheckOut:
        # checked at the engine level: indices refer to the lowered trace,
        # which appends one column per distinct constant in the formula
        core, _, wide, _ = lowered(body)
        report = gradient_check(
            core,
            wide,
            body.t,
            Gamma(body.gamma),
            tolerance=body.tolerance,
            corrupt_index=body.corrupt_index,
        )
        return GradCheckOut(
            passed=report.passed,
            checked=report.checked,
            tolerance=report.tolerance,
            max_abs_err=report.max_abs_err,
            max_rel_err=report.max_rel_err,
            worst_index=list(report.worst_index),
            worst_analytic=report.worst_analytic,
            worst_numeric=report.worst_numeric,
        )

    @app.post("/experiments/{name}", response_model=ExperimentOut)
    def experiment(name: str, body: ExperimentIn) -> ExperimentOut:
        overrides = {
            field: value
            for field, value in (
                ("steps", body.steps),
                ("learning_rate", body.learning_rate),
                ("gamma", body.gamma),
                ("ltlf_weight", body.ltlf_weight),
                ("noise", body.noise),
                ("n", body.n),
            )
            if value is not None
        }
        run = run_experiment(name, seed=body.seed, **overrides)
        return ExperimentOut(
            name=run.name,
            config=run.config,
            verdict=run.verdict,
            trajectory=_trajectory_out(run.trajectory),
            history=_history_out(run.history),
        )

    @app.post("/optimize", response_model=OptimizeOut)
    def optimize_trajectory(body: OptimizeIn) -> OptimizeOut:
        mixed = MixedLossSpec(
            ltlf_weight=body.ltlf_weight,
            dynamical_weight=body.dynamical_weight,
            gamma=Gamma(body.gamma),
        )
        result = optimize(
            _trajectory_in(body.trajectory),
            body.formula,
            mixed,
            steps=body.steps,
            learning_rate=body.learning_rate,
            momentum=body.momentum,
        )
        return OptimizeOut(
            trajectory=_trajectory_out(result.trajectory),
            history=_history_out(result.history),
        )

    @app.post("/selftest", response_model=SelftestOut)
    def selftest(body: SelftestIn) -> SelftestOut:
        checks = run_selftest(instances=body.instances, seed=body.seed)
        return SelftestOut(
            passed=all(c.passed for c in checks),
            checks=[
                CheckRow(name=c.name, passed=c.passed, detail=c.detail) for c in checks
            ],
        )

    return app


app = create_app()
