"""Gradient-descent lab for planar trajectories under temporal constraints.

A trajectory is a list of N points (optionally paired with N-1 velocity
samples, one per consecutive step). Formulas never see it directly: a
feature-derivation plan turns it into a trace whose columns are coordinates,
finite-difference speed and acceleration magnitudes, distances to fixed
points, velocity components, and comparison constants. The lab descends on

    total = dynamical_weight * D + ltlf_weight * L

where D is half the squared residual of the linear consistency system
(x_t - x_{t-1} = vx_t * dt per axis, plus four endpoint rows) and L is the
smooth constraint loss pulled back through the feature derivation by the
Jacobian transpose.

Derivative channels are undefined at the first step (speed) or first two
steps (accel); those entries repeat the earliest defined value so every
channel has length N, and their gradient flows into the same source points.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from random import Random

from .channels import (
    AccelChannel,
    ChannelSpec,
    ConstantChannel,
    CoordinateChannel,
    DistanceChannel,
    FeatureDerivationPlan,
    SpeedChannel,
    VelocityChannel,
)
from .errors import DataError, DivergenceError
from .formula import And, Always, Atom, Constraint, children
from .loss import loss, loss_and_grad
from .semantics import TraceBatch, evaluate_counted
from .smoothing import Gamma, as_gamma
from .surface import TrajectoryMeta, lower, parse, print_formula
from .tensor import Tensor

Point = tuple[float, float]


@dataclass(frozen=True)
class Trajectory:
    positions: tuple[Point, ...]
    velocities: tuple[Point, ...] | None = None
    dt: float = 1.0
    fixed_endpoints: bool = True

    def __post_init__(self) -> None:
        n = len(self.positions)
        if n < 2:
            raise DataError(f"a trajectory needs at least 2 points, got {n}")
        if self.velocities is not None and len(self.velocities) != n - 1:
            raise DataError(
                f"{n} points take {n - 1} velocity samples, got {len(self.velocities)}"
            )
        if self.dt <= 0:
            raise DataError(f"dt must be positive, got {self.dt}")

    @property
    def point_count(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class TrajectoryGradient:
    positions: tuple[Point, ...]
    velocities: tuple[Point, ...] | None = None


def straight_line(n: int, rng: Random | None = None, noise: float = 0.01,
                  with_velocities: bool = False, dt: float = 1.0) -> Trajectory:
    """Line from (0,0) to (1,1); interior points get uniform noise per coordinate."""
    positions = []
    for i in range(n):
        x = i / (n - 1)
        y = i / (n - 1)
        if rng is not None and 0 < i < n - 1:
            x += rng.uniform(-noise, noise)
            y += rng.uniform(-noise, noise)
        positions.append((x, y))
    velocities = None
    if with_velocities:
        velocities = tuple(
            ((positions[i][0] - positions[i - 1][0]) / dt,
             (positions[i][1] - positions[i - 1][1]) / dt)
            for i in range(1, n)
        )
    return Trajectory(tuple(positions), velocities, dt)


def random_trace(n: int, rng: Random, dt: float = 1.0,
                 velocity_scale: float = 0.05) -> Trajectory:
    positions = tuple((rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(n))
    velocities = tuple(
        (rng.uniform(-velocity_scale, velocity_scale),
         rng.uniform(-velocity_scale, velocity_scale))
        for _ in range(n - 1)
    )
    return Trajectory(positions, velocities, dt, fixed_endpoints=False)


def _channel_series(channel: ChannelSpec, traj: Trajectory) -> list[float]:
    n = traj.point_count
    pos = traj.positions
    if isinstance(channel, ConstantChannel):
        return [channel.value] * n
    if isinstance(channel, CoordinateChannel):
        return [p[channel.axis] for p in pos]
    if isinstance(channel, VelocityChannel):
        if traj.velocities is None:
            raise DataError("velocity channel requested but the trajectory has no velocities")
        series = [traj.velocities[t - 1][channel.axis] for t in range(1, n)]
        return [series[0]] + series
    if isinstance(channel, SpeedChannel):
        series = [
            math.hypot(pos[t][0] - pos[t - 1][0], pos[t][1] - pos[t - 1][1]) / traj.dt
            for t in range(1, n)
        ]
        return [series[0]] + series
    if isinstance(channel, AccelChannel):
        if n < 3:
            raise DataError(f"acceleration needs at least 3 points, got {n}")
        dt2 = traj.dt * traj.dt
        series = [
            math.hypot(
                pos[t][0] - 2 * pos[t - 1][0] + pos[t - 2][0],
                pos[t][1] - 2 * pos[t - 1][1] + pos[t - 2][1],
            ) / dt2
            for t in range(2, n)
        ]
        return [series[0], series[0]] + series
    if isinstance(channel, DistanceChannel):
        return [math.hypot(p[0] - channel.ox, p[1] - channel.oy) for p in pos]
    raise DataError(f"channel {channel.describe()!r} is not derivable from a trajectory")


def derive_features(traj: Trajectory, plan: FeatureDerivationPlan):
    """Trace of shape (N, channels) plus the Jacobian-transpose pullback."""
    if plan.identity:
        raise DataError("identity plan carries no trajectory channels")
    n = traj.point_count
    width = len(plan.channels)
    columns = [_channel_series(c, traj) for c in plan.channels]
    elems = tuple(columns[c][t] for t in range(n) for c in range(width))
    trace = TraceBatch(Tensor((n, width), elems))

    pos = traj.positions
    dt = traj.dt
    dt2 = dt * dt
    has_velocities = traj.velocities is not None

    def pullback(grad: Tensor) -> TrajectoryGradient:
        if grad.dims != (n, width):
            raise DataError(f"gradient shape {grad.dims} does not match trace ({n}, {width})")
        gp = [[0.0, 0.0] for _ in range(n)]
        gv = [[0.0, 0.0] for _ in range(n - 1)] if has_velocities else None
        for c, channel in enumerate(plan.channels):
            if isinstance(channel, ConstantChannel):
                continue
            for t in range(n):
                g = grad.elems[t * width + c]
                if g == 0.0:
                    continue
                if isinstance(channel, CoordinateChannel):
                    gp[t][channel.axis] += g
                elif isinstance(channel, DistanceChannel):
                    dx = pos[t][0] - channel.ox
                    dy = pos[t][1] - channel.oy
                    nrm = math.hypot(dx, dy)
                    if nrm > 0.0:
                        gp[t][0] += g * dx / nrm
                        gp[t][1] += g * dy / nrm
                elif isinstance(channel, VelocityChannel):
                    u = max(t, 1)
                    gv[u - 1][channel.axis] += g
                elif isinstance(channel, SpeedChannel):
                    u = max(t, 1)
                    dx = pos[u][0] - pos[u - 1][0]
                    dy = pos[u][1] - pos[u - 1][1]
                    nrm = math.hypot(dx, dy)
                    if nrm > 0.0:
                        cx = g * dx / (nrm * dt)
                        cy = g * dy / (nrm * dt)
                        gp[u][0] += cx
                        gp[u][1] += cy
                        gp[u - 1][0] -= cx
                        gp[u - 1][1] -= cy
                elif isinstance(channel, AccelChannel):
                    u = max(t, 2)
                    wx = pos[u][0] - 2 * pos[u - 1][0] + pos[u - 2][0]
                    wy = pos[u][1] - 2 * pos[u - 1][1] + pos[u - 2][1]
                    nrm = math.hypot(wx, wy)
                    if nrm > 0.0:
                        cx = g * wx / (nrm * dt2)
                        cy = g * wy / (nrm * dt2)
                        gp[u][0] += cx
                        gp[u][1] += cy
                        gp[u - 1][0] -= 2 * cx
                        gp[u - 1][1] -= 2 * cy
                        gp[u - 2][0] += cx
                        gp[u - 2][1] += cy
        return TrajectoryGradient(
            tuple((x, y) for x, y in gp),
            tuple((x, y) for x, y in gv) if gv is not None else None,
        )

    return trace, pullback


@dataclass(frozen=True)
class DynamicalSystem:
    """Linear consistency system: step equations plus four endpoint rows."""

    dt: float = 1.0
    start: Point = (0.0, 0.0)
    goal: Point = (1.0, 1.0)

    def residuals(self, traj: Trajectory) -> tuple[float, ...]:
        if traj.velocities is None:
            raise DataError("the dynamical system needs velocities")
        n = traj.point_count
        pos, vel = traj.positions, traj.velocities
        rows = []
        for t in range(1, n):
            rows.append(pos[t][0] - pos[t - 1][0] - vel[t - 1][0] * self.dt)
            rows.append(pos[t][1] - pos[t - 1][1] - vel[t - 1][1] * self.dt)
        rows.append(pos[0][0] - self.start[0])
        rows.append(pos[0][1] - self.start[1])
        rows.append(pos[n - 1][0] - self.goal[0])
        rows.append(pos[n - 1][1] - self.goal[1])
        return tuple(rows)


def dynamical_loss(traj: Trajectory, system: DynamicalSystem | None = None):
    """Half squared residual norm and its gradient (the transpose product)."""
    if system is None:
        system = DynamicalSystem(dt=traj.dt)
    if traj.velocities is None:
        raise DataError("the dynamical loss needs velocities")
    n = traj.point_count
    pos, vel = traj.positions, traj.velocities
    dt = system.dt
    gp = [[0.0, 0.0] for _ in range(n)]
    gv = [[0.0, 0.0] for _ in range(n - 1)]
    total = 0.0
    for t in range(1, n):
        for axis in range(2):
            r = pos[t][axis] - pos[t - 1][axis] - vel[t - 1][axis] * dt
            total += r * r
            gp[t][axis] += r
            gp[t - 1][axis] -= r
            gv[t - 1][axis] -= r * dt
    for axis in range(2):
        r0 = pos[0][axis] - system.start[axis]
        rn = pos[n - 1][axis] - system.goal[axis]
        total += r0 * r0 + rn * rn
        gp[0][axis] += r0
        gp[n - 1][axis] += rn
    grad = TrajectoryGradient(
        tuple((x, y) for x, y in gp), tuple((x, y) for x, y in gv)
    )
    return 0.5 * total, grad


@dataclass(frozen=True)
class MixedLossSpec:
    ltlf_weight: float = 1.0
    dynamical_weight: float = 0.0
    gamma: Gamma = Gamma(0.005)

    def __post_init__(self) -> None:
        if self.ltlf_weight <= 0:
            raise DataError(f"ltlf weight must be positive, got {self.ltlf_weight}")
        if self.dynamical_weight < 0:
            raise DataError(f"dynamical weight must be nonnegative, got {self.dynamical_weight}")


@dataclass(frozen=True)
class OptimizeResult:
    trajectory: Trajectory
    # rows of (step, total, ltlf, dynamical), loss of the iterate before its update
    history: tuple[tuple[int, float, float, float], ...]


def optimize(
    traj: Trajectory,
    formula: str | Constraint,
    mixed: MixedLossSpec,
    steps: int = 500,
    learning_rate: float = 1e-3,
    momentum: float = 0.0,
    system: DynamicalSystem | None = None,
) -> OptimizeResult:
    rho = parse(formula) if isinstance(formula, str) else formula
    core, plan = lower(rho, TrajectoryMeta(has_velocities=traj.velocities is not None))
    has_velocities = traj.velocities is not None
    if mixed.dynamical_weight > 0 and not has_velocities:
        raise DataError("dynamical weight set but the trajectory has no velocities")
    if system is None:
        system = DynamicalSystem(dt=traj.dt)

    n = traj.point_count
    positions = [list(p) for p in traj.positions]
    velocities = [list(v) for v in traj.velocities] if has_velocities else None
    mom_p = [[0.0, 0.0] for _ in range(n)]
    mom_v = [[0.0, 0.0] for _ in range(n - 1)] if has_velocities else None
    history = []

    for step in range(steps):
        current = Trajectory(
            tuple((x, y) for x, y in positions),
            tuple((x, y) for x, y in velocities) if velocities is not None else None,
            traj.dt,
            traj.fixed_endpoints,
        )
        trace, pullback = derive_features(current, plan)
        result = loss_and_grad(core, trace, 0, mixed.gamma)
        ltlf_value = result.value.elems[0]
        ltlf_grad = pullback(result.grad)

        dyn_value = 0.0
        dyn_grad = None
        if mixed.dynamical_weight > 0:
            dyn_value, dyn_grad = dynamical_loss(current, system)

        total = mixed.ltlf_weight * ltlf_value + mixed.dynamical_weight * dyn_value
        if not math.isfinite(total):
            raise DivergenceError(
                f"loss became non-finite at step {step}: "
                f"ltlf={ltlf_value!r} dynamical={dyn_value!r}"
            )
        history.append((step, total, ltlf_value, dyn_value))

        for t in range(n):
            if traj.fixed_endpoints and (t == 0 or t == n - 1):
                continue
            for axis in range(2):
                g = mixed.ltlf_weight * ltlf_grad.positions[t][axis]
                if dyn_grad is not None:
                    g += mixed.dynamical_weight * dyn_grad.positions[t][axis]
                mom_p[t][axis] = momentum * mom_p[t][axis] + g
                positions[t][axis] -= learning_rate * mom_p[t][axis]
        if velocities is not None:
            for t in range(n - 1):
                for axis in range(2):
                    g = 0.0
                    if ltlf_grad.velocities is not None:
                        g += mixed.ltlf_weight * ltlf_grad.velocities[t][axis]
                    if dyn_grad is not None:
                        g += mixed.dynamical_weight * dyn_grad.velocities[t][axis]
                    mom_v[t][axis] = momentum * mom_v[t][axis] + g
                    velocities[t][axis] -= learning_rate * mom_v[t][axis]

    final = Trajectory(
        tuple((x, y) for x, y in positions),
        tuple((x, y) for x, y in velocities) if velocities is not None else None,
        traj.dt,
        traj.fixed_endpoints,
    )
    return OptimizeResult(final, tuple(history))


# experiment presets


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    formula: str
    n: int = 50
    dt: float = 1.0
    gamma: float = 0.005
    ltlf_weight: float = 1.0
    dynamical_weight: float = 0.0
    steps: int = 500
    learning_rate: float = 1e-3
    momentum: float = 0.0
    init: str = "line"  # line | random
    noise: float = 0.01
    with_velocities: bool = False
    fixed_endpoints: bool = True
    count_law: bool = False


_LOOP = "F ((dist(0.4, 0.8) <= 0) && X (F (dist(0.2, 0.6) <= 0)))"
# each Eventually wraps the whole continuation, so the four visits are
# ordered and the naive evaluation cost grows as n^4
_NESTED = (
    "F ((dist(0.4, 0.8) <= 0)"
    " && X (F ((dist(0.2, 0.6) <= 0)"
    " && X (F ((dist(0.8, 0.4) <= 0)"
    " && X (F (dist(0.6, 0.2) <= 0)))))))"
)
_CONJOINED = (
    "(F ((dist(0.4, 0.8) <= 0) && X (F (dist(0.2, 0.6) <= 0))))"
    " && (F ((dist(0.8, 0.4) <= 0) && X (F (dist(0.6, 0.2) <= 0))))"
)

PRESETS: dict[str, ExperimentPreset] = {
    p.name: p
    for p in (
        ExperimentPreset(
            "avoid",
            "G ((0.1 <= dist(0.4, 0.4)) && (speed <= 0.15) && (accel <= 0.02))",
            momentum=0.9,
        ),
        ExperimentPreset(
            "patrol",
            "(F (dist(0.2, 0.4) <= 0)) && (F (dist(0.85, 0.6) <= 0))",
            momentum=0.9,
        ),
        ExperimentPreset("until", "(y <= 0.4) U (0.6 <= x)", momentum=0.9),
        # the y bound contradicts a pinned (1,1) endpoint, so this run leaves
        # the endpoints free, as in the source setting where nothing pins them
        ExperimentPreset(
            "compound",
            "(G (0.1 <= dist(0.5, 0.5))) && (F (dist(0.7, 0.5) <= 0)) && (G (y <= 0.8))",
            momentum=0.9,
            fixed_endpoints=False,
        ),
        ExperimentPreset("loop", _LOOP, momentum=0.9),
        ExperimentPreset("double_loop_nested", _NESTED, momentum=0.9, count_law=True),
        ExperimentPreset("double_loop_conjoined", _CONJOINED, momentum=0.9, count_law=True),
        ExperimentPreset(
            "smoothen",
            "G ((0 <= vx) && (0 <= vy) && (vx <= 0.03) && (vy <= 0.03))",
            dynamical_weight=1.0,
            learning_rate=0.05,
            init="random",
            with_velocities=True,
        ),
    )
}

COUNT_LAW_LENGTHS = (10, 20, 40, 80)


def count_law_calls(formula: str, lengths=COUNT_LAW_LENGTHS) -> dict[int, int]:
    """Uncached eval-call counts over traces of the given lengths.

    The literal recursion never short-circuits, so the counts depend only on
    the trace length, not its contents.
    """
    rho = parse(formula)
    counts = {}
    for n in lengths:
        traj = straight_line(n)
        core, plan = lower(rho, TrajectoryMeta(has_velocities=False))
        trace, _ = derive_features(traj, plan)
        _, counter = evaluate_counted(core, trace, 0)
        counts[n] = counter.calls
    return counts


def _verdict_clauses(rho: Constraint) -> list[Constraint]:
    """Top-level conjuncts, with Always distributed over conjunctions."""
    if isinstance(rho, And):
        return _verdict_clauses(rho.left) + _verdict_clauses(rho.right)
    if isinstance(rho, Always) and isinstance(rho.operand, And):
        return [Always(c) for c in _verdict_clauses(rho.operand)]
    return [rho]


def _contains_reach_atom(rho: Constraint, plan: FeatureDerivationPlan) -> bool:
    # reach means comparing a distance channel against the constant 0
    if isinstance(rho, Atom):
        lhs = plan.channels[rho.lhs.index]
        rhs = plan.channels[rho.rhs.index]
        return (
            isinstance(lhs, DistanceChannel)
            and isinstance(rhs, ConstantChannel)
            and rhs.value == 0.0
        )
    return any(_contains_reach_atom(c, plan) for c in children(rho))


def _clause_verdicts(rho: Constraint, traj: Trajectory, gamma: float) -> list[dict]:
    verdicts = []
    for clause in _verdict_clauses(rho):
        core, plan = lower(
            clause, TrajectoryMeta(has_velocities=traj.velocities is not None)
        )
        trace, _ = derive_features(traj, plan)
        hard = loss(core, trace, 0, 0.0).elems[0]
        # exact satisfaction of `dist <= 0` is unattainable in floats; reach
        # clauses get a 2*gamma slack, everything else gamma
        slack = 2 * gamma if _contains_reach_atom(core, plan) else gamma
        verdicts.append(
            {
                "clause": print_formula(clause),
                "hard_loss": hard,
                "slack": slack,
                "satisfied": hard <= slack,
            }
        )
    return verdicts


def _channel_metrics(traj: Trajectory, plan: FeatureDerivationPlan) -> dict:
    metrics = {}
    for channel in plan.channels:
        if isinstance(channel, ConstantChannel):
            continue
        series = _channel_series(channel, traj)
        metrics[channel.describe()] = {"min": min(series), "max": max(series)}
    return metrics


@dataclass(frozen=True)
class ExperimentResult:
    name: str
    config: dict
    trajectory: Trajectory
    history: tuple[tuple[int, float, float, float], ...]
    verdict: dict


def run_experiment(name: str, seed: int = 0, out_dir: str | Path | None = None,
                   **overrides) -> ExperimentResult:
    if name not in PRESETS:
        raise DataError(f"unknown experiment {name!r}; choose from {sorted(PRESETS)}")
    preset = PRESETS[name]
    if overrides:
        preset = replace(preset, **overrides)

    rng = Random(seed)
    if preset.init == "line":
        traj = straight_line(
            preset.n, rng, preset.noise, preset.with_velocities, preset.dt
        )
        if not preset.fixed_endpoints:
            traj = replace(traj, fixed_endpoints=False)
    elif preset.init == "random":
        traj = random_trace(preset.n, rng, preset.dt)
    else:
        raise DataError(f"unknown init mode {preset.init!r}")

    mixed = MixedLossSpec(
        ltlf_weight=preset.ltlf_weight,
        dynamical_weight=preset.dynamical_weight,
        gamma=as_gamma(preset.gamma),
    )
    result = optimize(
        traj,
        preset.formula,
        mixed,
        steps=preset.steps,
        learning_rate=preset.learning_rate,
        momentum=preset.momentum,
    )

    rho = parse(preset.formula)
    core, plan = lower(rho, TrajectoryMeta(has_velocities=preset.with_velocities))
    final_trace, _ = derive_features(result.trajectory, plan)
    clause_rows = _clause_verdicts(rho, result.trajectory, preset.gamma)
    verdict = {
        "clauses": clause_rows,
        "satisfied": all(row["satisfied"] for row in clause_rows),
        "final_ltlf_loss": loss(core, final_trace, 0, preset.gamma).elems[0],
        "final_hard_loss": loss(core, final_trace, 0, 0.0).elems[0],
        "metrics": _channel_metrics(result.trajectory, plan),
    }
    if preset.dynamical_weight > 0:
        dyn_value, _ = dynamical_loss(result.trajectory)
        verdict["final_dynamical_loss"] = dyn_value
    if preset.count_law:
        verdict["eval_calls"] = {
            str(n): c for n, c in count_law_calls(preset.formula).items()
        }

    config = {
        "name": preset.name,
        "formula": preset.formula,
        "n": preset.n,
        "dt": preset.dt,
        "gamma": preset.gamma,
        "ltlf_weight": preset.ltlf_weight,
        "dynamical_weight": preset.dynamical_weight,
        "steps": preset.steps,
        "learning_rate": preset.learning_rate,
        "momentum": preset.momentum,
        "init": preset.init,
        "noise": preset.noise,
        "with_velocities": preset.with_velocities,
        "fixed_endpoints": traj.fixed_endpoints,
        "seed": seed,
    }
    run = ExperimentResult(name, config, result.trajectory, result.history, verdict)
    if out_dir is not None:
        write_artifacts(run, Path(out_dir))
    return run


def trajectory_csv(traj: Trajectory) -> str:
    """One row per time step; the t=0 velocity cells stay empty (no sample leads in)."""
    lines = ["t,x,y,vx,vy" if traj.velocities is not None else "t,x,y"]
    for t, (x, y) in enumerate(traj.positions):
        if traj.velocities is not None:
            if t > 0:
                vx, vy = traj.velocities[t - 1]
                lines.append(f"{t},{x!r},{y!r},{vx!r},{vy!r}")
            else:
                lines.append(f"{t},{x!r},{y!r},,")
        else:
            lines.append(f"{t},{x!r},{y!r}")
    return "\n".join(lines) + "\n"


def history_csv(history: tuple[tuple[int, float, float, float], ...]) -> str:
    rows = ["step,total,ltlf,dynamical"]
    rows.extend(
        f"{step},{total!r},{ltlf!r},{dyn!r}" for step, total, ltlf, dyn in history
    )
    return "\n".join(rows) + "\n"


def write_artifacts(run: ExperimentResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(
        json.dumps(run.config, indent=2, sort_keys=True) + "\n"
    )
    (out_dir / "verdict.json").write_text(
        json.dumps(run.verdict, indent=2, sort_keys=True) + "\n"
    )
    (out_dir / "trajectory.csv").write_text(trajectory_csv(run.trajectory))
    (out_dir / "loss_history.csv").write_text(history_csv(run.history))
