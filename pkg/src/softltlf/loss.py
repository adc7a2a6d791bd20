"""Smooth loss and its analytic gradient over batched trace tensors.

The loss of a constraint is a nonnegative relaxation of its boolean value:
zero exactly at satisfaction when gamma is zero, smoothed by softmax/softmin
folds when gamma is positive. The gradient is the derivative of the loss
with respect to every trace element, laid out as a tensor shaped like the
trace itself; batch elements never mix, so entry i belongs to the batch
slice i falls in.

Like the boolean engine, there are two implementations: a (node, time) table
filled backward (used by everything downstream) and a literal recursion with
a visit counter. The two must agree bitwise, which pins down the operation
order: each case combines its operands exactly as written in the case
functions below, and the table merely reuses results instead of recomputing
them.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from functools import lru_cache

from .errors import BoundsError
from .formula import (
    And,
    Atom,
    Always,
    Constraint,
    Eventually,
    Or,
    StrongNext,
    StrongRelease,
    WeakNext,
    WeakUntil,
    feature_indices,
    postorder,
)
from .semantics import EvalCounter, TraceBatch
from .smoothing import (
    Gamma,
    as_gamma,
    gaussian_gamma,
    gaussian_gamma_dcoeff,
    max_gamma,
    max_gamma_weights,
    min_gamma,
    min_gamma_weights,
)
from .tensor import Tensor, backsubt, binop, capacity, replicate, subt, unflatten


@dataclass(frozen=True)
class LossConfig:
    gamma: Gamma
    counter_enabled: bool = False


@dataclass(frozen=True)
class LossResult:
    value: Tensor
    grad: Tensor | None = None
    calls: int | None = None


def _config(cfg: LossConfig | Gamma | float) -> LossConfig:
    if isinstance(cfg, LossConfig):
        return cfg
    return LossConfig(as_gamma(cfg))


def _check(rho: Constraint, trace: TraceBatch, t: int) -> None:
    if t < 0:
        raise ValueError(f"time index must be a natural, got {t}")
    for index in feature_indices(rho):
        if index >= trace.feature_count:
            raise BoundsError(
                f"f{index} out of range for a {trace.feature_count}-feature trace"
            )


# batched kernels: values are batch-shaped, gradients are trace-shaped, and
# trace element i belongs to batch slice (i mod batch capacity)


def _smax(a: Tensor, b: Tensor, g: Gamma) -> Tensor:
    return binop(lambda x, y: max_gamma(x, y, g), a, b)


def _smin(a: Tensor, b: Tensor, g: Gamma) -> Tensor:
    return binop(lambda x, y: min_gamma(x, y, g), a, b)


def _combine(weights: list[tuple[float, float]], da: Tensor, db: Tensor) -> Tensor:
    n = len(weights)
    if n == 1:
        wa, wb = weights[0]
        elems = tuple(wa * x + wb * y for x, y in zip(da.elems, db.elems))
    else:
        elems = tuple(
            weights[i % n][0] * x + weights[i % n][1] * y
            for i, (x, y) in enumerate(zip(da.elems, db.elems))
        )
    return Tensor(da.dims, elems)


def _dmax(a: Tensor, da: Tensor, b: Tensor, db: Tensor, g: Gamma) -> Tensor:
    weights = [max_gamma_weights(x, y, g) for x, y in zip(a.elems, b.elems)]
    return _combine(weights, da, db)


def _dmin(a: Tensor, da: Tensor, b: Tensor, db: Tensor, g: Gamma) -> Tensor:
    weights = [min_gamma_weights(x, y, g) for x, y in zip(a.elems, b.elems)]
    return _combine(weights, da, db)


def _dgauss(a: Tensor, da: Tensor, g: Gamma) -> Tensor:
    coeffs = [gaussian_gamma_dcoeff(x, g) for x in a.elems]
    n = len(coeffs)
    if n == 1:
        c = coeffs[0]
        elems = tuple(c * x for x in da.elems)
    else:
        elems = tuple(coeffs[i % n] * x for i, x in enumerate(da.elems))
    return Tensor(da.dims, elems)


_SUB = lambda x, y: x - y


def _atom_diff(atom: Atom, trace: TraceBatch, u: int) -> Tensor:
    lhs = subt((u, atom.lhs.index), trace.tensor)
    rhs = subt((u, atom.rhs.index), trace.tensor)
    return binop(_SUB, lhs, rhs)


# the indicator difference depends only on shape and slot, not on the data,
# so repeated gradient calls over same-shaped traces (the optimizer loop)
# reuse it
@lru_cache(maxsize=4096)
def _ddiff_cached(dims: tuple[int, ...], u: int, lhs: int, rhs: int) -> Tensor:
    probe = Tensor(dims, (0.0,) * capacity(dims))
    return binop(_SUB, backsubt((u, lhs), probe), backsubt((u, rhs), probe))


def _atom_ddiff(atom: Atom, trace: TraceBatch, u: int) -> Tensor:
    return _ddiff_cached(trace.tensor.dims, u, atom.lhs.index, atom.rhs.index)


def _atom_loss(diff: Tensor, op: str, zeros_b: Tensor, g: Gamma) -> Tensor:
    if op == "<=":
        return _smax(diff, zeros_b, g)
    if op == "!=":
        return Tensor(diff.dims, tuple(gaussian_gamma(x, g) for x in diff.elems))
    if op == "<":
        return _smax(_smax(diff, zeros_b, g), _atom_loss(diff, "!=", zeros_b, g), g)
    # ==: both orientations of <=; the flipped difference is the exact negation
    flipped = Tensor(diff.dims, tuple(-x for x in diff.elems))
    return _smax(_smax(diff, zeros_b, g), _smax(flipped, zeros_b, g), g)


def _atom_grad(
    diff: Tensor, ddiff: Tensor, op: str, zeros_b: Tensor, zeros_tr: Tensor, g: Gamma
) -> Tensor:
    if op == "<=":
        return _dmax(diff, ddiff, zeros_b, zeros_tr, g)
    if op == "!=":
        return _dgauss(diff, ddiff, g)
    if op == "<":
        le_v = _smax(diff, zeros_b, g)
        le_g = _dmax(diff, ddiff, zeros_b, zeros_tr, g)
        ne_v = _atom_loss(diff, "!=", zeros_b, g)
        ne_g = _dgauss(diff, ddiff, g)
        return _dmax(le_v, le_g, ne_v, ne_g, g)
    flipped = Tensor(diff.dims, tuple(-x for x in diff.elems))
    dflipped = Tensor(ddiff.dims, tuple(-x for x in ddiff.elems))
    le_v = _smax(diff, zeros_b, g)
    le_g = _dmax(diff, ddiff, zeros_b, zeros_tr, g)
    ge_v = _smax(flipped, zeros_b, g)
    ge_g = _dmax(flipped, dflipped, zeros_b, zeros_tr, g)
    return _dmax(le_v, le_g, ge_v, ge_g, g)


def _table_engine(
    rho: Constraint, trace: TraceBatch, t: int, g: Gamma, want_grad: bool
) -> tuple[Tensor, Tensor | None]:
    _check(rho, trace, t)
    steps = trace.steps
    batch_shape = trace.batch_shape
    ones_b = replicate(batch_shape, 1.0)
    zeros_b = replicate(batch_shape, 0.0)
    zeros_tr = replicate(trace.tensor.dims, 0.0) if want_grad else None
    if t >= steps:
        return ones_b, zeros_tr

    nodes = postorder(rho)
    lrow: dict[Constraint, Tensor] = {node: ones_b for node in nodes}
    grow: dict[Constraint, Tensor] = {node: zeros_tr for node in nodes} if want_grad else {}

    for u in range(steps - 1, t - 1, -1):
        last = u == steps - 1
        lprev, lrow = lrow, {}
        if want_grad:
            gprev, grow = grow, {}
        for node in nodes:
            if isinstance(node, Atom):
                diff = _atom_diff(node, trace, u)
                lrow[node] = _atom_loss(diff, node.op, zeros_b, g)
                if want_grad:
                    ddiff = _atom_ddiff(node, trace, u)
                    grow[node] = _atom_grad(diff, ddiff, node.op, zeros_b, zeros_tr, g)
            elif isinstance(node, And):
                lrow[node] = _smax(lrow[node.left], lrow[node.right], g)
                if want_grad:
                    grow[node] = _dmax(
                        lrow[node.left], grow[node.left], lrow[node.right], grow[node.right], g
                    )
            elif isinstance(node, Or):
                lrow[node] = _smin(lrow[node.left], lrow[node.right], g)
                if want_grad:
                    grow[node] = _dmin(
                        lrow[node.left], grow[node.left], lrow[node.right], grow[node.right], g
                    )
            elif isinstance(node, StrongNext):
                lrow[node] = lprev[node.operand]
                if want_grad:
                    grow[node] = gprev[node.operand]
            elif isinstance(node, WeakNext):
                lrow[node] = zeros_b if last else lprev[node.operand]
                if want_grad:
                    grow[node] = zeros_tr if last else gprev[node.operand]
            elif isinstance(node, Always):
                rest_v = zeros_b if last else lprev[node]
                lrow[node] = _smax(lrow[node.operand], rest_v, g)
                if want_grad:
                    rest_g = zeros_tr if last else gprev[node]
                    grow[node] = _dmax(lrow[node.operand], grow[node.operand], rest_v, rest_g, g)
            elif isinstance(node, Eventually):
                lrow[node] = _smin(lrow[node.operand], lprev[node], g)
                if want_grad:
                    grow[node] = _dmin(
                        lrow[node.operand], grow[node.operand], lprev[node], gprev[node], g
                    )
            elif isinstance(node, WeakUntil):
                right_v = lrow[node.right]
                left_v = lrow[node.left]
                rest_v = zeros_b if last else lprev[node]
                hold_v = _smax(left_v, rest_v, g)
                lrow[node] = _smin(right_v, hold_v, g)
                if want_grad:
                    rest_g = zeros_tr if last else gprev[node]
                    hold_g = _dmax(left_v, grow[node.left], rest_v, rest_g, g)
                    grow[node] = _dmin(right_v, grow[node.right], hold_v, hold_g, g)
            elif isinstance(node, StrongRelease):
                left_v = lrow[node.left]
                right_v = lrow[node.right]
                both_v = _smax(left_v, right_v, g)
                carry_v = _smax(right_v, lprev[node], g)
                lrow[node] = _smin(both_v, carry_v, g)
                if want_grad:
                    both_g = _dmax(left_v, grow[node.left], right_v, grow[node.right], g)
                    carry_g = _dmax(right_v, grow[node.right], lprev[node], gprev[node], g)
                    grow[node] = _dmin(both_v, both_g, carry_v, carry_g, g)
            else:
                raise TypeError(f"not an evaluable constraint node: {node!r}")
    return lrow[rho], grow[rho] if want_grad else None


def loss(rho: Constraint, trace: TraceBatch, t: int, cfg: LossConfig | Gamma | float) -> Tensor:
    value, _ = _table_engine(rho, trace, t, _config(cfg).gamma, want_grad=False)
    return value


def dloss(rho: Constraint, trace: TraceBatch, t: int, cfg: LossConfig | Gamma | float) -> Tensor:
    _, grad = _table_engine(rho, trace, t, _config(cfg).gamma, want_grad=True)
    return grad


def loss_and_grad(
    rho: Constraint, trace: TraceBatch, t: int, cfg: LossConfig | Gamma | float
) -> LossResult:
    config = _config(cfg)
    value, grad = _table_engine(rho, trace, t, config.gamma, want_grad=True)
    calls = None
    if config.counter_enabled:
        _, counter = loss_counted(rho, trace, t, config.gamma)
        calls = counter.calls
    return LossResult(value, grad, calls)


def _loss_naive(
    rho: Constraint, trace: TraceBatch, t: int, g: Gamma, counter: EvalCounter
) -> Tensor:
    counter.calls += 1
    steps = trace.steps
    if t >= steps:
        return replicate(trace.batch_shape, 1.0)
    last = t == steps - 1
    zeros_b = replicate(trace.batch_shape, 0.0)
    if isinstance(rho, Atom):
        return _atom_loss(_atom_diff(rho, trace, t), rho.op, zeros_b, g)
    if isinstance(rho, And):
        return _smax(
            _loss_naive(rho.left, trace, t, g, counter),
            _loss_naive(rho.right, trace, t, g, counter),
            g,
        )
    if isinstance(rho, Or):
        return _smin(
            _loss_naive(rho.left, trace, t, g, counter),
            _loss_naive(rho.right, trace, t, g, counter),
            g,
        )
    if isinstance(rho, StrongNext):
        return _loss_naive(rho.operand, trace, t + 1, g, counter)
    if isinstance(rho, WeakNext):
        return zeros_b if last else _loss_naive(rho.operand, trace, t + 1, g, counter)
    if isinstance(rho, Always):
        here = _loss_naive(rho.operand, trace, t, g, counter)
        rest = zeros_b if last else _loss_naive(rho, trace, t + 1, g, counter)
        return _smax(here, rest, g)
    if isinstance(rho, Eventually):
        here = _loss_naive(rho.operand, trace, t, g, counter)
        return _smin(here, _loss_naive(rho, trace, t + 1, g, counter), g)
    if isinstance(rho, WeakUntil):
        right = _loss_naive(rho.right, trace, t, g, counter)
        left = _loss_naive(rho.left, trace, t, g, counter)
        rest = zeros_b if last else _loss_naive(rho, trace, t + 1, g, counter)
        return _smin(right, _smax(left, rest, g), g)
    if isinstance(rho, StrongRelease):
        left = _loss_naive(rho.left, trace, t, g, counter)
        right = _loss_naive(rho.right, trace, t, g, counter)
        both = _smax(left, right, g)
        right_again = _loss_naive(rho.right, trace, t, g, counter)
        carry = _smax(right_again, _loss_naive(rho, trace, t + 1, g, counter), g)
        return _smin(both, carry, g)
    raise TypeError(f"not an evaluable constraint node: {rho!r}")


def loss_counted(
    rho: Constraint, trace: TraceBatch, t: int, cfg: LossConfig | Gamma | float
) -> tuple[Tensor, EvalCounter]:
    """Literal recursive loss plus how many times it entered itself."""
    _check(rho, trace, t)
    counter = EvalCounter()
    g = _config(cfg).gamma
    limit = sys.getrecursionlimit()
    needed = 16 * (trace.steps + 8)
    try:
        if needed > limit:
            sys.setrecursionlimit(needed)
        result = _loss_naive(rho, trace, t, g, counter)
    finally:
        sys.setrecursionlimit(limit)
    return result, counter


@dataclass(frozen=True)
class GradCheckReport:
    """Element-wise comparison of the analytic gradient with central differences.

    An element passes when |analytic - numeric| <= max(abs_floor,
    tolerance * |numeric|), so raising the tolerance never turns a pass
    into a failure. The worst element is the one closest to (or furthest
    past) its own bound.
    """

    passed: bool
    checked: int
    tolerance: float
    abs_floor: float
    max_abs_err: float
    max_rel_err: float
    worst_index: tuple[int, ...]
    worst_analytic: float
    worst_numeric: float


def gradient_check(
    rho: Constraint,
    trace: TraceBatch,
    t: int,
    cfg: LossConfig | Gamma | float,
    tolerance: float = 1e-4,
    abs_floor: float = 1e-8,
    corrupt_index: int | None = None,
) -> GradCheckReport:
    """Check dloss against central finite differences of the summed loss.

    The gradient is of the batch-summed loss, so the numeric side perturbs
    one trace element at a time and sums the loss over the batch.
    `corrupt_index` deliberately offsets one analytic entry; it exists so
    failure reporting itself can be tested.
    """
    if tolerance <= 0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    g = _config(cfg).gamma
    analytic = list(dloss(rho, trace, t, g).elems)
    if corrupt_index is not None:
        analytic[corrupt_index] += 1.0

    def summed(tensor: Tensor) -> float:
        return sum(loss(rho, TraceBatch(tensor), t, g).elems)

    dims = trace.tensor.dims
    elems = trace.tensor.elems
    worst_score = -1.0
    max_abs = 0.0
    max_rel = 0.0
    worst = (0, 0.0, 0.0)
    for i, e in enumerate(elems):
        h = max(1e-6, 1e-6 * abs(e))
        bumped = list(elems)
        bumped[i] = e + h
        hi = summed(Tensor(dims, tuple(bumped)))
        bumped[i] = e - h
        lo = summed(Tensor(dims, tuple(bumped)))
        numeric = (hi - lo) / (2 * h)
        err = abs(analytic[i] - numeric)
        max_abs = max(max_abs, err)
        max_rel = max(max_rel, err / max(abs(numeric), abs_floor))
        score = err / max(abs_floor, tolerance * abs(numeric))
        if score > worst_score:
            worst_score = score
            worst = (i, analytic[i], numeric)
    return GradCheckReport(
        passed=worst_score <= 1.0,
        checked=len(elems),
        tolerance=tolerance,
        abs_floor=abs_floor,
        max_abs_err=max_abs,
        max_rel_err=max_rel,
        worst_index=unflatten(worst[0], dims),
        worst_analytic=worst[1],
        worst_numeric=worst[2],
    )
