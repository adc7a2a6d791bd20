"""Boolean semantics of constraints over batched trace tensors.

A trace batch is a real tensor of order >= 2: axis 0 is time, axis 1 is
features, every further axis is batching. Evaluating a constraint yields a
boolean tensor shaped like the batch axes.

Two implementations live here and must agree on results. `evaluate` fills a
(node, time) table backward from the end of the trace, so shared subtrees
and shared suffixes are computed once. `evaluate_counted` is the plain
recursion with a visit counter; its call counts are the quantity the
nesting-cost experiments measure, so it deliberately recomputes everything
the way the recursive definition does.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

from .errors import BoundsError, ShapeError
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
from .tensor import Tensor, backsubt, binop, replicate, subt

_CMP = {
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


@dataclass(frozen=True)
class TraceBatch:
    tensor: Tensor

    def __post_init__(self) -> None:
        if self.tensor.order < 2:
            raise ShapeError(
                f"a trace batch needs a time axis and a feature axis, got order {self.tensor.order}"
            )

    @classmethod
    def from_rows(cls, rows: list[list[float]]) -> "TraceBatch":
        """Single unbatched trace from one feature row per time step."""
        d0 = len(rows)
        d1 = len(rows[0]) if rows else 0
        for row in rows:
            if len(row) != d1:
                raise ShapeError("trace rows must all have the same length")
        return cls(Tensor((d0, d1), tuple(v for row in rows for v in row)))

    @property
    def steps(self) -> int:
        return self.tensor.dims[0]

    @property
    def feature_count(self) -> int:
        return self.tensor.dims[1]

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.tensor.dims[2:]


@dataclass
class EvalCounter:
    calls: int = 0


def _check(rho: Constraint, trace: TraceBatch, t: int) -> None:
    if t < 0:
        raise ValueError(f"time index must be a natural, got {t}")
    for index in feature_indices(rho):
        if index >= trace.feature_count:
            raise BoundsError(
                f"f{index} out of range for a {trace.feature_count}-feature trace"
            )


def _atom_eval(atom: Atom, trace: TraceBatch, t: int) -> Tensor:
    lhs = subt((t, atom.lhs.index), trace.tensor)
    rhs = subt((t, atom.rhs.index), trace.tensor)
    return binop(_CMP[atom.op], lhs, rhs)


def evaluate(rho: Constraint, trace: TraceBatch, t: int) -> Tensor:
    """Boolean result per batch element; False wherever the trace has ended."""
    _check(rho, trace, t)
    steps = trace.steps
    if t >= steps:
        return replicate(trace.batch_shape, False)

    false_row = replicate(trace.batch_shape, False)
    true_row = replicate(trace.batch_shape, True)
    nodes = postorder(rho)
    both = lambda a, b: a and b
    either = lambda a, b: a or b

    # row at u holds every node's value at time u; start past the end,
    # where everything is False, and walk back to t
    row: dict[Constraint, Tensor] = {node: false_row for node in nodes}
    for u in range(steps - 1, t - 1, -1):
        last = u == steps - 1
        prev = row
        row = {}
        for node in nodes:
            if isinstance(node, Atom):
                row[node] = _atom_eval(node, trace, u)
            elif isinstance(node, And):
                row[node] = binop(both, row[node.left], row[node.right])
            elif isinstance(node, Or):
                row[node] = binop(either, row[node.left], row[node.right])
            elif isinstance(node, StrongNext):
                row[node] = prev[node.operand]
            elif isinstance(node, WeakNext):
                row[node] = true_row if last else prev[node.operand]
            elif isinstance(node, Always):
                rest = true_row if last else prev[node]
                row[node] = binop(both, row[node.operand], rest)
            elif isinstance(node, Eventually):
                row[node] = binop(either, row[node.operand], prev[node])
            elif isinstance(node, WeakUntil):
                rest = true_row if last else prev[node]
                row[node] = binop(either, row[node.right], binop(both, row[node.left], rest))
            elif isinstance(node, StrongRelease):
                held = binop(both, row[node.left], row[node.right])
                row[node] = binop(either, held, binop(both, row[node.right], prev[node]))
            else:
                raise TypeError(f"not an evaluable constraint node: {node!r}")
    return row[rho]


def _eval_naive(rho: Constraint, trace: TraceBatch, t: int, counter: EvalCounter) -> Tensor:
    counter.calls += 1
    steps = trace.steps
    if t >= steps:
        return replicate(trace.batch_shape, False)
    last = t == steps - 1
    both = lambda a, b: a and b
    either = lambda a, b: a or b
    if isinstance(rho, Atom):
        return _atom_eval(rho, trace, t)
    if isinstance(rho, And):
        return binop(both, _eval_naive(rho.left, trace, t, counter), _eval_naive(rho.right, trace, t, counter))
    if isinstance(rho, Or):
        return binop(either, _eval_naive(rho.left, trace, t, counter), _eval_naive(rho.right, trace, t, counter))
    if isinstance(rho, StrongNext):
        return _eval_naive(rho.operand, trace, t + 1, counter)
    if isinstance(rho, WeakNext):
        if last:
            return replicate(trace.batch_shape, True)
        return _eval_naive(rho.operand, trace, t + 1, counter)
    if isinstance(rho, Always):
        here = _eval_naive(rho.operand, trace, t, counter)
        rest = replicate(trace.batch_shape, True) if last else _eval_naive(rho, trace, t + 1, counter)
        return binop(both, here, rest)
    if isinstance(rho, Eventually):
        here = _eval_naive(rho.operand, trace, t, counter)
        return binop(either, here, _eval_naive(rho, trace, t + 1, counter))
    if isinstance(rho, WeakUntil):
        right = _eval_naive(rho.right, trace, t, counter)
        left = _eval_naive(rho.left, trace, t, counter)
        rest = replicate(trace.batch_shape, True) if last else _eval_naive(rho, trace, t + 1, counter)
        return binop(either, right, binop(both, left, rest))
    if isinstance(rho, StrongRelease):
        left = _eval_naive(rho.left, trace, t, counter)
        right = _eval_naive(rho.right, trace, t, counter)
        held = binop(both, left, right)
        right_again = _eval_naive(rho.right, trace, t, counter)
        rest = _eval_naive(rho, trace, t + 1, counter)
        return binop(either, held, binop(both, right_again, rest))
    raise TypeError(f"not an evaluable constraint node: {rho!r}")


def evaluate_counted(rho: Constraint, trace: TraceBatch, t: int) -> tuple[Tensor, EvalCounter]:
    """Plain recursive evaluation plus how many times it entered itself.

    The recursive definition mentions the right operand of strong release
    twice, and this mode evaluates it twice; counts reflect the definition,
    not the table-driven engine.
    """
    _check(rho, trace, t)
    counter = EvalCounter()
    limit = sys.getrecursionlimit()
    needed = 16 * (trace.steps + 8)
    try:
        if needed > limit:
            sys.setrecursionlimit(needed)
        result = _eval_naive(rho, trace, t, counter)
    finally:
        sys.setrecursionlimit(limit)
    return result, counter
