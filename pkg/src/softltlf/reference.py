"""Brute-force reference semantics over plain list traces.

Ground truth for the tensor engine's tests. Everything here is written for
obviousness, not speed: traces are lists of feature rows, the boolean
semantics is expressed with quantifiers over suffixes rather than the
engine's recursion, and the loss recursion carries its own scalar smoothing
kernels. Nothing in this module may import the tensor machinery.
"""

from __future__ import annotations

import math

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
)

ListTrace = list[list[float]]

_CMP = {
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _feature(tr: ListTrace, t: int, index: int) -> float:
    row = tr[t]
    if index >= len(row):
        raise BoundsError(f"feature f{index} out of range for a {len(row)}-column trace")
    return row[index]


def eval_ref(rho: Constraint, tr: ListTrace, t: int) -> bool:
    """Textbook boolean evaluation; any constraint over an empty suffix is false."""
    end = len(tr)
    if t >= end:
        return False
    if isinstance(rho, Atom):
        return _CMP[rho.op](_feature(tr, t, rho.lhs.index), _feature(tr, t, rho.rhs.index))
    if isinstance(rho, And):
        return eval_ref(rho.left, tr, t) and eval_ref(rho.right, tr, t)
    if isinstance(rho, Or):
        return eval_ref(rho.left, tr, t) or eval_ref(rho.right, tr, t)
    if isinstance(rho, StrongNext):
        return eval_ref(rho.operand, tr, t + 1)
    if isinstance(rho, WeakNext):
        return True if t == end - 1 else eval_ref(rho.operand, tr, t + 1)
    if isinstance(rho, Always):
        return all(eval_ref(rho.operand, tr, u) for u in range(t, end))
    if isinstance(rho, Eventually):
        return any(eval_ref(rho.operand, tr, u) for u in range(t, end))
    if isinstance(rho, WeakUntil):
        # left holds up to some step where right starts, or left holds forever
        return any(
            eval_ref(rho.right, tr, u)
            and all(eval_ref(rho.left, tr, v) for v in range(t, u))
            for u in range(t, end)
        ) or all(eval_ref(rho.left, tr, v) for v in range(t, end))
    if isinstance(rho, StrongRelease):
        # left fires at some step, right holds up to and including that step
        return any(
            eval_ref(rho.left, tr, u)
            and all(eval_ref(rho.right, tr, v) for v in range(t, u + 1))
            for u in range(t, end)
        )
    raise TypeError(f"not a constraint node: {rho!r}")


# The loss recursion has no quantifier form; it is its own definition. The
# smoothing kernels below are local on purpose so this module checks the
# engine's kernels too, not just its recursion.


def _smax(a: float, b: float, gamma: float) -> float:
    if gamma <= 0:
        return max(a, b)
    if a == b:
        return a + gamma * math.log(2.0)
    hi, lo = (a, b) if a > b else (b, a)
    return hi + gamma * math.log1p(math.exp((lo - hi) / gamma))


def _smin(a: float, b: float, gamma: float) -> float:
    if gamma <= 0:
        return min(a, b)
    if a == b:
        return a - gamma * math.log(2.0)
    hi, lo = (a, b) if a > b else (b, a)
    return lo - gamma * math.log1p(math.exp((lo - hi) / gamma))


def _gauss(a: float, gamma: float) -> float:
    if gamma <= 0:
        return 1.0 if a == 0 else 0.0
    return math.exp(-(a * a) / (2.0 * gamma * gamma))


def loss_ref(rho: Constraint, tr: ListTrace, t: int, gamma: float) -> float:
    end = len(tr)
    if t >= end:
        return 1.0
    if isinstance(rho, Atom):
        diff = _feature(tr, t, rho.lhs.index) - _feature(tr, t, rho.rhs.index)
        if rho.op == "<=":
            return _smax(diff, 0.0, gamma)
        if rho.op == "!=":
            return _gauss(diff, gamma)
        if rho.op == "<":
            return _smax(_smax(diff, 0.0, gamma), _gauss(diff, gamma), gamma)
        # ==: both orientations of <=
        return _smax(_smax(diff, 0.0, gamma), _smax(-diff, 0.0, gamma), gamma)
    if isinstance(rho, And):
        return _smax(loss_ref(rho.left, tr, t, gamma), loss_ref(rho.right, tr, t, gamma), gamma)
    if isinstance(rho, Or):
        return _smin(loss_ref(rho.left, tr, t, gamma), loss_ref(rho.right, tr, t, gamma), gamma)
    if isinstance(rho, StrongNext):
        return loss_ref(rho.operand, tr, t + 1, gamma)
    if isinstance(rho, WeakNext):
        return 0.0 if t == end - 1 else loss_ref(rho.operand, tr, t + 1, gamma)
    if isinstance(rho, Always):
        here = loss_ref(rho.operand, tr, t, gamma)
        rest = 0.0 if t == end - 1 else loss_ref(rho, tr, t + 1, gamma)
        return _smax(here, rest, gamma)
    if isinstance(rho, Eventually):
        return _smin(loss_ref(rho.operand, tr, t, gamma), loss_ref(rho, tr, t + 1, gamma), gamma)
    if isinstance(rho, WeakUntil):
        right = loss_ref(rho.right, tr, t, gamma)
        left = loss_ref(rho.left, tr, t, gamma)
        rest = 0.0 if t == end - 1 else loss_ref(rho, tr, t + 1, gamma)
        return _smin(right, _smax(left, rest, gamma), gamma)
    if isinstance(rho, StrongRelease):
        left = loss_ref(rho.left, tr, t, gamma)
        right = loss_ref(rho.right, tr, t, gamma)
        rest = loss_ref(rho, tr, t + 1, gamma)
        return _smin(_smax(left, right, gamma), _smax(right, rest, gamma), gamma)
    raise TypeError(f"not a constraint node: {rho!r}")
