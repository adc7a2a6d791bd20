"""Constraint syntax trees for finite-trace temporal logic.

A constraint is one of nine node kinds: a comparison between two feature
channels, the two boolean connectives, and six temporal operators. There is
deliberately no negation node. Every downstream translation (boolean
evaluation, loss, gradient) is a primitive recursion over these nine cases,
and keeping negation out of the tree is what makes that possible. Negation
is provided as the `negate` rewrite instead: comparisons flip, the
connectives swap by De Morgan, and each temporal operator swaps with its
strong/weak dual.
"""

from __future__ import annotations

from dataclasses import dataclass

COMPARISON_OPS = ("<=", "<", "==", "!=")


class Constraint:
    """Base class for all constraint nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class FeatureRef:
    """Column index into the feature axis (axis 1) of a trace."""

    index: int

    def __post_init__(self) -> None:
        if not isinstance(self.index, int) or isinstance(self.index, bool):
            raise TypeError(f"feature index must be an int, got {self.index!r}")
        if self.index < 0:
            raise ValueError(f"feature index must be >= 0, got {self.index}")


@dataclass(frozen=True)
class Atom(Constraint):
    """Pointwise comparison between two feature channels at one time step."""

    op: str
    lhs: FeatureRef
    rhs: FeatureRef

    def __post_init__(self) -> None:
        if self.op not in COMPARISON_OPS:
            raise ValueError(f"unknown comparison {self.op!r}, expected one of {COMPARISON_OPS}")


@dataclass(frozen=True)
class And(Constraint):
    left: Constraint
    right: Constraint


@dataclass(frozen=True)
class Or(Constraint):
    left: Constraint
    right: Constraint


@dataclass(frozen=True)
class StrongNext(Constraint):
    """Holds iff the operand holds at the next step; False at the last step."""

    operand: Constraint


@dataclass(frozen=True)
class WeakNext(Constraint):
    """Holds iff the operand holds at the next step; True at the last step."""

    operand: Constraint


@dataclass(frozen=True)
class Always(Constraint):
    operand: Constraint


@dataclass(frozen=True)
class Eventually(Constraint):
    operand: Constraint


@dataclass(frozen=True)
class WeakUntil(Constraint):
    """left holds until right starts holding; right may never hold."""

    left: Constraint
    right: Constraint


@dataclass(frozen=True)
class StrongRelease(Constraint):
    """right holds up to and including the step where left starts holding."""

    left: Constraint
    right: Constraint


# Negating an ordered comparison swaps its operands: not(a <= b) is (b < a).
_NEGATED_OP = {"<=": "<", "<": "<=", "==": "!=", "!=": "=="}
_SWAPPING_OPS = ("<=", "<")


def negate(rho: Constraint) -> Constraint:
    """Rewrite `rho` into a constraint equivalent to its logical negation.

    The result is built from the same nine node kinds (no negation node is
    introduced) and negating twice restores the original tree exactly.
    """
    if isinstance(rho, Atom):
        op = _NEGATED_OP[rho.op]
        if rho.op in _SWAPPING_OPS:
            return Atom(op, rho.rhs, rho.lhs)
        return Atom(op, rho.lhs, rho.rhs)
    if isinstance(rho, And):
        return Or(negate(rho.left), negate(rho.right))
    if isinstance(rho, Or):
        return And(negate(rho.left), negate(rho.right))
    if isinstance(rho, StrongNext):
        return WeakNext(negate(rho.operand))
    if isinstance(rho, WeakNext):
        return StrongNext(negate(rho.operand))
    if isinstance(rho, Always):
        return Eventually(negate(rho.operand))
    if isinstance(rho, Eventually):
        return Always(negate(rho.operand))
    if isinstance(rho, WeakUntil):
        return StrongRelease(negate(rho.left), negate(rho.right))
    if isinstance(rho, StrongRelease):
        return WeakUntil(negate(rho.left), negate(rho.right))
    raise TypeError(f"not a constraint node: {rho!r}")


def children(rho: Constraint) -> tuple[Constraint, ...]:
    """Immediate subconstraints of a node.

    Any Constraint that is not a connective counts as a leaf, so atom kinds
    defined elsewhere (the surface syntax has one) traverse correctly.
    """
    if isinstance(rho, (And, Or, WeakUntil, StrongRelease)):
        return (rho.left, rho.right)
    if isinstance(rho, (StrongNext, WeakNext, Always, Eventually)):
        return (rho.operand,)
    if isinstance(rho, Constraint):
        return ()
    raise TypeError(f"not a constraint node: {rho!r}")


def postorder(rho: Constraint) -> list[Constraint]:
    """Unique nodes of the tree, children before parents.

    Structurally equal subtrees are listed once; evaluation tables keyed on
    the nodes in this order therefore share work between repeated subtrees.
    """
    seen: dict[Constraint, None] = {}

    def visit(node: Constraint) -> None:
        if node in seen:
            return
        for child in children(node):
            visit(child)
        seen[node] = None

    visit(rho)
    return list(seen)


def feature_indices(rho: Constraint) -> set[int]:
    """All feature columns mentioned anywhere in the constraint."""
    out: set[int] = set()
    for node in postorder(rho):
        if isinstance(node, Atom):
            out.add(node.lhs.index)
            out.add(node.rhs.index)
    return out
