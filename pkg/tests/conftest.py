"""Shared generators for randomised tests.

These use seeded random.Random rather than hypothesis so that corpus-style
tests (oracle equivalence, finite-difference sweeps) run on a fixed set of
instances; hypothesis strategies live in the test modules that want
shrinking.
"""

from __future__ import annotations

import random

from softltlf.formula import (
    COMPARISON_OPS,
    And,
    Atom,
    Constraint,
    Eventually,
    FeatureRef,
    Or,
    StrongNext,
    StrongRelease,
    WeakNext,
    WeakUntil,
    Always,
)
from softltlf.tensor import Tensor


def random_atom(rng: random.Random, n_features: int) -> Atom:
    return Atom(
        rng.choice(COMPARISON_OPS),
        FeatureRef(rng.randrange(n_features)),
        FeatureRef(rng.randrange(n_features)),
    )


def random_constraint(rng: random.Random, n_features: int, depth: int) -> Constraint:
    """Random constraint tree of at most the given depth."""
    if depth <= 0 or rng.random() < 0.3:
        return random_atom(rng, n_features)
    kind = rng.randrange(8)
    if kind == 0:
        return And(random_constraint(rng, n_features, depth - 1), random_constraint(rng, n_features, depth - 1))
    if kind == 1:
        return Or(random_constraint(rng, n_features, depth - 1), random_constraint(rng, n_features, depth - 1))
    if kind == 2:
        return StrongNext(random_constraint(rng, n_features, depth - 1))
    if kind == 3:
        return WeakNext(random_constraint(rng, n_features, depth - 1))
    if kind == 4:
        return Always(random_constraint(rng, n_features, depth - 1))
    if kind == 5:
        return Eventually(random_constraint(rng, n_features, depth - 1))
    if kind == 6:
        return WeakUntil(random_constraint(rng, n_features, depth - 1), random_constraint(rng, n_features, depth - 1))
    return StrongRelease(random_constraint(rng, n_features, depth - 1), random_constraint(rng, n_features, depth - 1))


def random_trace_rows(rng: random.Random, d0: int, d1: int, lo: float = -1.0, hi: float = 1.0) -> list[list[float]]:
    """Single trace as a list of time rows, for the reference semantics."""
    return [[rng.uniform(lo, hi) for _ in range(d1)] for _ in range(d0)]


def rows_to_tensor(rows: list[list[float]]) -> Tensor:
    """Pack a single trace into a (d0, d1) tensor."""
    d0 = len(rows)
    d1 = len(rows[0]) if rows else 0
    return Tensor((d0, d1), tuple(v for row in rows for v in row))


def random_trace_batch(
    rng: random.Random,
    d0: int,
    d1: int,
    batch_shape: tuple[int, ...],
    lo: float = -1.0,
    hi: float = 1.0,
) -> Tensor:
    """Batched trace tensor with the given trailing batch axes."""
    dims = (d0, d1) + batch_shape
    n = 1
    for d in dims:
        n *= d
    return Tensor(dims, tuple(rng.uniform(lo, hi) for _ in range(n)))


def batch_slices(batch: Tensor) -> list[list[list[float]]]:
    """Split a batched trace into per-slice row lists, batch index varying
    row-major over the trailing axes."""
    d0, d1 = batch.dims[0], batch.dims[1]
    batch_cap = 1
    for d in batch.dims[2:]:
        batch_cap *= d
    slices: list[list[list[float]]] = [
        [[0.0] * d1 for _ in range(d0)] for _ in range(batch_cap)
    ]
    for flat, value in enumerate(batch.elems):
        rest, b = divmod(flat, batch_cap)
        t, phi = divmod(rest, d1)
        slices[b][t][phi] = value
    return slices
