"""Flat row-major tensors and the index arithmetic everything else builds on.

A tensor is a pair (dims, elems): a tuple of axis sizes and a flat tuple of
elements laid out row-major, axis 0 varying slowest.  Order-0 tensors are
legal scalars (capacity 1), and any axis size may be 0, giving a degenerate
tensor of capacity 0.  Tensors are immutable; every operation returns a new
value, so sharing across threads is safe.

There is deliberately no broadcasting and no view machinery.  The one layout
fact the package leans on is that fixing the leading axes of a row-major
tensor selects a contiguous section of the element tuple; ``subt`` and
``backsubt`` are written directly in terms of that section.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable

from .errors import BoundsError, ShapeError

Dims = tuple[int, ...]


def capacity(dims: Iterable[int]) -> int:
    """Number of elements a shape holds; the empty product is 1."""
    return math.prod(dims)


@dataclass(frozen=True)
class Tensor:
    """Dense tensor: axis sizes plus a flat element tuple in row-major order."""

    dims: Dims
    elems: tuple

    def __post_init__(self) -> None:
        dims = tuple(self.dims)
        elems = tuple(self.elems)
        for d in dims:
            if not isinstance(d, int) or d < 0:
                raise ShapeError(f"axis sizes must be naturals, got {dims!r}")
        if len(elems) != capacity(dims):
            raise ShapeError(
                f"shape {dims} holds {capacity(dims)} elements, got {len(elems)}"
            )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "elems", elems)

    @property
    def order(self) -> int:
        return len(self.dims)

    @property
    def capacity(self) -> int:
        return len(self.elems)

    def item(self) -> Any:
        """The single element of an order-0 tensor."""
        if self.dims != ():
            raise ShapeError(f"item() requires an order-0 tensor, got shape {self.dims}")
        return self.elems[0]


def _section(index: tuple[int, ...], dims: Dims) -> tuple[int, int]:
    """Offset and length of the contiguous section selected by a leading index.

    Validates the prefix: it may not be longer than the shape, and each
    component must be strictly below its axis size.
    """
    if len(index) > len(dims):
        raise ShapeError(f"index {index} is longer than shape {dims}")
    start = 0
    for i, d in zip(index, dims):
        if not isinstance(i, int) or not 0 <= i < d:
            raise BoundsError(f"index {index} out of bounds for shape {dims}")
        start = start * d + i
    block = capacity(dims[len(index):])
    return start * block, block


def flatten(index: tuple[int, ...], dims: Dims) -> int:
    """Linear position of a full dimensional index: Horner over the axis sizes."""
    if len(index) != len(dims):
        raise ShapeError(f"index {index} does not have the full length of shape {dims}")
    start, _ = _section(index, dims)
    return start


def unflatten(flat: int, dims: Dims) -> Dims:
    """Dimensional index of a linear position, by div/mod over suffix capacities."""
    if not isinstance(flat, int) or not 0 <= flat < capacity(dims):
        raise BoundsError(f"linear index {flat} out of bounds for shape {dims}")
    index = []
    rem = flat
    for k in range(len(dims)):
        suffix = capacity(dims[k + 1:])
        index.append(rem // suffix)
        rem %= suffix
    return tuple(index)


def lookup(index: tuple[int, ...], t: Tensor) -> Any:
    """Element at a full dimensional index."""
    return t.elems[flatten(index, t.dims)]


def unop(f: Callable[[Any], Any], t: Tensor) -> Tensor:
    """Apply a unary function to every element; shape is preserved."""
    return Tensor(t.dims, tuple(f(x) for x in t.elems))


def binop(f: Callable[[Any, Any], Any], t: Tensor, g: Tensor) -> Tensor:
    """Apply a binary function pairwise; both tensors must share a shape."""
    if t.dims != g.dims:
        raise ShapeError(f"binop shapes differ: {t.dims} vs {g.dims}")
    return Tensor(t.dims, tuple(f(x, y) for x, y in zip(t.elems, g.elems)))


def subt(index: tuple[int, ...], t: Tensor) -> Tensor:
    """Subtensor with the first len(index) axes fixed to ``index``.

    Row-major layout makes the result a single contiguous section of the
    element tuple, so this is a slice, not a gather.
    """
    start, block = _section(index, t.dims)
    return Tensor(t.dims[len(index):], t.elems[start:start + block])


def subt_recursive(index: tuple[int, ...], t: Tensor) -> Tensor:
    """Peel-one-axis definition of subt, kept as the oracle for the section form."""
    if len(index) == 0:
        return t
    if t.order == 0:
        raise ShapeError(f"index {index} is longer than shape {t.dims}")
    i0 = index[0]
    if not isinstance(i0, int) or not 0 <= i0 < t.dims[0]:
        raise BoundsError(f"index {index} out of bounds for shape {t.dims}")
    block = capacity(t.dims[1:])
    first_axis_slice = Tensor(t.dims[1:], t.elems[i0 * block:(i0 + 1) * block])
    return subt_recursive(index[1:], first_axis_slice)


def backsubt(index: tuple[int, ...], t: Tensor) -> Tensor:
    """Indicator derivative of subt: 1.0 exactly where the leading axes match.

    Same shape as ``t``; real-valued regardless of the element type of ``t``,
    since its purpose is to carry gradient.
    """
    start, block = _section(index, t.dims)
    elems = [0.0] * t.capacity
    elems[start:start + block] = [1.0] * block
    return Tensor(t.dims, tuple(elems))


def replicate(dims: Iterable[int], k: Any) -> Tensor:
    """Tensor of the given shape with every element equal to k."""
    dims = tuple(dims)
    return Tensor(dims, (k,) * capacity(dims))
