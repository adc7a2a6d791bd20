"""Index arithmetic and the small operation set of the tensor module.

The frozen expected values below were worked out by hand from the row-major
stride rule (axis 0 slowest) before the implementation existed; the random
checks use the recursive subtensor definition as the oracle for the
section-based one.
"""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softltlf.errors import BoundsError, ShapeError
from softltlf.tensor import (
    Tensor,
    backsubt,
    binop,
    capacity,
    flatten,
    lookup,
    replicate,
    subt,
    subt_recursive,
    unflatten,
    unop,
)

# Shapes stay small enough that exhaustive loops are instant but still cover
# order 0, degenerate axes, and orders the rest of the package relies on (2-4).
SMALL_SHAPES = [(), (1,), (4,), (2, 3), (3, 2), (2, 3, 4), (6, 22, 3), (2, 1, 3, 2)]

shapes = st.lists(st.integers(min_value=0, max_value=6), min_size=0, max_size=4).map(tuple)
nonempty_shapes = shapes.filter(lambda d: capacity(d) > 0)


def arange_tensor(dims):
    return Tensor(dims, tuple(float(i) for i in range(capacity(dims))))


class TestFlattenUnflatten:
    def test_hand_checked_values(self):
        assert flatten((1, 1), (2, 3)) == 4
        assert flatten((0, 0, 0), (4, 5, 6)) == 0
        assert flatten((2, 17, 1), (6, 22, 3)) == 184

    def test_unflatten_hand_checked(self):
        assert unflatten(5, (2, 3)) == (1, 2)
        assert unflatten(0, (7, 7)) == (0, 0)

    def test_round_trip_exhaustive_2_3_4(self):
        for m in range(24):
            assert flatten(unflatten(m, (2, 3, 4)), (2, 3, 4)) == m

    def test_order_zero(self):
        assert flatten((), ()) == 0
        assert unflatten(0, ()) == ()

    @given(shape=nonempty_shapes, data=st.data())
    def test_round_trip_random_shapes(self, shape, data):
        m = data.draw(st.integers(min_value=0, max_value=capacity(shape) - 1))
        idx = unflatten(m, shape)
        assert len(idx) == len(shape)
        assert all(0 <= i < d for i, d in zip(idx, shape))
        assert flatten(idx, shape) == m

    def test_bounds_errors(self):
        with pytest.raises(BoundsError):
            flatten((2, 0), (2, 3))
        with pytest.raises(ShapeError):
            flatten((0,), (2, 3))
        with pytest.raises(BoundsError):
            unflatten(6, (2, 3))
        with pytest.raises(BoundsError):
            unflatten(0, (2, 0))


class TestConstruction:
    def test_rejects_wrong_element_count(self):
        with pytest.raises(ShapeError):
            Tensor((2, 3), (1.0, 2.0))

    def test_rejects_negative_axis(self):
        with pytest.raises(ShapeError):
            Tensor((-1,), ())

    def test_order_zero_scalar(self):
        t = Tensor((), (7.5,))
        assert t.order == 0
        assert t.capacity == 1
        assert t.item() == 7.5

    def test_item_requires_order_zero(self):
        with pytest.raises(ShapeError):
            Tensor((1,), (1.0,)).item()

    def test_degenerate_axis(self):
        t = Tensor((0, 3), ())
        assert t.capacity == 0


class TestLookup:
    def test_last_element(self):
        t = arange_tensor((2, 3))
        assert lookup((1, 2), t) == 5.0

    def test_first_element(self):
        t = arange_tensor((4, 2))
        assert lookup((0, 0), t) == 0.0

    def test_lookup_unflatten_composition(self):
        for dims in SMALL_SHAPES:
            t = arange_tensor(dims)
            for k in range(t.capacity):
                assert lookup(unflatten(k, dims), t) == t.elems[k]

    def test_out_of_bounds(self):
        with pytest.raises(BoundsError):
            lookup((2, 0), arange_tensor((2, 3)))


class TestPointwise:
    def test_unop_negation(self):
        t = replicate((2, 2), False)
        out = unop(lambda x: not x, t)
        assert out.dims == (2, 2)
        assert out.elems == (True, True, True, True)

    def test_unop_identity(self):
        t = arange_tensor((3, 2))
        assert unop(lambda x: x, t) == t

    def test_unop_double(self):
        assert unop(lambda x: 2 * x, Tensor((2,), (1.0, 3.0))) == Tensor((2,), (2.0, 6.0))

    def test_binop_add(self):
        out = binop(lambda a, b: a + b, Tensor((2,), (1.0, 2.0)), Tensor((2,), (10.0, 20.0)))
        assert out == Tensor((2,), (11.0, 22.0))

    def test_binop_and_identity(self):
        t = Tensor((4,), (True, False, True, False))
        assert binop(lambda a, b: a and b, t, replicate((4,), True)) == t

    def test_binop_shape_mismatch(self):
        with pytest.raises(ShapeError):
            binop(lambda a, b: a, arange_tensor((2, 3)), arange_tensor((3, 2)))


class TestSubt:
    def test_fixed_prefix_section(self):
        t = arange_tensor((6, 22, 3))
        out = subt((2, 17), t)
        assert out.dims == (3,)
        expected = tuple(float(flatten((2, 17, k), (6, 22, 3))) for k in range(3))
        assert out.elems == expected == (183.0, 184.0, 185.0)

    def test_empty_prefix_is_identity(self):
        t = arange_tensor((2, 3))
        assert subt((), t) == t

    def test_matches_recursive_form_on_random_pairs(self):
        rng = random.Random(414)
        for _ in range(500):
            order = rng.randint(0, 4)
            dims = tuple(rng.randint(0, 5) for _ in range(order))
            t = arange_tensor(dims)
            m = rng.randint(0, order)
            if any(d == 0 for d in dims[:m]):
                continue  # no valid prefix exists
            prefix = tuple(rng.randrange(d) for d in dims[:m])
            assert subt(prefix, t) == subt_recursive(prefix, t)

    @given(shape=nonempty_shapes, data=st.data())
    def test_lookup_commutes_with_subt(self, shape, data):
        t = arange_tensor(shape)
        m = data.draw(st.integers(min_value=0, max_value=len(shape)))
        prefix = tuple(data.draw(st.integers(min_value=0, max_value=d - 1)) for d in shape[:m])
        rest = tuple(data.draw(st.integers(min_value=0, max_value=d - 1)) for d in shape[m:])
        assert lookup(rest, subt(prefix, t)) == lookup(prefix + rest, t)

    def test_invalid_prefix(self):
        t = arange_tensor((2, 3))
        with pytest.raises(BoundsError):
            subt((2,), t)
        with pytest.raises(ShapeError):
            subt((0, 0, 0), t)


class TestBacksubt:
    def test_indicator_support(self):
        t = arange_tensor((6, 22, 3))
        ind = backsubt((2, 17), t)
        assert ind.dims == t.dims
        for m in range(t.capacity):
            i = unflatten(m, t.dims)
            expected = 1.0 if i[:2] == (2, 17) else 0.0
            assert ind.elems[m] == expected

    def test_empty_prefix_all_ones(self):
        t = arange_tensor((2, 3))
        assert backsubt((), t) == replicate((2, 3), 1.0)

    def test_support_count(self):
        rng = random.Random(415)
        for _ in range(100):
            order = rng.randint(1, 4)
            dims = tuple(rng.randint(1, 5) for _ in range(order))
            m = rng.randint(0, order)
            prefix = tuple(rng.randrange(d) for d in dims[:m])
            ind = backsubt(prefix, arange_tensor(dims))
            assert sum(ind.elems) == capacity(dims[m:])


class TestReplicate:
    def test_filled(self):
        assert replicate((2, 2), 0.0) == Tensor((2, 2), (0.0, 0.0, 0.0, 0.0))

    def test_scalar(self):
        assert replicate((), 3.5).item() == 3.5

    def test_degenerate(self):
        assert replicate((0,), 1.0).capacity == 0
