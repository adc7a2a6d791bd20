"""Smooth kernel formulas, stability, and derivative/finite-difference agreement."""

import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from softltlf.smoothing import (
    LN2,
    Gamma,
    dgaussian_gamma,
    dmax_gamma,
    dmin_gamma,
    gaussian_gamma,
    max_gamma,
    min_gamma,
)
from softltlf.tensor import Tensor

REL_TOL_STABLE_VS_NAIVE = 1e-12
REL_TOL_FD = 1e-6

# Magnitudes where the naive log-sum-exp is still finite (|a|/gamma < ~709).
finite_operands = st.floats(min_value=-30, max_value=30)
moderate_gammas = st.floats(min_value=0.05, max_value=2.0)


def scalar(x):
    return Tensor((), (x,))


def central_diff(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


class TestPrimalForms:
    def test_tie_case(self):
        for a, g in [(0.0, 0.5), (-3.25, 0.01), (7.0, 1.0)]:
            assert max_gamma(a, a, g) == pytest.approx(a + g * LN2, rel=1e-12)
            assert min_gamma(a, a, g) == pytest.approx(a - g * LN2, rel=1e-12)

    def test_hard_cases(self):
        assert max_gamma(3.0, 7.0, Gamma(-1.0)) == 7.0
        assert max_gamma(3.0, 7.0, 0.0) == 7.0
        assert min_gamma(3.0, 7.0, Gamma(0.0)) == 3.0

    def test_hand_value(self):
        # 0.5 * ln(1 + e^2), from the definition at comfortable magnitudes
        assert max_gamma(0.0, 1.0, 0.5) == pytest.approx(1.0634, abs=1e-4)
        assert max_gamma(0.0, 1.0, 0.5) == pytest.approx(
            0.5 * math.log(1.0 + math.exp(2.0)), rel=1e-12
        )

    def test_gaussian_values(self):
        assert gaussian_gamma(0.0, 0.1) == 1.0
        assert gaussian_gamma(5.0, Gamma(-1.0)) == 0.0
        assert gaussian_gamma(0.0, Gamma(0.0)) == 1.0
        assert gaussian_gamma(0.1, 0.1) == pytest.approx(math.exp(-0.5), rel=1e-12)

    @given(a=finite_operands, b=finite_operands, g=moderate_gammas)
    def test_stable_equals_naive_where_finite(self, a, b, g):
        naive = max_gamma(a, b, Gamma(g, "naive"))
        stable = max_gamma(a, b, Gamma(g, "stable"))
        assert math.isfinite(naive)
        assert stable == pytest.approx(naive, rel=REL_TOL_STABLE_VS_NAIVE)

    @given(a=finite_operands, b=finite_operands, g=moderate_gammas)
    def test_min_stable_equals_naive_where_finite(self, a, b, g):
        naive = min_gamma(a, b, Gamma(g, "naive"))
        stable = min_gamma(a, b, Gamma(g, "stable"))
        assert math.isfinite(naive)
        assert stable == pytest.approx(naive, rel=REL_TOL_STABLE_VS_NAIVE)

    def test_min_is_negated_max_on_random_triples(self):
        rng = random.Random(77)
        for _ in range(1000):
            a = rng.uniform(-50, 50)
            b = rng.uniform(-50, 50)
            g = rng.uniform(1e-4, 2.0)
            assert min_gamma(a, b, g) == -max_gamma(-a, -b, g)

    @given(a=finite_operands, b=finite_operands, g=moderate_gammas)
    def test_bounding(self, a, b, g):
        hard = max(a, b)
        soft = max_gamma(a, b, g)
        assert hard <= soft <= hard + g * LN2 + 1e-15
        hard_min = min(a, b)
        soft_min = min_gamma(a, b, g)
        assert hard_min - g * LN2 - 1e-15 <= soft_min <= hard_min

    def test_convergence_as_gamma_shrinks(self):
        a, b = 0.7, 0.9
        previous_gap = None
        for g in [1.0, 0.1, 0.01, 0.001, 1e-6]:
            gap = abs(max_gamma(a, b, g) - max(a, b))
            assert gap <= g * LN2 + 1e-15
            if previous_gap is not None:
                assert gap <= previous_gap
            previous_gap = gap
        assert previous_gap <= 1e-6

    def test_invalid_kernel_mode(self):
        with pytest.raises(ValueError):
            Gamma(0.1, "fast")


class TestStability:
    def test_stable_finite_on_extreme_grid(self):
        g = Gamma(1e-3)
        hard_tol = 1e-3 * LN2
        naive_blew_up = False
        for i in range(100):
            a = -10 + 20 * i / 99
            for j in range(100):
                b = -10 + 20 * j / 99
                soft = max_gamma(a, b, g)
                assert math.isfinite(soft)
                assert abs(soft - max(a, b)) <= hard_tol + 1e-15
                soft_min = min_gamma(a, b, g)
                assert math.isfinite(soft_min)
                assert abs(soft_min - min(a, b)) <= hard_tol + 1e-15
                # math.exp raises instead of returning inf, so a raise counts
                # as the naive kernel blowing up
                try:
                    if not math.isfinite(max_gamma(a, b, Gamma(1e-3, "naive"))):
                        naive_blew_up = True
                except (OverflowError, ValueError):
                    naive_blew_up = True
        assert naive_blew_up


class TestDerivativeKernels:
    def test_tie_weights_sum_to_one(self):
        out = dmax_gamma(2.0, scalar(1.0), 2.0, scalar(1.0), 0.5)
        assert out.item() == 1.0
        out = dmin_gamma(2.0, scalar(1.0), 2.0, scalar(1.0), 0.5)
        assert out.item() == 1.0

    def test_saturation(self):
        g = 0.01
        a, b = 1.0, 1.0 - 100 * g
        assert dmax_gamma(a, scalar(1.0), b, scalar(0.0), g).item() == pytest.approx(1.0, abs=1e-10)
        assert dmin_gamma(b, scalar(1.0), a, scalar(0.0), g).item() == pytest.approx(1.0, abs=1e-10)

    def test_dmax_matches_finite_difference(self):
        rng = random.Random(78)
        for _ in range(300):
            a = rng.uniform(-5, 5)
            b = rng.uniform(-5, 5)
            g = rng.choice([0.5, 0.05, 0.01])
            h = 1e-6 * max(1.0, abs(a))
            fd = central_diff(lambda x: max_gamma(x, b, g), a, h)
            an = dmax_gamma(a, scalar(1.0), b, scalar(0.0), g).item()
            assert an == pytest.approx(fd, rel=REL_TOL_FD, abs=1e-9)

    def test_dmin_matches_finite_difference(self):
        rng = random.Random(79)
        for _ in range(300):
            a = rng.uniform(-5, 5)
            b = rng.uniform(-5, 5)
            g = rng.choice([0.5, 0.05, 0.01])
            h = 1e-6 * max(1.0, abs(b))
            fd = central_diff(lambda x: min_gamma(a, x, g), b, h)
            an = dmin_gamma(a, scalar(0.0), b, scalar(1.0), g).item()
            assert an == pytest.approx(fd, rel=REL_TOL_FD, abs=1e-9)

    def test_dgaussian_stationary_point(self):
        assert dgaussian_gamma(0.0, scalar(123.0), 0.1).item() == 0.0

    def test_dgaussian_hand_value(self):
        g = 0.2
        expected = -(1.0 / g) * math.exp(-0.5)
        assert dgaussian_gamma(g, scalar(1.0), g).item() == pytest.approx(expected, rel=1e-12)

    def test_dgaussian_matches_finite_difference(self):
        rng = random.Random(80)
        for _ in range(300):
            a = rng.uniform(-1, 1)
            g = rng.choice([0.5, 0.1, 0.05])
            h = 1e-6 * max(1.0, abs(a))
            fd = central_diff(lambda x: gaussian_gamma(x, g), a, h)
            an = dgaussian_gamma(a, scalar(1.0), g).item()
            assert an == pytest.approx(fd, rel=REL_TOL_FD, abs=1e-9)

    def test_hard_subgradient_conventions(self):
        da, db = scalar(10.0), scalar(20.0)
        assert dmax_gamma(2.0, da, 2.0, db, 0.0).item() == 10.0  # tie -> first
        assert dmax_gamma(1.0, da, 2.0, db, 0.0).item() == 20.0
        assert dmax_gamma(3.0, da, 2.0, db, Gamma(-1.0)).item() == 10.0
        assert dmin_gamma(2.0, da, 2.0, db, 0.0).item() == 10.0  # tie -> first
        assert dmin_gamma(1.0, da, 2.0, db, 0.0).item() == 10.0
        assert dmin_gamma(3.0, da, 2.0, db, 0.0).item() == 20.0
        assert dgaussian_gamma(0.0, scalar(5.0), 0.0).item() == 0.0
        assert dgaussian_gamma(1.0, scalar(5.0), -2.0).item() == 0.0

    def test_gradient_tensor_shapes(self):
        da = Tensor((2,), (1.0, 2.0))
        db = Tensor((2,), (3.0, 4.0))
        out = dmax_gamma(1.0, da, 1.0, db, 0.5)
        assert out.dims == (2,)
        assert out.elems == (2.0, 3.0)
