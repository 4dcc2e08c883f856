"""Tests for normal-matrix factorizations and distribution realization."""

import math

import numpy as np
import pytest

from commutator_lab.exceptions import NormalityViolation, SumNotZero, TraceNotZero
from commutator_lab.factorization import Method
from commutator_lab.matcore import commutator, haar_unitary, operator_norm, random_normal_traceless
from commutator_lab.normalfact import (
    DiscreteMeasure,
    approximate_measure,
    centered_projection,
    centered_projection_factorization,
    cyclic_shift,
    factor_diagonal_cyclic,
    factor_normal,
    largest_remainder_counts,
    partial_sum_diagonal,
    realize_distribution,
    shift_matrix,
)

SQRT5_HALF = math.sqrt(5) / 2


class TestBuildingBlocks:
    """Tests for shifts and partial sums."""

    def test_shift_is_nilpotent(self):
        """S^n = 0 and S^(n-1) != 0."""
        s = shift_matrix(4)
        assert np.any(np.linalg.matrix_power(s, 3))
        assert not np.any(np.linalg.matrix_power(s, 4))

    def test_cyclic_shift_is_unitary(self):
        """The wraparound shift is a permutation unitary."""
        u = cyclic_shift(5)
        np.testing.assert_array_equal(u.conj().T @ u, np.eye(5))
        assert u[0, 1] == 1 and u[4, 0] == 1

    def test_partial_sums(self):
        """Partial sums end in an exact zero."""
        d = partial_sum_diagonal([1, -2, 1])
        np.testing.assert_array_equal(np.diag(d), [1, -1, 0])

    def test_partial_sums_need_zero_sum(self):
        """A nonzero total is rejected."""
        with pytest.raises(SumNotZero):
            partial_sum_diagonal([1, 1])


class TestFactorNormal:
    """Tests for factor_normal."""

    def test_diag_one_minus_one(self):
        """diag(1, -1) = [B, C] with ||B|| ||C|| <= sqrt(5)/2."""
        a = np.diag([1.0, -1.0])
        f = factor_normal(a)
        np.testing.assert_allclose(commutator(f.b, f.c), a, atol=1e-14)
        assert f.method is Method.NORMAL_SHIFT
        assert f.norm_product <= SQRT5_HALF + 1e-12

    @pytest.mark.parametrize("n", [2, 3, 5, 8])
    def test_random_within_sqrt5_half(self, n):
        """Small random normal matrices meet the optimal-order bound."""
        a = random_normal_traceless(n, seed=n)
        f = factor_normal(a)
        assert f.residual_op <= 1e-10 * operator_norm(a)
        assert operator_norm(f.b) <= 1 + 1e-12
        assert f.norm_product <= SQRT5_HALF * operator_norm(a) + 1e-9
        assert f.certificate is not None

    def test_larger_within_two(self):
        """Beyond the exhaustive limit the greedy order meets factor 2."""
        a = random_normal_traceless(24, seed=24)
        f = factor_normal(a)
        assert f.residual_op <= 1e-9 * operator_norm(a)
        assert f.norm_product <= 2 * operator_norm(a) + 1e-8

    def test_one_by_one(self):
        """The 1x1 zero matrix factors trivially."""
        f = factor_normal([[0.0]])
        assert f.residual_op == 0.0

    def test_near_traceless_input_centered(self):
        """A trace at rounding level is removed before factoring."""
        a = np.diag([1.0, -1.0 + 1e-12])
        f = factor_normal(a)
        assert abs(np.trace(f.target)) < 1e-15

    def test_trace_rejected(self):
        """Matrices with a real trace are refused."""
        with pytest.raises(TraceNotZero):
            factor_normal(np.diag([1.0, 1.0]))

    def test_non_normal_rejected(self):
        """The shift is not normal."""
        with pytest.raises(NormalityViolation):
            factor_normal(shift_matrix(3))

    def test_unitarily_invariant(self):
        """Conjugating the input does not change the norm product."""
        a = np.diag([2.0, -1.0, -1.0]).astype(np.complex128)
        u = haar_unitary(3, seed=6)
        direct = factor_normal(a)
        rotated = factor_normal(u @ a @ u.conj().T)
        assert rotated.norm_product == pytest.approx(direct.norm_product, rel=1e-9)


class TestCenteredProjections:
    """Tests for p - tau(p) factorizations."""

    @pytest.mark.parametrize("n,k", [(3, 1), (5, 2), (6, 3)])
    def test_factorization(self, n, k):
        """Centered projections factor within the sqrt(5)/2 bound."""
        f = centered_projection_factorization(n, k)
        a = centered_projection(n, k)
        np.testing.assert_allclose(commutator(f.b, f.c), a, atol=1e-12)
        assert f.norm_product <= SQRT5_HALF * operator_norm(a) + 1e-12

    def test_invalid_rank(self):
        """k must lie strictly between 0 and n."""
        with pytest.raises(ValueError):
            centered_projection(3, 3)


class TestDistributions:
    """Tests for discrete measures and their finite realizations."""

    def test_measure_validation(self):
        """Weights must be positive and sum to one; atoms must be distinct."""
        with pytest.raises(ValueError):
            DiscreteMeasure((1, -1), (0.5, 0.6))
        with pytest.raises(ValueError):
            DiscreteMeasure((1, 1), (0.5, 0.5))
        with pytest.raises(ValueError):
            DiscreteMeasure((1, -1), (1.0, 0.0))

    def test_largest_remainder(self):
        """Counts sum to n with remainders broken by order."""
        np.testing.assert_array_equal(largest_remainder_counts([1 / 3, 1 / 3, 1 / 3], 4), [2, 1, 1])
        np.testing.assert_array_equal(largest_remainder_counts([0.5, 0.5], 8), [4, 4])

    def test_uncentered_measure_rejected(self):
        """Only mean-zero measures are realizable."""
        with pytest.raises(SumNotZero):
            approximate_measure(DiscreteMeasure((1, 0), (0.5, 0.5)), 4)

    def test_too_few_points(self):
        """n must cover every atom."""
        mu = DiscreteMeasure((1, 1j, -1, -1j), (0.25,) * 4)
        with pytest.raises(ValueError):
            approximate_measure(mu, 3)

    def test_uneven_split_is_recentered(self):
        """A split that breaks the mean is corrected to sum zero."""
        mu = DiscreteMeasure.centered_projection_measure(3, 1)
        values = approximate_measure(mu, 4)
        assert abs(values.sum()) < 1e-14

    def test_fourth_roots_realized(self):
        """The spectrum of [U, U^* D] is the tuple, with U unitary."""
        mu = DiscreteMeasure((1, 1j, -1, -1j), (0.25,) * 4)
        realization = realize_distribution(mu, 8)
        f = realization.factorization
        assert f.method is Method.CYCLIC_UNITARY
        assert realization.correction == 0.0
        np.testing.assert_array_equal(realization.counts, [2, 2, 2, 2])
        np.testing.assert_allclose(f.b.conj().T @ f.b, np.eye(8), atol=1e-15)
        np.testing.assert_allclose(commutator(f.b, f.c), f.target, atol=1e-14)
        assert realization.certificate.prefix_max <= SQRT5_HALF + 1e-12

    def test_diagonal_cyclic_orders_values(self):
        """The target is diag of the rearranged tuple."""
        f = factor_diagonal_cyclic([1, 1, -1, -1])
        assert sorted(np.diag(f.target).real) == [-1, -1, 1, 1]
        assert f.certificate.prefix_max == pytest.approx(1.0)
