"""Tests for the dense matrix primitives."""

import numpy as np
import pytest
from scipy.sparse.linalg import aslinearoperator

from commutator_lab.config import Tolerances
from commutator_lab.exceptions import (
    DimensionMismatch,
    NilpotencyViolation,
    NonConvergence,
    NormalityViolation,
    TraceNotZero,
)
from commutator_lab.matcore import (
    as_matrix,
    center_trace,
    commutator,
    haar_unitary,
    kernel_staircase,
    kernel_with_gap,
    l2_norm,
    nilpotency_index,
    normality_defect,
    normalized_trace,
    numerical_kernel,
    operator_norm,
    power_iteration_norm,
    random_nilpotent,
    random_normal_traceless,
    random_strictly_upper,
    random_traceless,
    schur_strict_triangularize,
    spectral_decomposition_normal,
)


def jordan(n):
    return np.eye(n, k=1, dtype=np.complex128)


class TestBasics:
    """Tests for arithmetic and norms."""

    def test_as_matrix_rejects_non_square(self):
        """Non-square and empty inputs are dimension errors."""
        with pytest.raises(DimensionMismatch):
            as_matrix(np.zeros((2, 3)))
        with pytest.raises(DimensionMismatch):
            as_matrix(np.zeros((0, 0)))

    def test_as_matrix_rejects_nan(self):
        """Non-finite entries are rejected."""
        with pytest.raises(ValueError):
            as_matrix([[1.0, np.nan], [0.0, 1.0]])

    def test_commutator_of_pauli_matrices(self):
        """[X, Y] = 2iZ."""
        x = np.array([[0, 1], [1, 0]])
        y = np.array([[0, -1j], [1j, 0]])
        z = np.array([[1, 0], [0, -1]])
        np.testing.assert_allclose(commutator(x, y), 2j * z)

    def test_commutator_shape_mismatch(self):
        """Factors of different size cannot be combined."""
        with pytest.raises(DimensionMismatch):
            commutator(np.eye(2), np.eye(3))

    def test_normalized_trace_and_l2(self):
        """tau(I) = 1 and ||I||_2 = 1 for the normalized trace."""
        assert normalized_trace(np.eye(5)) == pytest.approx(1.0)
        assert l2_norm(np.eye(5)) == pytest.approx(1.0)
        assert l2_norm(np.diag([2.0, 0.0])) == pytest.approx(np.sqrt(2.0))

    def test_operator_norm_dense(self):
        """The operator norm is the largest singular value."""
        assert operator_norm(np.diag([3.0, -4.0, 1.0])) == pytest.approx(4.0)
        assert operator_norm(jordan(4)) == pytest.approx(1.0)


class TestPowerIteration:
    """Tests for the matrix-free norm estimate."""

    def test_matches_dense_norm(self):
        """Power iteration agrees with the SVD on a random matrix."""
        x = random_traceless(12, seed=3)
        estimate = power_iteration_norm(x, rel_tol=1e-12, max_iter=20000)
        assert estimate == pytest.approx(np.linalg.norm(x, 2), rel=1e-5)

    def test_lower_bound_at_start_vector(self):
        """The estimate dominates |<Ax, x>| for the start vector."""
        x = np.diag([1.0, 0.5, 0.25]).astype(np.complex128)
        start = np.ones(3) / np.sqrt(3)
        estimate = power_iteration_norm(aslinearoperator(x), rel_tol=1e-10, start=start)
        assert estimate >= abs(start @ x @ start) - 1e-15

    def test_zero_operator(self):
        """The zero operator has norm 0."""
        assert power_iteration_norm(np.zeros((4, 4)), rel_tol=1e-9) == 0.0

    def test_nonconvergence_carries_best_estimate(self):
        """Hitting the cap raises with the best estimate so far."""
        x = np.diag([1.0, 0.999999]).astype(np.complex128)
        with pytest.raises(NonConvergence) as info:
            power_iteration_norm(x, rel_tol=1e-16, max_iter=2, start=[1.0, 1.0])
        assert 0 < info.value.best_estimate <= 1.0
        assert info.value.iterations == 2

    def test_zero_start_rejected(self):
        """A zero start vector cannot be normalized."""
        with pytest.raises(ValueError):
            power_iteration_norm(np.eye(2), rel_tol=1e-9, start=[0.0, 0.0])


class TestTraceAndNormality:
    """Tests for centering and spectral decomposition."""

    def test_center_trace_removes_rounding(self):
        """A negligible trace is subtracted exactly."""
        x = np.diag([1.0, -1.0 + 1e-12]).astype(np.complex128)
        centered = center_trace(x)
        assert abs(np.trace(centered)) < 1e-15

    def test_center_trace_rejects_large_trace(self):
        """A trace above tolerance is rejected with its value."""
        with pytest.raises(TraceNotZero) as info:
            center_trace(np.diag([1.0, 0.0]))
        assert info.value.trace == pytest.approx(0.5)

    def test_normality_defect(self):
        """Normal matrices have zero defect; the shift does not."""
        assert normality_defect(np.diag([1, 1j, -1 - 1j])) == 0.0
        assert normality_defect(jordan(2)) == pytest.approx(1.0)

    def test_spectral_decomposition_reconstructs(self):
        """x = U diag(lambda) U^* for a random normal matrix."""
        x = random_normal_traceless(7, seed=11)
        data = spectral_decomposition_normal(x)
        np.testing.assert_allclose(data.reconstruct(), x, atol=1e-12)
        np.testing.assert_allclose(data.unitary.conj().T @ data.unitary, np.eye(7), atol=1e-12)

    def test_eigenvalues_sorted_descending(self):
        """Eigenvalues are ordered by real part, then imaginary part, descending."""
        data = spectral_decomposition_normal(np.diag([-1, 1j, 1, -1j]))
        np.testing.assert_array_equal(data.values, [1, 1j, -1j, -1])

    def test_hermitian_path(self):
        """Hermitian inputs yield real eigenvalues."""
        x = np.array([[0, 1], [1, 0]], dtype=np.complex128)
        data = spectral_decomposition_normal(x)
        np.testing.assert_allclose(data.values, [1, -1], atol=1e-14)

    def test_non_normal_rejected(self):
        """The shift is not normal."""
        with pytest.raises(NormalityViolation):
            spectral_decomposition_normal(jordan(3))


class TestNilpotency:
    """Tests for nilpotency checks and triangularization."""

    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_jordan_index(self, n):
        """J_n has nilpotency index n."""
        assert nilpotency_index(jordan(n)) == n

    def test_zero_matrix_index(self):
        """The zero matrix has index 1."""
        assert nilpotency_index(np.zeros((3, 3))) == 1

    def test_non_nilpotent(self):
        """A matrix with a nonzero eigenvalue has no index."""
        assert nilpotency_index(np.diag([1.0, -1.0])) is None

    def test_triangularize_strictly_upper_unchanged(self):
        """Strictly upper triangular input comes back as is."""
        t = random_strictly_upper(5, seed=2)
        unitary, upper = schur_strict_triangularize(t)
        np.testing.assert_array_equal(unitary, np.eye(5))
        np.testing.assert_array_equal(upper, t)

    def test_triangularize_random_nilpotent(self):
        """U^* t U is strictly upper triangular up to rounding."""
        t = random_nilpotent(6, seed=5)
        unitary, upper = schur_strict_triangularize(t)
        assert np.all(np.tril(upper) == 0)
        np.testing.assert_allclose(unitary @ upper @ unitary.conj().T, t, atol=1e-10)

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [24, 64, 128])
    def test_triangularize_large_nilpotent(self, n):
        """Large conjugated nilpotents triangularize at rounding level."""
        t = random_nilpotent(n, seed=n)
        unitary, upper = schur_strict_triangularize(t)
        np.testing.assert_allclose(unitary.conj().T @ unitary, np.eye(n), atol=1e-10)
        assert not np.any(np.tril(upper))
        assert operator_norm(unitary @ upper @ unitary.conj().T - t) <= 1e-10 * operator_norm(t)

    def test_kernel_staircase_dimensions(self):
        """J2 + J1 has kernel increments of dimension 2 then 1."""
        t = np.zeros((3, 3), dtype=np.complex128)
        t[0, 1] = 1
        chain = kernel_staircase(t, cutoff=1e-12)
        assert [q.shape[1] for q in chain] == [2, 1]
        np.testing.assert_allclose(np.column_stack(chain).conj().T @ np.column_stack(chain), np.eye(3), atol=1e-12)

    def test_triangularize_rejects_non_nilpotent(self):
        """A non-nilpotent input fails with its dominant eigenvalue."""
        with pytest.raises(NilpotencyViolation) as info:
            schur_strict_triangularize(np.diag([2.0, -2.0]))
        assert abs(info.value.eigenvalue) == pytest.approx(2.0)


class TestKernels:
    """Tests for numerical rank helpers."""

    def test_kernel_of_shift_is_first_basis_vector(self):
        """ker J_n is spanned by e_1."""
        basis = numerical_kernel(jordan(4))
        assert basis.shape == (4, 1)
        assert abs(basis[0, 0]) == pytest.approx(1.0)

    def test_kernel_of_zero_is_everything(self):
        """The zero matrix has a full kernel."""
        np.testing.assert_array_equal(numerical_kernel(np.zeros((3, 3))), np.eye(3))

    def test_gap_ratio(self):
        """The gap is the ratio across the cutoff."""
        basis, gap = kernel_with_gap(np.diag([1.0, 1e-3, 1e-12]), cutoff=1e-9)
        assert basis.shape[1] == 1
        assert gap == pytest.approx(1e9)


class TestGenerators:
    """Tests for seeded random matrices."""

    def test_haar_unitary_is_unitary(self):
        """Haar samples are unitary."""
        u = haar_unitary(6, seed=0)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(6), atol=1e-12)

    def test_seeded_generators_reproducible(self):
        """The same seed yields the same matrix."""
        np.testing.assert_array_equal(random_traceless(4, seed=9), random_traceless(4, seed=9))

    def test_generated_matrices_traceless(self):
        """Random normal and general samples are traceless."""
        assert abs(np.trace(random_normal_traceless(5, seed=1))) < 1e-12
        assert abs(np.trace(random_traceless(5, seed=1))) < 1e-12

    def test_tolerances_flow_through(self):
        """A looser residual threshold accepts a larger trace."""
        x = np.diag([1.0, -1.0 + 1e-6]).astype(np.complex128)
        with pytest.raises(TraceNotZero):
            center_trace(x)
        center_trace(x, Tolerances(residual_rel=1e-5))

    def test_strictly_upper_structure(self):
        """The superdiagonal dominates and the entries fall off away from it."""
        n = 40
        a = random_strictly_upper(n, seed=4)
        assert not np.any(np.tril(a))
        superdiagonal = np.abs(np.diag(a, 1))
        assert np.all((superdiagonal >= 1) & (superdiagonal <= 2))
        for d in range(2, n):
            assert np.all(np.abs(np.diag(a, d)) <= 0.25 / d**2)

    def test_strictly_upper_kernels_well_separated(self):
        """Dropping the first column and last row leaves a well-conditioned block."""
        a = random_strictly_upper(128, seed=11)
        singular = np.linalg.svd(a[:-1, 1:], compute_uv=False)
        assert singular[-1] >= 0.8
