"""Tests for tensor-leg operators and their commutator identity."""

import csv
import io

import numpy as np
import pytest

from commutator_lab.exceptions import CoefficientMismatch
from commutator_lab.matcore import commutator
from commutator_lab.tucci import (
    DENSE_CAP,
    E,
    I2,
    ScanRow,
    TensorOperator,
    TucciConfig,
    TucciMode,
    b_l2_formula_check,
    build_A,
    build_B,
    build_V,
    c_lower_bound_certificate,
    conditional_projection_check,
    flat_vector_expectation,
    norm_scan,
    tucci_commutator_identity,
    write_scan_csv,
)


class TestTensorOperator:
    """Tests for the symbolic operator algebra."""

    def test_leg_one_is_first_kronecker_factor(self):
        """V_1 on two legs is e (x) I."""
        np.testing.assert_array_equal(build_V(1, 2).to_dense(), np.kron(E, I2))
        np.testing.assert_array_equal(build_V(2, 2).to_dense(), np.kron(I2, E))

    def test_apply_matches_dense(self):
        """Matrix-free application agrees with the dense matrix, also on batches."""
        rng = np.random.default_rng(0)
        op = build_A(rng.standard_normal(4), 4) + build_B(rng.standard_normal(4), 4)
        x = rng.standard_normal((16, 3)) + 1j * rng.standard_normal((16, 3))
        np.testing.assert_allclose(op.apply(x), op.to_dense() @ x, atol=1e-13)
        np.testing.assert_allclose(op.apply(x[:, 0]), op.to_dense() @ x[:, 0], atol=1e-13)

    def test_product_and_adjoint(self):
        """Symbolic products and adjoints match their dense versions."""
        a, b = build_V(1, 3), build_B([1.0, 2.0, 3.0], 3)
        np.testing.assert_allclose((a @ b).to_dense(), a.to_dense() @ b.to_dense())
        np.testing.assert_allclose(a.adjoint().to_dense(), a.to_dense().conj().T)

    def test_per_leg_relations(self):
        """[V_m V_m^*, V_n] equals V_n when m = n and vanishes otherwise."""
        depth = 3
        for m in range(1, depth + 1):
            projection = build_B(np.eye(depth)[m - 1], depth).to_dense()
            for n in range(1, depth + 1):
                v = build_V(n, depth).to_dense()
                expected = v if m == n else np.zeros_like(v)
                np.testing.assert_array_equal(commutator(projection, v), expected)

    def test_l2_of_leg(self):
        """||V_n||_2^2 = tau(V_n^* V_n) = 1/2."""
        assert build_V(2, 4).l2_norm() ** 2 == pytest.approx(0.5)

    def test_dense_cap(self):
        """Materializing beyond the cap is refused."""
        with pytest.raises(ValueError):
            build_V(1, DENSE_CAP + 1).to_dense()

    def test_bad_leg(self):
        """Leg indices run from 1 to depth."""
        with pytest.raises(IndexError):
            build_V(0, 3)
        with pytest.raises(IndexError):
            build_V(4, 3)

    def test_diagonal_operator(self):
        """B is diagonal with entries sum of b_n over the legs in state 0."""
        op = build_B([1.0, 2.0], 2)
        assert op.is_diagonal()
        np.testing.assert_allclose(op.diagonal(), [3, 1, 2, 0])


class TestIdentity:
    """Tests for A = [B, C] on finite truncations."""

    @pytest.mark.parametrize("depth", [1, 2, 4, 6])
    def test_dense_identity(self, depth):
        """The square-root split satisfies the identity to rounding."""
        report = tucci_commutator_identity(TucciConfig.power_law(1.5, depth))
        assert report.residual_op <= 1e-12
        assert report.coefficient_defect <= 1e-15

    def test_matrix_free_identity(self):
        """Beyond the dense cap the identity is checked matrix-free."""
        cfg = TucciConfig.power_law(2.0, DENSE_CAP + 1, TucciMode.MATRIX_FREE)
        report = tucci_commutator_identity(cfg)
        assert report.mode is TucciMode.MATRIX_FREE
        assert report.residual_op <= 1e-12

    def test_dense_mode_capped(self):
        """Dense configurations deeper than the cap are rejected."""
        with pytest.raises(ValueError):
            TucciConfig.power_law(1.5, DENSE_CAP + 1, TucciMode.DENSE)

    def test_mismatched_split(self):
        """Strict mode refuses a_n != b_n c_n; lenient mode reports the gap."""
        cfg = TucciConfig(3, a=[1.0, 1.0, 1.0], b=[1.0, 1.0, 1.0], c=[1.0, 1.0, 0.5])
        with pytest.raises(CoefficientMismatch):
            tucci_commutator_identity(cfg)
        report = tucci_commutator_identity(cfg, strict=False)
        assert report.residual_op == pytest.approx(0.5)
        assert report.coefficient_defect == pytest.approx(0.5)


class TestChecks:
    """Tests for the trace and norm checks."""

    def test_flat_expectation(self):
        """<V_k x, x> = 1/2 for the flat vector."""
        for k in range(1, 6):
            assert flat_vector_expectation(k, 5) == pytest.approx(0.5, abs=1e-15)

    def test_b_l2_formula(self):
        """||sum_K b_n V_n V_n^*||_2^2 = (sum |b_n|^2 + |sum b_n|^2) / 4."""
        rng = np.random.default_rng(3)
        b = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        lhs, rhs = b_l2_formula_check(b, [1, 3, 4], 6)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_conditional_projection(self):
        """E_F(B) P = 1/2 (y + sum_F b_n) P."""
        b = np.array([0.5, -1.0, 2.0, 0.25])
        report = conditional_projection_check(b, [2, 3], y=1.5 + 0.5j, depth=4)
        assert report.expected == pytest.approx((1.5 + 0.5j + 1.0) / 2)
        assert report.observed == pytest.approx(report.expected, abs=1e-12)
        assert report.residual <= 1e-6

    def test_conditional_projection_empty_set(self):
        """With F empty, E_F(B) is the scalar y/2."""
        report = conditional_projection_check([1.0, 2.0], [], y=3.0, depth=2)
        assert report.observed == pytest.approx(1.5)

    def test_c_lower_bound(self):
        """1/2 sum |c_k| <= ||C_N||, with strictly growing lower bounds."""
        lowers = []
        for depth in range(1, 8):
            c = np.arange(1, depth + 1, dtype=float) ** -0.75
            result = c_lower_bound_certificate(c, depth)
            assert result.holds
            lowers.append(result.lower)
        assert all(b > a for a, b in zip(lowers, lowers[1:]))

    def test_c_lower_bound_ignores_phases(self):
        """Only the moduli of the coefficients matter."""
        plain = c_lower_bound_certificate([1.0, 0.5], 2)
        phased = c_lower_bound_certificate([1j, -0.5], 2)
        assert phased.lower == pytest.approx(plain.lower)

    @pytest.mark.slow
    def test_c_lower_bound_matrix_free_depth_16(self):
        """The certificate holds matrix-free at N = 16 and exceeds the N = 15 bound."""
        results = []
        for depth in (15, 16):
            c = np.arange(1, depth + 1, dtype=float) ** -0.75
            results.append(c_lower_bound_certificate(c, depth, mode=TucciMode.MATRIX_FREE, allow_unconverged=True))
        assert all(result.holds for result in results)
        assert results[1].lower > results[0].lower
        assert results[1].lower == pytest.approx(0.5 * np.sum(np.arange(1, 17) ** -0.75))


class TestScan:
    """Tests for norm scans and their CSV output."""

    def test_rows_in_order(self):
        """Rows follow the requested depths."""
        rows = norm_scan(1.5, [3, 1, 2])
        assert [row.depth for row in rows] == [3, 1, 2]
        for row in rows:
            assert row.lower <= row.norm_c + 1e-8
            assert row.residual <= 1e-12
            assert row.norm_b == pytest.approx(row.sum_b)

    @pytest.mark.parametrize("r", [1.0, 2.5])
    def test_exponent_range(self, r):
        """r must lie in (1, 2]."""
        with pytest.raises(ValueError):
            norm_scan(r, [1])

    def test_csv_output(self):
        """The CSV starts with the header and keeps repr floats."""
        buffer = io.StringIO()
        row = ScanRow(2, 0.75, 1.0, 1.5, 1.5, 0.0)
        write_scan_csv([row], buffer)
        lines = list(csv.reader(io.StringIO(buffer.getvalue())))
        assert tuple(lines[0]) == ScanRow.HEADER
        assert lines[1] == ["2", "0.75", "1.0", "1.5", "1.5", "0.0"]

    def test_identity_operator(self):
        """The identity has normalized trace one."""
        assert TensorOperator.identity(3).normalized_trace() == pytest.approx(1.0)
