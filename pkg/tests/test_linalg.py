"""Tests for the dense linear-algebra kernels."""

import math

import numpy as np
import pytest

from snr_sentry.linalg import (
    DesignMatrix,
    RankDeficiencyError,
    SupportSet,
    gram_diagnostics,
    least_squares_min_norm,
    projection_residual,
    rank_from_singular_values,
    read_matrix_file,
    read_vector_file,
    write_matrix_file,
)


def unit_columns(n, p, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, p))
    return DesignMatrix(a / np.linalg.norm(a, axis=0))


class TestDesignMatrix:
    def test_dimensions(self):
        X = DesignMatrix(np.eye(3))
        assert (X.n, X.p) == (3, 3)
        one = DesignMatrix([[2.0]])
        assert (one.n, one.p) == (1, 1)

    def test_rejects_empty_and_nonfinite(self):
        with pytest.raises(ValueError):
            DesignMatrix(np.zeros((0, 3)))
        with pytest.raises(ValueError):
            DesignMatrix(np.zeros((2, 0)))
        with pytest.raises(ValueError):
            DesignMatrix([[1.0, np.nan], [0.0, 1.0]])
        with pytest.raises(ValueError):
            DesignMatrix([[np.inf, 0.0], [0.0, 1.0]])
        with pytest.raises(ValueError):
            DesignMatrix(np.zeros(4))

    def test_entries_are_an_immutable_copy(self):
        source = np.eye(2)
        X = DesignMatrix(source)
        source[0, 0] = 7.0
        assert X.entries[0, 0] == 1.0
        with pytest.raises(ValueError):
            X.entries[0, 0] = 5.0

    def test_unit_norm_check(self):
        X = unit_columns(6, 4, seed=0)
        assert X.has_unit_norm_columns()
        X.require_unit_norm_columns()
        bad = DesignMatrix(2.0 * np.eye(3))
        assert not bad.has_unit_norm_columns()
        with pytest.raises(ValueError, match="column"):
            bad.require_unit_norm_columns()

    def test_columns_selection(self):
        X = DesignMatrix(np.arange(12, dtype=float).reshape(3, 4))
        sub = X.columns(SupportSet((2, 0)))
        assert sub.shape == (3, 2)
        assert np.array_equal(sub[:, 0], X.entries[:, 2])
        assert np.array_equal(sub[:, 1], X.entries[:, 0])
        assert X.columns(SupportSet.empty()).shape == (3, 0)
        with pytest.raises(IndexError):
            X.columns(SupportSet((4,)))


class TestSupportSet:
    def test_preserves_insertion_order(self):
        s = SupportSet((3, 0, 2))
        assert s.indices == (3, 0, 2)
        assert list(s) == [3, 0, 2]

    def test_rejects_duplicates_and_negatives(self):
        with pytest.raises(ValueError):
            SupportSet((1, 1))
        with pytest.raises(ValueError):
            SupportSet((-1,))

    def test_helpers(self):
        s = SupportSet.of(5, 1)
        assert len(s) == 2
        assert 5 in s and 0 not in s
        assert s.as_set() == frozenset({1, 5})
        assert np.array_equal(s.as_array(), np.array([5, 1]))
        assert s.set_equal(SupportSet((1, 5)))
        assert not s.set_equal(SupportSet((1,)))
        grown = s.extended(7)
        assert grown.indices == (5, 1, 7)
        with pytest.raises(ValueError):
            s.extended(5)
        assert len(SupportSet.empty()) == 0


class TestRankRule:
    def test_counts_above_scaled_epsilon(self):
        s = np.array([2.0, 1.0, 0.0])
        assert rank_from_singular_values(s, (5, 3)) == 2
        eps = np.finfo(float).eps
        tiny = np.array([1.0, 6.0 * eps])
        assert rank_from_singular_values(tiny, (5, 2)) == 2
        below = np.array([1.0, 4.0 * eps])
        assert rank_from_singular_values(below, (5, 2)) == 1
        assert rank_from_singular_values(np.array([]), (3, 0)) == 0


class TestLeastSquaresMinNorm:
    def test_identity_columns(self):
        X = DesignMatrix(np.eye(4))
        coef, resid_sq = least_squares_min_norm(
            X, SupportSet((0, 1)), np.array([1.0, 2.0, 3.0, 4.0])
        )
        assert np.allclose(coef, [1.0, 2.0], atol=1e-14)
        assert resid_sq == pytest.approx(25.0, abs=1e-12)

    def test_duplicated_column_min_norm_split(self):
        col = np.array([3.0, 4.0]) / 5.0
        X = DesignMatrix(np.column_stack([col, col]))
        coef, resid_sq = least_squares_min_norm(X, SupportSet((0, 1)), col)
        assert np.allclose(coef, [0.5, 0.5], atol=1e-12)
        assert resid_sq == pytest.approx(0.0, abs=1e-24)

    def test_against_normal_equations_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            X = unit_columns(6, 5, seed=rng.integers(1 << 30))
            J = SupportSet(tuple(rng.choice(5, size=3, replace=False)))
            y = rng.standard_normal(6)
            coef, resid_sq = least_squares_min_norm(X, J, y)
            XJ = X.columns(J)
            gram = XJ.T @ XJ
            oracle = np.linalg.solve(gram, XJ.T @ y)
            r = y - XJ @ oracle
            assert np.allclose(coef, oracle, atol=1e-10)
            assert resid_sq == pytest.approx(float(r @ r), abs=1e-10)

    def test_exact_reproduction_in_column_space(self):
        rng = np.random.default_rng(3)
        X = unit_columns(7, 4, seed=9)
        J = SupportSet((0, 2, 3))
        y = X.columns(J) @ rng.standard_normal(3)
        _, resid_sq = least_squares_min_norm(X, J, y)
        assert resid_sq < 1e-20 * float(y @ y)

    def test_dimension_and_empty_support_errors(self):
        X = DesignMatrix(np.eye(3))
        with pytest.raises(ValueError):
            least_squares_min_norm(X, SupportSet((0,)), np.zeros(4))
        with pytest.raises(ValueError):
            least_squares_min_norm(X, SupportSet.empty(), np.zeros(3))


class TestProjectionResidual:
    def test_empty_support_returns_y(self):
        X = unit_columns(5, 3, seed=1)
        y = np.arange(5.0)
        residual, resid_sq = projection_residual(X, SupportSet.empty(), y)
        assert np.array_equal(residual, y)
        assert resid_sq == pytest.approx(float(y @ y))

    def test_full_space_projection_is_zero(self):
        X = DesignMatrix(np.eye(3))
        y = np.array([5.0, -2.0, 1.0])
        residual, resid_sq = projection_residual(X, SupportSet((0, 1, 2)), y)
        assert np.allclose(residual, 0.0, atol=1e-14)
        assert resid_sq == pytest.approx(0.0, abs=1e-28)

    def test_residual_orthogonal_to_selected_columns(self):
        rng = np.random.default_rng(7)
        X = unit_columns(5, 8, seed=11)
        y = rng.standard_normal(5)
        J = SupportSet((1, 4))
        residual, _ = projection_residual(X, J, y)
        for j in J:
            assert abs(residual @ X.entries[:, j]) < 1e-10 * np.linalg.norm(y)

    def test_monotone_under_support_growth(self):
        rng = np.random.default_rng(13)
        X = unit_columns(6, 8, seed=17)
        y = rng.standard_normal(6)
        order = rng.permutation(8)
        prev = float(y @ y)
        for size in range(1, 6):
            J = SupportSet(tuple(int(i) for i in order[:size]))
            _, resid_sq = projection_residual(X, J, y)
            assert resid_sq <= prev + 1e-10
            prev = resid_sq


class TestGramDiagnostics:
    def test_orthonormal_support(self):
        X = DesignMatrix(np.eye(5))
        d = gram_diagnostics(X, SupportSet((0, 2, 4)))
        assert d.gram_inverse_inf_norm == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(d.diag_sqrt, 1.0, atol=1e-12)
        assert d.min_eigenvalue == pytest.approx(1.0, abs=1e-12)
        assert d.pseudo_inverse_22_norm == pytest.approx(1.0, abs=1e-12)
        # For orthonormal columns the pseudo-inverse maps the sign vector s
        # to X_J s of norm sqrt(k), so the (2,1) induced norm is sqrt(k).
        assert d.pseudo_inverse_21_norm == pytest.approx(math.sqrt(3), abs=1e-12)

    def test_two_column_gram_eigenvalue(self):
        theta = math.acos(0.5)
        a = np.array([1.0, 0.0, 0.0])
        b = np.array([math.cos(theta), math.sin(theta), 0.0])
        X = DesignMatrix(np.column_stack([a, b]))
        d = gram_diagnostics(X, SupportSet((0, 1)))
        assert d.min_eigenvalue == pytest.approx(0.5, abs=1e-12)

    def test_spectral_norm_identity(self):
        X = unit_columns(8, 3, seed=23)
        J = SupportSet((0, 1, 2))
        d = gram_diagnostics(X, J)
        assert d.pseudo_inverse_22_norm == pytest.approx(
            1.0 / math.sqrt(d.min_eigenvalue), abs=1e-10
        )

    def test_21_norm_sign_enumeration_oracle(self):
        rng = np.random.default_rng(29)
        X = unit_columns(7, 5, seed=31)
        J = SupportSet((0, 2, 3))
        d = gram_diagnostics(X, J)
        pinv = np.linalg.pinv(X.columns(J))
        best = 0.0
        for bits in range(1 << pinv.shape[0]):
            s = np.array([1.0 if bits & (1 << i) else -1.0 for i in range(pinv.shape[0])])
            best = max(best, float(np.linalg.norm(pinv.T @ s)))
        assert d.pseudo_inverse_21_norm == pytest.approx(best, abs=1e-10)
        # Sanity: random unit directions can only give lower values.
        for _ in range(200):
            v = rng.standard_normal(7)
            v /= np.linalg.norm(v)
            assert np.sum(np.abs(pinv @ v)) <= d.pseudo_inverse_21_norm + 1e-10

    def test_diag_sqrt_matches_gram_inverse(self):
        X = unit_columns(9, 4, seed=37)
        J = SupportSet((0, 1, 3))
        d = gram_diagnostics(X, J)
        XJ = X.columns(J)
        ginv = np.linalg.inv(XJ.T @ XJ)
        assert np.allclose(d.diag_sqrt, np.sqrt(np.diag(ginv)), atol=1e-10)
        assert d.gram_inverse_inf_norm == pytest.approx(
            float(np.max(np.sum(np.abs(ginv), axis=1))), abs=1e-10
        )

    def test_permutation_moves_diag_and_keeps_scalars(self):
        X = unit_columns(8, 5, seed=41)
        d1 = gram_diagnostics(X, SupportSet((0, 2, 4)))
        d2 = gram_diagnostics(X, SupportSet((4, 0, 2)))
        assert np.allclose(sorted(d1.diag_sqrt), sorted(d2.diag_sqrt), atol=1e-12)
        assert d1.gram_inverse_inf_norm == pytest.approx(d2.gram_inverse_inf_norm, abs=1e-12)
        assert d1.min_eigenvalue == pytest.approx(d2.min_eigenvalue, abs=1e-12)
        assert d1.pseudo_inverse_21_norm == pytest.approx(d2.pseudo_inverse_21_norm, abs=1e-12)
        assert d1.pseudo_inverse_22_norm == pytest.approx(d2.pseudo_inverse_22_norm, abs=1e-12)

    def test_rank_deficient_support_raises(self):
        col = np.array([1.0, 0.0, 0.0])
        X = DesignMatrix(np.column_stack([col, col, np.array([0.0, 1.0, 0.0])]))
        with pytest.raises(RankDeficiencyError):
            gram_diagnostics(X, SupportSet((0, 1)))


class TestMatrixFiles:
    def test_round_trip_to_17_digits(self, tmp_path):
        rng = np.random.default_rng(43)
        X = DesignMatrix(rng.standard_normal((4, 6)) * math.pi)
        path = tmp_path / "design.txt"
        write_matrix_file(path, X)
        back = read_matrix_file(path)
        assert np.array_equal(back.entries, X.entries)
        header = path.read_text().splitlines()[0]
        assert header.split() == ["4", "6"]

    def test_read_vector_file(self, tmp_path):
        path = tmp_path / "y.txt"
        path.write_text("1.5\n-2.25\n0.125\n")
        y = read_vector_file(path)
        assert np.array_equal(y, np.array([1.5, -2.25, 0.125]))

    def test_malformed_matrix_file(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2 2\n1.0 2.0\n3.0\n")
        with pytest.raises(ValueError):
            read_matrix_file(path)
