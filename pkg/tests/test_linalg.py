import numpy as np
import pytest

from cosmargin.linalg import cholesky, matmul, matvec, solve_spd, sym_eig


class TestMatvec:
    def test_identity(self):
        np.testing.assert_array_equal(matvec(np.eye(3), [1, 2, 3]), [1, 2, 3])

    def test_zero_matrix(self):
        np.testing.assert_array_equal(matvec(np.zeros((2, 3)), [5, 5, 5]), [0, 0])

    def test_direct(self):
        np.testing.assert_array_equal(matvec([[1, 2], [3, 4]], [1, 1]), [3, 7])

    def test_shape_mismatch_names_both_shapes(self):
        with pytest.raises(ValueError, match=r"2x3.*dim 2"):
            matvec(np.zeros((2, 3)), [1, 2])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            matvec([[np.nan, 0.0]], [1, 1])


class TestMatmul:
    def test_right_identity(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(matmul(a, np.eye(2)), a)

    def test_left_identity(self):
        b = np.array([[5.0, 6.0], [7.0, 8.0]])
        np.testing.assert_array_equal(matmul(np.eye(2), b), b)

    def test_direct(self):
        out = matmul([[1, 1], [0, 1]], [[1, 0], [1, 1]])
        np.testing.assert_array_equal(out, [[2, 1], [1, 1]])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            matmul(np.zeros((2, 3)), np.zeros((2, 3)))

    def test_associativity(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            dims = rng.integers(1, 9, size=4)
            a = rng.uniform(-1, 1, (dims[0], dims[1]))
            b = rng.uniform(-1, 1, (dims[1], dims[2]))
            c = rng.uniform(-1, 1, (dims[2], dims[3]))
            left = matmul(matmul(a, b), c)
            right = matmul(a, matmul(b, c))
            scale = max(np.abs(left).max(), 1.0)
            assert scale <= 1e3
            np.testing.assert_allclose(left, right, rtol=0, atol=1e-10 * scale)


class TestSymEig:
    def test_diagonal(self):
        vals, vecs = sym_eig(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(vals, [3, 2, 1])
        # columns are signed unit vectors picking out axes 0, 2, 1
        np.testing.assert_allclose(np.abs(vecs), np.eye(3)[:, [0, 2, 1]], atol=1e-14)

    def test_textbook_2x2(self):
        vals, vecs = sym_eig([[2.0, 1.0], [1.0, 2.0]])
        np.testing.assert_allclose(vals, [3, 1])
        np.testing.assert_allclose(np.abs(vecs[:, 0]), [1 / np.sqrt(2)] * 2)
        np.testing.assert_allclose(np.abs(vecs[:, 1]), [1 / np.sqrt(2)] * 2)

    def test_reconstruction_random(self):
        rng = np.random.default_rng(5)
        for n in (2, 8, 33, 64):
            m = rng.normal(size=(n, n))
            m = m + m.T
            vals, vecs = sym_eig(m)
            rebuilt = vecs @ np.diag(vals) @ vecs.T
            err = np.abs(rebuilt - m).max() / np.abs(m).max()
            assert err <= 1e-8
            assert np.all(np.diff(vals) <= 0)
            gram = vecs.T @ vecs
            np.testing.assert_allclose(gram, np.eye(n), atol=1e-8)

    def test_eigenpair_residual(self):
        rng = np.random.default_rng(6)
        m = rng.normal(size=(10, 10))
        m = m + m.T
        vals, vecs = sym_eig(m)
        resid = np.abs(m @ vecs - vecs * vals).max() / np.abs(m).max()
        assert resid <= 1e-8

    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="square"):
            sym_eig(np.zeros((2, 3)))

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError, match="symmetric"):
            sym_eig([[1.0, 2.0], [0.0, 1.0]])


class TestCholeskyAndSolve:
    def test_solve_identity(self):
        b = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_allclose(solve_spd(np.eye(2), b), b)

    def test_solve_diagonal(self):
        x = solve_spd(np.diag([2.0, 4.0]), np.eye(2))
        np.testing.assert_allclose(x, np.diag([0.5, 0.25]))

    def test_residual_random_spd(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            g = rng.normal(size=(6, 6))
            a = g @ g.T + 6 * np.eye(6)
            b = rng.normal(size=(6, 3))
            x = solve_spd(a, b)
            err = np.abs(a @ x - b).max() / np.abs(b).max()
            assert err <= 1e-8

    def test_cholesky_matches_numpy(self):
        rng = np.random.default_rng(10)
        g = rng.normal(size=(8, 8))
        a = g @ g.T + 8 * np.eye(8)
        np.testing.assert_allclose(cholesky(a), np.linalg.cholesky(a), atol=1e-10)

    def test_not_positive_definite_names_pivot(self):
        # indefinite: second pivot goes negative
        a = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(ValueError, match="pivot 1"):
            cholesky(a)

    def test_solve_vector_rhs(self):
        a = np.diag([2.0, 5.0])
        np.testing.assert_allclose(solve_spd(a, [4.0, 10.0]), [2.0, 2.0])
