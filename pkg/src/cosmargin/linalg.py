"""Dense real linear algebra used by the trainers.

Everything operates on float64 numpy arrays: matrices are 2-D C-ordered
(row-major) arrays, vectors are 1-D arrays. All functions are pure and
validate their inputs, so callers get shape/finiteness errors at the
boundary instead of NaNs downstream. LDA eigenproblems are ill-conditioned
in 32-bit, hence the blanket float64 policy.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg

# Asymmetry tolerated by sym_eig, relative to the largest entry magnitude.
SYMMETRY_RTOL = 1e-9


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a float64 2-D array, rejecting empty or non-finite input."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got {m.ndim}-D")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must have positive shape, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(v, name: str = "vector") -> np.ndarray:
    """Coerce to a float64 1-D array, rejecting empty or non-finite input."""
    w = np.asarray(v, dtype=np.float64)
    if w.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got {w.ndim}-D")
    if w.size < 1:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(w)):
        raise ValueError(f"{name} contains non-finite entries")
    return w


def matvec(m, v) -> np.ndarray:
    """Matrix-vector product m @ v with shape validation."""
    m = as_matrix(m)
    v = as_vector(v)
    if m.shape[1] != v.shape[0]:
        raise ValueError(
            f"matvec shape mismatch: matrix is {m.shape[0]}x{m.shape[1]}, "
            f"vector has dim {v.shape[0]}"
        )
    return m @ v


def matmul(a, b) -> np.ndarray:
    """Matrix product a @ b with shape validation."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"matmul shape mismatch: a is {a.shape[0]}x{a.shape[1]}, "
            f"b is {b.shape[0]}x{b.shape[1]}"
        )
    return a @ b


def sym_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues, eigenvectors) with eigenvalues sorted descending
    and eigenvectors as the corresponding orthonormal columns, so that
    ``m @ vecs == vecs @ diag(vals)``.

    Raises if ``m`` is not square or departs from symmetry by more than
    SYMMETRY_RTOL relative to its largest entry.
    """
    m = as_matrix(m)
    n, k = m.shape
    if n != k:
        raise ValueError(f"sym_eig needs a square matrix, got {n}x{k}")
    scale = np.abs(m).max()
    asym = np.abs(m - m.T).max()
    if asym > SYMMETRY_RTOL * max(scale, 1.0):
        raise ValueError(
            f"sym_eig needs a symmetric matrix: max asymmetry {asym:.3e} "
            f"exceeds {SYMMETRY_RTOL:.0e} of max entry {scale:.3e}"
        )
    vals, vecs = np.linalg.eigh(0.5 * (m + m.T))
    order = np.arange(n - 1, -1, -1)  # eigh returns ascending
    return vals[order], np.ascontiguousarray(vecs[:, order])


def cholesky(a) -> np.ndarray:
    """Lower-triangular Cholesky factor L of a symmetric positive definite a.

    Implemented column by column so a non-positive pivot can be reported
    with its index, which matters to LDA users diagnosing a rank-deficient
    within-class scatter.
    """
    a = as_matrix(a)
    n, k = a.shape
    if n != k:
        raise ValueError(f"cholesky needs a square matrix, got {n}x{k}")
    lower = np.zeros((n, n))
    for j in range(n):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if pivot <= 0.0 or not math.isfinite(pivot):
            raise ValueError(
                f"matrix is not positive definite: Cholesky pivot {j} "
                f"is {pivot:.6e}"
            )
        ljj = math.sqrt(pivot)
        lower[j, j] = ljj
        if j + 1 < n:
            lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / ljj
    return lower


def solve_spd(a, b) -> np.ndarray:
    """Solve a @ x = b for symmetric positive definite a.

    ``b`` may be a vector or a matrix of stacked right-hand sides; the
    result has the same shape as ``b``.
    """
    a = as_matrix(a, "a")
    b_arr = np.asarray(b, dtype=np.float64)
    rhs = as_vector(b_arr, "b") if b_arr.ndim == 1 else as_matrix(b_arr, "b")
    if a.shape[1] != rhs.shape[0]:
        raise ValueError(
            f"solve_spd shape mismatch: a is {a.shape[0]}x{a.shape[1]}, "
            f"b has leading dim {rhs.shape[0]}"
        )
    lower = cholesky(a)
    y = scipy.linalg.solve_triangular(lower, rhs, lower=True)
    return scipy.linalg.solve_triangular(lower.T, y, lower=False)
