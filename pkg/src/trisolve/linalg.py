"""Matrix storage helpers and the implicit operator ``H`` used by all solvers.

Matrices are plain ``numpy.ndarray`` (dense, row-major) or
``scipy.sparse.csr_array`` / ``csr_matrix`` (compressed-row) objects; anything
with ``matvec``/``rmatvec`` methods (e.g. :class:`GramProduct`) is also
accepted by the solvers.  ``H`` is either the matrix itself, for symmetric
positive semidefinite input, or the Gram operator ``A A^T`` applied as
``A (A^T r)`` without ever forming the ``m x m`` product.

Sparse kernels accumulate left-to-right within each row and are
single-threaded; dense products go through BLAS and stay deterministic for a
fixed thread count.  All objects here are immutable after construction and
safe to share across concurrent solves.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sparse

H_MODE_SYMMETRIC = "a"   # H = A, caller guarantees A symmetric (PSD for theory)
H_MODE_GRAM = "aat"      # H = A A^T, applied implicitly


def is_sparse(a) -> bool:
    return sparse.issparse(a)


def shape_of(a) -> tuple[int, int]:
    m, n = a.shape
    return int(m), int(n)


def matvec(a, v: np.ndarray) -> np.ndarray:
    """``A @ v`` with a deterministic summation order for fixed storage."""
    v = np.asarray(v, dtype=np.float64)
    if hasattr(a, "matvec") and not isinstance(a, np.ndarray) and not sparse.issparse(a):
        return a.matvec(v)
    m, n = shape_of(a)
    if v.shape != (n,):
        raise ValueError(f"matvec: vector has length {v.shape}, matrix has {n} columns")
    return a @ v


def matvec_transpose(a, v: np.ndarray) -> np.ndarray:
    """``A.T @ v`` computed from the same storage, without building ``A.T``."""
    v = np.asarray(v, dtype=np.float64)
    if hasattr(a, "rmatvec") and not isinstance(a, np.ndarray) and not sparse.issparse(a):
        return a.rmatvec(v)
    m, n = shape_of(a)
    if v.shape != (m,):
        raise ValueError(f"matvec_transpose: vector has length {v.shape}, matrix has {m} rows")
    if sparse.issparse(a):
        # CSR times-from-the-left keeps the row-major storage and stays O(nnz).
        return np.asarray(v @ a)
    return a.T @ v


def norm2(v: np.ndarray) -> float:
    """Euclidean norm; BLAS pairwise accumulation keeps drift down on long vectors."""
    return float(np.linalg.norm(np.asarray(v, dtype=np.float64)))


def frobenius_norm(a) -> float:
    if hasattr(a, "frobenius_norm") and not isinstance(a, np.ndarray) and not sparse.issparse(a):
        return a.frobenius_norm()
    if sparse.issparse(a):
        return float(np.sqrt((a.multiply(a)).sum()))
    return float(np.linalg.norm(np.asarray(a), "fro"))


def nnz_of(a) -> int:
    if sparse.issparse(a):
        return int(a.nnz)
    arr = np.asarray(a)
    return int(np.count_nonzero(arr))


def validate_symmetric(a, rel_tol: float = 1e-12) -> bool:
    """Debug check that ``a`` is square and symmetric. O(n^2); not called by solvers."""
    m, n = shape_of(a)
    if m != n:
        return False
    if sparse.issparse(a):
        d = a - a.T
        num = float(np.sqrt(abs((d.multiply(d)).sum())))
    else:
        arr = np.asarray(a)
        num = float(np.linalg.norm(arr - arr.T, "fro"))
    return num <= rel_tol * max(frobenius_norm(a), 1.0)


class GramProduct:
    """Implicit ``A^T A`` (shape ``n x n``), applied as ``A^T (A v)``.

    Used to run triangle-family solvers on the normal-equation pair
    ``(A^T A, A^T b)`` without forming the product.  Symmetric, so
    ``rmatvec`` coincides with ``matvec``.
    """

    def __init__(self, a):
        self._a = a
        m, n = shape_of(a)
        self.shape = (n, n)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return matvec_transpose(self._a, matvec(self._a, v))

    rmatvec = matvec

    def frobenius_norm(self) -> float:
        # ||A^T A||_F <= ||A||_F^2; an upper bound is enough for the
        # floating-point floors this feeds.
        return frobenius_norm(self._a) ** 2


class HOperator:
    """The solver-side operator ``H``: mode ``"a"`` applies the matrix itself
    (caller asserts symmetry, see :func:`validate_symmetric`); mode ``"aat"``
    applies ``A (A^T r)`` without materializing ``A A^T``.
    """

    def __init__(self, a, mode: str = H_MODE_GRAM):
        if mode not in (H_MODE_SYMMETRIC, H_MODE_GRAM):
            raise ValueError(f"unknown H mode {mode!r}")
        m, n = shape_of(a)
        if mode == H_MODE_SYMMETRIC and m != n:
            raise ValueError("symmetric mode requires a square matrix")
        self.matrix = a
        self.mode = mode
        self.dim = m  # H acts on residuals of length m
        self.apply_count = 0

    def apply(self, r: np.ndarray) -> np.ndarray:
        """``H r``."""
        return self.apply_with_transpose(r)[0]

    def apply_with_transpose(self, r: np.ndarray):
        """``(H r, A^T r)``; the transpose product is the intermediate of the
        Gram mode and comes for free there, ``None`` in symmetric mode."""
        self.apply_count += 1
        if self.mode == H_MODE_SYMMETRIC:
            return matvec(self.matrix, r), None
        at_r = matvec_transpose(self.matrix, r)
        return matvec(self.matrix, at_r), at_r

    def quadratic_form(self, r: np.ndarray, hr: np.ndarray) -> float:
        """``r^T H r`` given a precomputed ``hr = H r``."""
        return float(np.dot(r, hr))
