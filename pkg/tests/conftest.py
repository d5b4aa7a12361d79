"""Shared helpers: controlled-spectrum operators, instance builders, and the
witness recheck used across suites."""

import numpy as np
import scipy.sparse as sparse

from trisolve.linalg import matvec_transpose, norm2


def spd_with_spectrum(rng, m, lam_min=1.0, lam_max=5.0, eigenvalues=None):
    """Random symmetric positive definite matrix with a controlled spectrum.

    Returns ``(H, eigenvalues, eigenvectors)`` where the eigenvectors are the
    columns of a random orthogonal matrix, so the conditioning is exactly
    ``lam_max / lam_min`` rather than the tail luck of a Wishart draw.
    """
    q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    if eigenvalues is None:
        eigenvalues = np.sort(rng.uniform(lam_min, lam_max, m))
    lam = np.asarray(eigenvalues, dtype=np.float64)
    h = (q * lam) @ q.T
    h = 0.5 * (h + h.T)
    return h, lam, q


def random_instance(rng, max_m=40, max_n=40, square=False):
    """Random dense system ``(A, b)`` with entries O(1)."""
    m = int(rng.integers(2, max_m + 1))
    n = m if square else int(rng.integers(2, max_n + 1))
    a = rng.standard_normal((m, n))
    b = rng.standard_normal(m)
    return a, b


def random_sparse(rng, max_mn=50, density=0.3):
    m = int(rng.integers(1, max_mn + 1))
    n = int(rng.integers(1, max_mn + 1))
    mask = rng.random((m, n)) < density
    vals = rng.standard_normal((m, n)) * mask
    return sparse.csr_array(vals)


def check_witness(a, b, result, atol=0.0):
    """Re-verify a witness outcome: recompute the pivot inequality from the
    returned state and confirm it fails strictly."""
    assert result.status == "witness"
    assert result.b_prime is not None and result.rho is not None
    gap = np.asarray(b, dtype=np.float64) - result.b_prime
    c = matvec_transpose(a, gap)
    lhs = result.rho * norm2(c)
    rhs = float(np.dot(gap, b))
    assert lhs < rhs + atol, f"witness recheck failed: {lhs} >= {rhs}"
    if result.lower_bound is not None and norm2(c) > 0:
        assert np.isclose(result.lower_bound, rhs / norm2(c), rtol=1e-9)


def krylov_degree(h, r, tol=1e-8):
    """Degree of the minimal polynomial of ``r`` with respect to ``h``:
    the numerical rank of the Krylov block ``[r, Hr, H^2 r, ...]``."""
    h = np.asarray(h, dtype=np.float64)
    m = h.shape[0]
    cols = [np.asarray(r, dtype=np.float64)]
    for _ in range(m - 1):
        cols.append(h @ cols[-1])
    k = np.column_stack([c / max(norm2(c), 1e-300) for c in cols])
    return int(np.linalg.matrix_rank(k, tol=tol))
