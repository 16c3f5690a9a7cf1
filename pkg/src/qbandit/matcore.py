"""Dense linear algebra for small symmetric matrices.

Eigendecomposition is cyclic Jacobi (dims stay at or below 16 here, so robust
orthogonality matters more than speed); solves are routed through the same
decomposition so the positive-definiteness threshold is enforced exactly.
"""

from collections import namedtuple

import numpy as np

from . import _kernels

MAX_DIM = 16
PD_THRESHOLD = 1e-12

EigenDecomposition = namedtuple("EigenDecomposition",
                                ["eigenvalues", "eigenvectors"])


def _as_square(m):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    if m.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {m.shape[0]} exceeds supported {MAX_DIM}")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-10 * (1.0 + np.abs(m).max())):
        raise ValueError("matrix is not symmetric")
    return m


def eig_sym(m):
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending.

    Ties keep input (diagonal) order and eigenvector signs are fixed so the
    largest-magnitude component is positive; the output is a deterministic
    function of the input.
    """
    m = _as_square(m)
    w, vecs = _kernels.jacobi_eig(m)
    return EigenDecomposition(w, vecs)


def rank1_update(v, a, w):
    """V + w * a a^T as a new matrix."""
    v = _as_square(v)
    a = np.asarray(a, dtype=float)
    if a.shape != (v.shape[0],):
        raise ValueError(f"vector shape {a.shape} does not match dim {v.shape[0]}")
    w = float(w)
    if not np.isfinite(w) or w < 0.0:
        raise ValueError(f"weight must be finite and nonnegative, got {w}")
    return v + w * np.outer(a, a)


def weighted_norm(x, m):
    """sqrt(x^T M x) for positive semidefinite M."""
    x = np.asarray(x, dtype=float)
    m = _as_square(m)
    if x.shape != (m.shape[0],):
        raise ValueError(f"vector shape {x.shape} does not match dim {m.shape[0]}")
    q = _kernels.qform_(x, m)
    if q < -1e-12:
        raise ValueError(f"quadratic form is negative ({q}); matrix not PSD")
    return np.sqrt(max(q, 0.0))


def solve_psd(v, b):
    """Solve V x = b for positive definite V (lambda_min > 1e-12)."""
    v = _as_square(v)
    b = np.asarray(b, dtype=float)
    if b.shape != (v.shape[0],):
        raise ValueError(f"vector shape {b.shape} does not match dim {v.shape[0]}")
    w, vecs = _kernels.jacobi_eig(v)
    if w[0] <= PD_THRESHOLD:
        raise np.linalg.LinAlgError(
            f"matrix is singular at threshold {PD_THRESHOLD}: lambda_min={w[0]}")
    return _kernels.eig_solve(w, vecs, b)
