"""Dense SVD primitives used by spectral steepest descent.

The decomposition is a one-sided Jacobi SVD: cyclic plane rotations
orthogonalize the columns of the (possibly transposed) input until the Gram
matrix is numerically diagonal. Jacobi is slow for large matrices but exact,
deterministic, and highly accurate for the small weight matrices this library
trains, including tiny singular values.
"""

import numpy as np
from numba import njit

# Singular values below RANK_RTOL * sigma_max are treated as exact zeros and
# dropped from the reduced decomposition.
RANK_RTOL = 1e-12

_JACOBI_TOL = 1e-14
_MAX_SWEEPS = 64


class InvalidInputError(ValueError):
    """Raised for non-finite or structurally invalid matrix input."""


class DegenerateInputError(ValueError):
    """Raised when an operation is undefined on the given input (zero matrix)."""


@njit(cache=True)
def _jacobi_sweeps(a, v, tol, max_sweeps):
    """Orthogonalize the columns of ``a`` in place, accumulating rotations in ``v``.

    Returns the number of sweeps used. Caller guarantees rows >= cols.
    """
    rows, cols = a.shape
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(cols - 1):
            for j in range(i + 1, cols):
                aii = 0.0
                ajj = 0.0
                aij = 0.0
                for k in range(rows):
                    aii += a[k, i] * a[k, i]
                    ajj += a[k, j] * a[k, j]
                    aij += a[k, i] * a[k, j]
                if aii == 0.0 or ajj == 0.0:
                    continue
                denom = np.sqrt(aii * ajj)
                rel = abs(aij) / denom
                if rel > off:
                    off = rel
                if rel <= tol:
                    continue
                tau = (ajj - aii) / (2.0 * aij)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                cs = 1.0 / np.sqrt(1.0 + t * t)
                sn = cs * t
                for k in range(rows):
                    tmp = cs * a[k, i] - sn * a[k, j]
                    a[k, j] = sn * a[k, i] + cs * a[k, j]
                    a[k, i] = tmp
                for k in range(cols):
                    tmp = cs * v[k, i] - sn * v[k, j]
                    v[k, j] = sn * v[k, i] + cs * v[k, j]
                    v[k, i] = tmp
        if off <= tol:
            return sweep + 1
    return max_sweeps


def _as_matrix(m):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise InvalidInputError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix contains non-finite entries")
    return m


def svd_reduced(m):
    """Reduced SVD ``m = U @ diag(sigma) @ V.T`` via one-sided Jacobi.

    U and V have orthonormal columns, sigma is strictly positive and
    non-increasing. Directions whose singular value falls below
    ``RANK_RTOL * sigma_max`` are dropped, so rank-deficient input yields
    fewer columns than min(rows, cols).
    """
    m = _as_matrix(m)
    rows, cols = m.shape
    transposed = rows < cols
    a = np.array(m.T if transposed else m, dtype=np.float64, order="C")
    v = np.eye(a.shape[1], dtype=np.float64)
    _jacobi_sweeps(a, v, _JACOBI_TOL, _MAX_SWEEPS)

    sigma = np.sqrt(np.sum(a * a, axis=0))
    order = np.argsort(sigma, kind="stable")[::-1]
    sigma = sigma[order]
    keep = sigma > (RANK_RTOL * sigma[0] if sigma.size and sigma[0] > 0 else 0.0)
    sigma = sigma[keep]
    idx = order[keep]
    u = a[:, idx] / sigma[np.newaxis, :]
    v = v[:, idx]
    if transposed:
        u, v = v, u
    return u, sigma, v


def orthogonalize(m):
    """Map ``m = U @ diag(sigma) @ V.T`` to the partial isometry ``U @ V.T``.

    Every singular value of the result is 1, its spectral norm is 1, and its
    elementwise inner product with ``m`` equals the nuclear norm of ``m``.
    """
    m = _as_matrix(m)
    u, sigma, v = svd_reduced(m)
    if sigma.size == 0:
        raise DegenerateInputError("cannot orthogonalize the zero matrix")
    return u @ v.T


def spectral_norm(m):
    """Largest singular value; 0.0 for the zero matrix."""
    m = _as_matrix(m)
    _, sigma, _ = svd_reduced(m)
    return float(sigma[0]) if sigma.size else 0.0


def nuclear_norm(m):
    """Sum of singular values; 0.0 for the zero matrix."""
    m = _as_matrix(m)
    _, sigma, _ = svd_reduced(m)
    return float(np.sum(sigma))
