"""Pure-NumPy Matérn kernel backend.

Fallback used when the compiled extension (``nsbandits._ckern``) is
unavailable or disabled via ``NSBANDITS_PURE=1``.  Both backends expose the
same two functions and must agree bit-for-bit on the formulas (they may
differ in the last ulp due to operation ordering).
"""

from __future__ import annotations

import numpy as np

SQRT3 = np.sqrt(3.0)
SQRT5 = np.sqrt(5.0)


def _pairwise_dist(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    # (n,d), (m,d) -> (n,m) Euclidean distances
    diff = X[:, None, :] - Y[None, :, :]
    return np.sqrt(np.einsum("nmd,nmd->nm", diff, diff))


def _matern(case: int, r: np.ndarray) -> np.ndarray:
    if case == 0:  # alpha = 1/2
        return np.exp(-r)
    if case == 1:  # alpha = 3/2
        s = SQRT3 * r
        return (1.0 + s) * np.exp(-s)
    if case == 2:  # alpha = 5/2
        s = SQRT5 * r
        return (1.0 + s + s * s / 3.0) * np.exp(-s)
    raise ValueError(f"unknown Matérn case {case}")


def cross(case: int, inv_l: float, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Cross-covariance matrix k(X_i, Y_j), shape (n, m)."""
    r = _pairwise_dist(X, Y) * inv_l
    return _matern(case, r)


def gram(case: int, inv_l: float, X: np.ndarray, diag_add: float) -> np.ndarray:
    """Symmetric covariance matrix k(X_i, X_j) + diag_add * I.

    The strict upper triangle is computed once and mirrored, so the result
    is exactly symmetric.
    """
    n = X.shape[0]
    r = _pairwise_dist(X, X) * inv_l
    K = _matern(case, r)
    # mirror the upper triangle to kill asymmetric rounding
    iu = np.triu_indices(n, k=1)
    K[(iu[1], iu[0])] = K[iu]
    K[np.diag_indices(n)] = 1.0 + diag_add
    return K
