"""Gaussian Process Regression with an explicit regularization parameter.

The regularized Gram matrix is ``K + n*rho*I`` for a training sample of size
``n``.  Predictive mean is ``k*ᵀ (K + n rho I)⁻¹ y``; predictive variance
carries the ``sigma² / (n rho)`` prefactor.  Also provides the information
gain diagnostic ``½ log det(I + sigma⁻² K)`` and an O(n²) rank-extension of
an existing Cholesky factor used by the bandit policy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

from .kernel import KernelSpec, as_point_matrix, cross, gram


class NumericalError(RuntimeError):
    """Raised when a factorization fails even after jitter escalation."""


@dataclass(frozen=True)
class Dataset:
    """Ordered covariate-response pairs.

    Insertion order is meaningful: the policy slices suffixes by recency.
    """

    X: np.ndarray  # (n, d)
    y: np.ndarray  # (n,)

    def __post_init__(self) -> None:
        object.__setattr__(self, "X", as_point_matrix(self.X))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.float64).ravel())
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError("X and y length mismatch")

    def __len__(self) -> int:
        return self.X.shape[0]

    def append(self, x, y: float) -> "Dataset":
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        return Dataset(np.vstack([self.X, x[None, :]]) if len(self) else x[None, :],
                       np.append(self.y, y))

    def tail(self, m: int) -> "Dataset":
        return Dataset(self.X[len(self) - m:], self.y[len(self) - m:])

    @classmethod
    def empty(cls, d: int = 1) -> "Dataset":
        return cls(np.empty((0, d)), np.empty(0))


def chol_with_jitter(A: np.ndarray, base_jitter: float) -> np.ndarray:
    """Lower Cholesky factor, adding escalating jitter on failure.

    Retries with base_jitter, 10x, 100x, 1000x before raising.
    """
    try:
        return cholesky(A, lower=True)
    except np.linalg.LinAlgError:
        pass
    jitter = base_jitter
    for _ in range(4):
        try:
            return cholesky(A + jitter * np.eye(A.shape[0]), lower=True)
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise NumericalError(f"Cholesky failed after jitter escalation up to {jitter / 10}")


@dataclass(frozen=True)
class GprModel:
    """Fitted regression state.

    ``chol`` is the lower Cholesky factor of ``K + n rho I``; ``weights``
    solves ``(K + n rho I) w = y``.
    """

    spec: KernelSpec
    data: Dataset
    rho: float
    sigma2: float
    chol: np.ndarray
    weights: np.ndarray


def fit(spec: KernelSpec, data: Dataset, rho: float, sigma2: float) -> GprModel:
    """Fit GPR; diagonal addition is n*rho with n = len(data)."""
    n = len(data)
    if n == 0:
        raise ValueError("cannot fit on an empty dataset")
    if not rho > 0 or not sigma2 > 0:
        raise ValueError("rho and sigma2 must be positive")
    K = gram(spec, data.X, n * rho)
    L = chol_with_jitter(K, 1e-10 * n)
    w = cho_solve((L, True), data.y)
    return GprModel(spec, data, rho, sigma2, L, w)


def predict_mean(model: GprModel, x) -> np.ndarray | float:
    """Predictive mean at one point or a stack of points."""
    xm = as_point_matrix(x)
    ks = cross(model.spec, xm, model.data.X)
    mu = ks @ model.weights
    return float(mu[0]) if np.asarray(x).ndim <= 1 and xm.shape[0] == 1 else mu


_VAR_CLAMP = -1e-10


def predict_var(model: GprModel, x) -> np.ndarray | float:
    """Predictive variance; tiny negative rounding is clamped to 0."""
    xm = as_point_matrix(x)
    ks = cross(model.spec, xm, model.data.X)
    v = solve_triangular(model.chol, ks.T, lower=True)
    resid = 1.0 - np.einsum("ij,ij->j", v, v)
    if np.any(resid < _VAR_CLAMP):
        raise NumericalError(f"negative predictive variance {resid.min():g}")
    resid = np.maximum(resid, 0.0)
    out = model.sigma2 / (len(model.data) * model.rho) * resid
    return float(out[0]) if np.asarray(x).ndim <= 1 and xm.shape[0] == 1 else out


def information_gain(spec: KernelSpec, xs, sigma2: float) -> float:
    """Mutual information ½ log det(I + sigma⁻² K) of a design."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    xm = as_point_matrix(xs)
    if xm.shape[0] == 0:
        return 0.0
    A = np.eye(xm.shape[0]) + gram(spec, xm, 0.0) / sigma2
    L = chol_with_jitter(A, 1e-12 * xm.shape[0])
    return float(np.sum(np.log(np.diag(L))))


class IncrementalGpr:
    """GPR posterior over a fixed query grid, extended one pair at a time.

    Valid only for a constant diagonal addition (the UCB schedule gives
    n * rho = sigma² for every n).  Maintains the growing Cholesky factor L,
    z = L⁻¹ y and V = L⁻¹ K(X, grid), so each append costs O(n² + n·grid)
    and the posterior over the grid is available in O(n·grid).
    """

    def __init__(self, spec: KernelSpec, grid: np.ndarray, diag_add: float,
                 capacity: int = 64) -> None:
        if not diag_add > 0:
            raise ValueError("diag_add must be positive")
        self.spec = spec
        self.grid = as_point_matrix(grid)
        self.diag_add = float(diag_add)
        self.n = 0
        m = self.grid.shape[0]
        self._L = np.zeros((capacity, capacity))
        self._z = np.zeros(capacity)
        self._V = np.zeros((capacity, m))
        self._colnorm2 = np.zeros(m)
        self._X = np.empty((0, self.grid.shape[1]))

    def _grow(self) -> None:
        cap = self._L.shape[0] * 2
        L = np.zeros((cap, cap))
        L[: self.n, : self.n] = self._L[: self.n, : self.n]
        self._L = L
        self._z = np.resize(self._z, cap)
        V = np.zeros((cap, self.grid.shape[0]))
        V[: self.n] = self._V[: self.n]
        self._V = V

    def append(self, x, y: float) -> None:
        if self.n == self._L.shape[0]:
            self._grow()
        n = self.n
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if n:
            b = cross(self.spec, x[None, :], self._X[:n])[0]
            l_row = solve_triangular(self._L[:n, :n], b, lower=True)
        else:
            l_row = np.empty(0)
        pivot2 = 1.0 + self.diag_add - l_row @ l_row
        if pivot2 <= 0:
            raise NumericalError("incremental Cholesky pivot lost positivity")
        pivot = np.sqrt(pivot2)
        self._L[n, :n] = l_row
        self._L[n, n] = pivot
        self._z[n] = (y - l_row @ self._z[:n]) / pivot
        kg = cross(self.spec, x[None, :], self.grid)[0]
        v_row = (kg - l_row @ self._V[:n]) / pivot
        self._V[n] = v_row
        self._colnorm2 += v_row * v_row
        self._X = np.vstack([self._X, x[None, :]])
        self.n = n + 1

    def posterior_on_grid(self) -> tuple[np.ndarray, np.ndarray]:
        """(mean, variance-without-prefactor) at every grid point.

        The caller multiplies the second array by sigma² / (n rho); under
        the UCB schedule that prefactor is exactly 1.
        """
        if self.n == 0:
            raise ValueError("no observations")
        mu = self._z[: self.n] @ self._V[: self.n]
        resid = np.maximum(1.0 - self._colnorm2, 0.0)
        return mu, resid
