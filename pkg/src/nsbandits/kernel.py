"""Stationary Matérn covariance functions and Gram-matrix construction.

Only the half-integer smoothness indices 1/2, 3/2 and 5/2 are supported;
these admit closed forms and avoid a Bessel-function dependency.

The heavy loops live in a compiled extension (``nsbandits._ckern``) with a
pure-NumPy fallback, selected once at import time.  Set ``NSBANDITS_PURE=1``
to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _nkern

if os.environ.get("NSBANDITS_PURE"):
    _impl = _nkern
else:
    try:
        from . import _ckern as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _nkern

_ALPHA_CASES = {0.5: 0, 1.5: 1, 2.5: 2}


def backend_name() -> str:
    """Name of the active kernel backend: 'compiled' or 'numpy'."""
    return "numpy" if _impl is _nkern else "compiled"


@dataclass(frozen=True)
class KernelSpec:
    """Matérn covariance with smoothness ``alpha`` and lengthscale ``l``.

    alpha must be one of {0.5, 1.5, 2.5}; lengthscale must be positive.
    """

    alpha: float = 2.5
    lengthscale: float = 1.0

    def __post_init__(self) -> None:
        if self.alpha not in _ALPHA_CASES:
            raise ValueError(
                f"alpha must be one of {sorted(_ALPHA_CASES)}, got {self.alpha}"
            )
        if not self.lengthscale > 0:
            raise ValueError(f"lengthscale must be > 0, got {self.lengthscale}")

    @property
    def _case(self) -> int:
        return _ALPHA_CASES[self.alpha]


def as_point_matrix(xs) -> np.ndarray:
    """Coerce a list/array of points to a C-contiguous (n, d) matrix."""
    a = np.ascontiguousarray(np.asarray(xs, dtype=np.float64))
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a[:, None]
    elif a.ndim != 2:
        raise ValueError(f"points must be at most 2-D, got shape {a.shape}")
    return a


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate k(x, y) for two points."""
    X = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=np.float64)))[None, :]
    Y = np.ascontiguousarray(np.atleast_1d(np.asarray(y, dtype=np.float64)))[None, :]
    if X.shape != Y.shape:
        raise ValueError("x and y must share dimension")
    return float(_impl.cross(spec._case, 1.0 / spec.lengthscale, X, Y)[0, 0])


def cross(spec: KernelSpec, xs, ys) -> np.ndarray:
    """Cross-covariance matrix [k(x_i, y_j)], shape (len(xs), len(ys))."""
    X = as_point_matrix(xs)
    Y = as_point_matrix(ys)
    return _impl.cross(spec._case, 1.0 / spec.lengthscale, X, Y)


def gram(spec: KernelSpec, xs, diag_add: float = 0.0) -> np.ndarray:
    """Covariance matrix [k(x_i, x_j) + diag_add * delta_ij].

    Exactly symmetric; positive definite whenever diag_add > 0.
    """
    X = as_point_matrix(xs)
    if X.shape[0] == 0:
        raise ValueError("gram requires a nonempty point list")
    if diag_add < 0:
        raise ValueError(f"diag_add must be >= 0, got {diag_add}")
    return _impl.gram(spec._case, 1.0 / spec.lengthscale, X, float(diag_add))


def sup_norm(spec: KernelSpec) -> float:
    """Supremum of |k|; 1 for the normalized Matérn family."""
    return 1.0
