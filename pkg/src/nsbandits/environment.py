"""Piecewise-stationary synthetic environment.

Draws K reward functions from a zero-mean GP prior on a fixed grid, switches
between them at evenly spaced change-points, yields Gaussian-noise rewards
and exposes the ground truth needed for regret computation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gpr import chol_with_jitter
from .kernel import KernelSpec, as_point_matrix, gram


def uniform_grid(low: float, high: float, size: int) -> np.ndarray:
    """Evenly spaced 1-D grid over [low, high], endpoints inclusive; (size, 1)."""
    if size < 2:
        raise ValueError("grid size must be >= 2")
    return np.linspace(low, high, size)[:, None]


def sample_gp_function(spec: KernelSpec, grid, rng: np.random.Generator,
                       jitter: float = 1e-8) -> np.ndarray:
    """One draw from GP(0, k) restricted to the grid points."""
    X = as_point_matrix(grid)
    L = chol_with_jitter(gram(spec, X, jitter), jitter)
    return L @ rng.standard_normal(X.shape[0])


@dataclass(frozen=True)
class PiecewiseEnv:
    grid: np.ndarray          # (m, d)
    f_values: np.ndarray      # (K, m), one table per stationary period
    tau: np.ndarray           # change-points, 0 = tau_0 < ... < tau_K = T
    noise_sd: float
    domain_measure: float
    f_max: np.ndarray         # (K,) per-period grid maxima

    def __post_init__(self) -> None:
        tau = np.asarray(self.tau, dtype=np.int64)
        if tau[0] != 0 or np.any(np.diff(tau) <= 0):
            raise ValueError("tau must be strictly increasing and start at 0")
        if self.f_values.shape[0] != tau.shape[0] - 1:
            raise ValueError("need one value table per stationary period")
        if self.f_values.shape[1] != self.grid.shape[0]:
            raise ValueError("value tables must match the grid")

    @property
    def horizon(self) -> int:
        return int(self.tau[-1])

    @property
    def n_periods(self) -> int:
        return self.f_values.shape[0]


def make_env(K: int, T: int, spec: KernelSpec, grid, noise_sd: float,
             rng: np.random.Generator, domain_measure: float | None = None,
             jitter: float = 1e-8) -> PiecewiseEnv:
    """Environment with K independent GP draws and evenly spaced changes."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if T < K:
        raise ValueError(f"T must be >= K, got T={T}, K={K}")
    X = as_point_matrix(grid)
    if domain_measure is None:
        widths = X.max(axis=0) - X.min(axis=0)
        domain_measure = float(np.prod(widths[widths > 0])) if np.any(widths > 0) else 1.0
    tau = np.array([round(i * T / K) for i in range(K + 1)], dtype=np.int64)
    # draw all periods from one escalated factorization
    L = chol_with_jitter(gram(spec, X, jitter), jitter)
    f = np.stack([L @ rng.standard_normal(X.shape[0]) for _ in range(K)])
    return PiecewiseEnv(X, f, tau, float(noise_sd), float(domain_measure),
                        f.max(axis=1))


def kappa(env: PiecewiseEnv, t: int) -> int:
    """Index (1-based) of the stationary period containing step t."""
    if not 1 <= t <= env.horizon:
        raise ValueError(f"t must be in 1..{env.horizon}, got {t}")
    # unique i with tau_{i-1} < t <= tau_i
    return int(np.searchsorted(env.tau, t, side="left"))


def reward(env: PiecewiseEnv, t: int, grid_index: int,
           rng: np.random.Generator) -> float:
    """Noisy reward f_{kappa(t)}(x_index) + noise_sd * N(0,1)."""
    i = kappa(env, t) - 1
    if not 0 <= grid_index < env.grid.shape[0]:
        raise IndexError(f"grid index {grid_index} out of range")
    return float(env.f_values[i, grid_index] + env.noise_sd * rng.standard_normal())


def instant_regret(env: PiecewiseEnv, t: int, grid_index: int) -> float:
    """Gap to the best grid value of the active period; always >= 0."""
    i = kappa(env, t) - 1
    if not 0 <= grid_index < env.grid.shape[0]:
        raise IndexError(f"grid index {grid_index} out of range")
    return float(env.f_max[i] - env.f_values[i, grid_index])


def true_delta_sq(env: PiecewiseEnv, i: int) -> float:
    """Squared L2 distance between consecutive period functions (quadrature
    over the grid); i in 1..K-1."""
    if not 1 <= i <= env.n_periods - 1:
        raise ValueError(f"i must be in 1..{env.n_periods - 1}, got {i}")
    diff = env.f_values[i - 1] - env.f_values[i]
    return float(np.mean(diff * diff) * env.domain_measure)


def to_record(env: PiecewiseEnv) -> dict:
    """Self-describing, JSON-serializable snapshot of the environment."""
    return {
        "grid": env.grid.tolist(),
        "f_values": env.f_values.tolist(),
        "tau": env.tau.tolist(),
        "noise_sd": env.noise_sd,
        "domain_measure": env.domain_measure,
    }


def from_record(record: dict) -> PiecewiseEnv:
    f = np.asarray(record["f_values"], dtype=np.float64)
    return PiecewiseEnv(
        grid=as_point_matrix(record["grid"]),
        f_values=f,
        tau=np.asarray(record["tau"], dtype=np.int64),
        noise_sd=float(record["noise_sd"]),
        domain_measure=float(record["domain_measure"]),
        f_max=f.max(axis=1),
    )
