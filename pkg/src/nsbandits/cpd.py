"""Two-window GPR change-point detector.

Splits a sample of size 2n into halves, fits GPR on each with the
regularization schedule rho_n = c * n^(-(2a+d)/(2a+d+1)), and compares the
squared L2 distance between the two predictive means against the threshold
schedule theta_n.  Also exposes the minimal half-window size diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gpr
from .gpr import Dataset
from .kernel import KernelSpec, as_point_matrix


def schedule_exponent(alpha: float, d: int) -> float:
    """Decay exponent (2a+d)/(2a+d+1) shared by rho_cpd and theta."""
    b = 2.0 * alpha + d
    return b / (b + 1.0)


@dataclass(frozen=True)
class CpdConfig:
    kernel: KernelSpec
    quad_grid: np.ndarray          # quadrature nodes, (m, d)
    domain_measure: float          # |X|, e.g. 5.0 for [0, 5]
    sigma2: float                  # noise level used in detector fits
    c_rho: float = 1.0             # coefficient of the rho_n schedule
    theta_coeff: float = 2.6       # coefficient of theta_n; +inf never detects
    d: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "quad_grid", as_point_matrix(self.quad_grid))
        if self.quad_grid.shape[0] == 0:
            raise ValueError("quad_grid must be nonempty")
        if not self.domain_measure > 0:
            raise ValueError("domain_measure must be positive")
        if not self.c_rho > 0 or not self.theta_coeff > 0:
            raise ValueError("c_rho and theta_coeff must be positive")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")

    @property
    def exponent(self) -> float:
        return schedule_exponent(self.kernel.alpha, self.d)


@dataclass(frozen=True)
class DetectionResult:
    delta_hat_sq: float
    threshold: float
    detected: bool


def rho_cpd(cfg: CpdConfig, n: int) -> float:
    """Detector regularization c * n^(-exponent)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return cfg.c_rho * n ** (-cfg.exponent)


def theta(cfg: CpdConfig, n: int) -> float:
    """Detection threshold theta_coeff * n^(-exponent); may be +inf."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if math.isinf(cfg.theta_coeff):
        return math.inf
    return cfg.theta_coeff * n ** (-cfg.exponent)


def delta_hat_sq(mu1: np.ndarray, mu2: np.ndarray, cfg: CpdConfig) -> float:
    """Midpoint-rule quadrature of the squared L2 distance between two
    functions given by their values on cfg.quad_grid."""
    mu1 = np.asarray(mu1, dtype=np.float64).ravel()
    mu2 = np.asarray(mu2, dtype=np.float64).ravel()
    m = cfg.quad_grid.shape[0]
    if mu1.shape[0] != m or mu2.shape[0] != m:
        raise ValueError("grid-value length mismatch with quad_grid")
    diff = mu1 - mu2
    return float(np.mean(diff * diff) * cfg.domain_measure)


def detect(cfg: CpdConfig, sample: Dataset) -> DetectionResult:
    """Run the detector on an even-sized sample (first half vs second half)."""
    size = len(sample)
    if size < 2 or size % 2:
        raise ValueError(f"sample size must be even and >= 2, got {size}")
    n = size // 2
    rho = rho_cpd(cfg, n)
    first = Dataset(sample.X[:n], sample.y[:n])
    second = Dataset(sample.X[n:], sample.y[n:])
    mu1 = gpr.predict_mean(gpr.fit(cfg.kernel, first, rho, cfg.sigma2), cfg.quad_grid)
    mu2 = gpr.predict_mean(gpr.fit(cfg.kernel, second, rho, cfg.sigma2), cfg.quad_grid)
    stat = delta_hat_sq(mu1, mu2, cfg)
    thr = theta(cfg, n)
    return DetectionResult(stat, thr, stat > thr)


def min_sample_size(C: float, F: float, g: float, x_conf: float,
                    delta_sq: float, alpha: float, d: int) -> float:
    """Minimal half-window size guaranteeing detection at discrepancy
    delta_sq: 2 * (C (F² + x² g²) / delta_sq)^(1 + 1/(2a+d)).

    Diagnostic only; callers ceil the returned real.
    """
    if not delta_sq > 0:
        raise ValueError("delta_sq must be positive")
    if not x_conf > 1.3:
        raise ValueError("x_conf must exceed 1.3")
    ratio = C * (F * F + x_conf * x_conf * g * g) / delta_sq
    return 2.0 * ratio ** (1.0 + 1.0 / (2.0 * alpha + d))
