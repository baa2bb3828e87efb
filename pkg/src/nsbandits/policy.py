"""GP-UCB-CPD agent and its baseline variants.

The agent is a deterministic state machine given an RNG stream.  Actions
live on a discretized grid; "uniform over the domain" means uniform over
grid indices.  Detector modes:

* CPD    — the scheduled uniform-exploration + tail-scan detector.
* ORACLE — resets exactly at the true change-points, no scan.
* NEVER  — CPD with an infinite threshold (scan skipped, never resets).
* NONE   — plain GP-UCB; requires xi = 0, never resets.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import cpd as cpd_mod
from . import environment as env_mod
from .cpd import CpdConfig
from .gpr import Dataset, IncrementalGpr
from .kernel import KernelSpec


class DetectorMode(enum.Enum):
    CPD = "cpd"
    ORACLE = "oracle"
    NEVER = "never"
    NONE = "none"


class ActionMode(enum.Enum):
    UNIFORM = "uniform"
    UCB = "ucb"


def beta_exponent(alpha: float, d: int) -> float:
    """Exponent d(d+1)/(2a + d(d+1)) of the exploration-bonus schedule."""
    q = d * (d + 1)
    return q / (2.0 * alpha + q)


@dataclass(frozen=True)
class AgentConfig:
    kernel: KernelSpec
    cpd: CpdConfig
    T: int
    xi: float = math.sqrt(3.0)
    big_d: float = 0.02           # coefficient of beta_t
    sigma2: float = 1.0
    d: int = 1
    detector_mode: DetectorMode = DetectorMode.CPD
    change_points: tuple[int, ...] = ()   # used by ORACLE mode only

    def __post_init__(self) -> None:
        if self.xi < 0:
            raise ValueError("xi must be >= 0")
        if not self.big_d > 0:
            raise ValueError("big_d must be positive")
        if self.T < 2:
            raise ValueError("T must be >= 2")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if self.detector_mode is DetectorMode.NONE and self.xi != 0:
            raise ValueError("detector mode NONE requires xi = 0")


def default_sigma2(noise_sd: float, T: int) -> float:
    """sigma² = 6 g² log T, the schedule's choice for noise level g."""
    return 6.0 * noise_sd * noise_sd * math.log(T)


def beta(cfg: AgentConfig, t: int) -> float:
    """Exploration-bonus schedule D * t^(d(d+1)/(2a+d(d+1))) * (log T)^4."""
    if t < 1:
        raise ValueError("t must be >= 1")
    return cfg.big_d * t ** beta_exponent(cfg.kernel.alpha, cfg.d) * math.log(cfg.T) ** 4


def rho_ucb(cfg: AgentConfig, t: int) -> float:
    """UCB-branch regularization sigma² / t; n*rho is constant in n."""
    if t < 1:
        raise ValueError("t must be >= 1")
    return cfg.sigma2 / t


@dataclass(frozen=True)
class StepRecord:
    t: int
    grid_index: int
    y: float
    mode: ActionMode
    regret: float
    detected: bool


class AgentState:
    """Mutable episode state: history, the uniform-sample buffer and the
    incrementally extended GPR cache over the action grid."""

    def __init__(self, cfg: AgentConfig, grid: np.ndarray) -> None:
        self.cfg = cfg
        self.grid = grid
        d = grid.shape[1]
        self.history = Dataset.empty(d)
        self.uniformly_sampled = Dataset.empty(d)
        self.gpr_cache: IncrementalGpr | None = None

    def reset(self) -> None:
        d = self.grid.shape[1]
        self.history = Dataset.empty(d)
        self.uniformly_sampled = Dataset.empty(d)
        self.gpr_cache = None


def should_explore(state: AgentState) -> bool:
    """Literal evaluation of |uniformlySampled| <= xi * sqrt(|history|)."""
    return len(state.uniformly_sampled) <= state.cfg.xi * math.sqrt(len(state.history))


def select_action(state: AgentState, rng: np.random.Generator) -> tuple[int, ActionMode]:
    """Pick a grid index: uniform when the exploration rule fires, otherwise
    argmax of mu + sqrt(beta) * sigma (ties to the smallest index)."""
    cfg = state.cfg
    if should_explore(state):
        return int(rng.integers(state.grid.shape[0])), ActionMode.UNIFORM
    t_prime = len(state.history)
    assert t_prime >= 1, "UCB branch requires nonempty history"
    cache = _ensure_cache(state)
    mu, resid = cache.posterior_on_grid()
    # variance prefactor sigma^2/(t*rho_ucb(t)) = 1 by the schedule
    ucb = mu + math.sqrt(beta(cfg, t_prime)) * np.sqrt(resid)
    return int(np.argmax(ucb)), ActionMode.UCB


def _ensure_cache(state: AgentState) -> IncrementalGpr:
    """Rebuild the incremental GPR lazily after a reset."""
    cache = state.gpr_cache
    if cache is None or cache.n != len(state.history):
        cache = IncrementalGpr(state.cfg.kernel, state.grid, state.cfg.sigma2)
        for i in range(len(state.history)):
            cache.append(state.history.X[i], state.history.y[i])
        state.gpr_cache = cache
    return cache


def observe(state: AgentState, x: np.ndarray, y: float, mode: ActionMode) -> bool:
    """Record an observation; on uniform steps run the tail scan.

    Returns True when a change-point was detected (lists were cleared).
    """
    cfg = state.cfg
    state.history = state.history.append(x, y)
    if state.gpr_cache is not None:
        state.gpr_cache.append(x, y)
    if mode is not ActionMode.UNIFORM:
        return False
    state.uniformly_sampled = state.uniformly_sampled.append(x, y)
    if cfg.detector_mode in (DetectorMode.ORACLE, DetectorMode.NEVER, DetectorMode.NONE):
        return False
    buf = state.uniformly_sampled
    for n in range(1, len(buf) // 2 + 1):
        result = cpd_mod.detect(cfg.cpd, buf.tail(2 * n))
        if result.detected:
            state.reset()
            return True
    return False


def step(state: AgentState, env: env_mod.PiecewiseEnv, t: int,
         rng: np.random.Generator) -> StepRecord:
    """One loop iteration: oracle reset, action, reward, observation."""
    cfg = state.cfg
    if not 1 <= t <= cfg.T:
        raise ValueError(f"t must be in 1..{cfg.T}, got {t}")
    if cfg.detector_mode is DetectorMode.ORACLE and (t - 1) in cfg.change_points:
        state.reset()
    idx, mode = select_action(state, rng)
    y = env_mod.reward(env, t, idx, rng)
    detected = observe(state, state.grid[idx], y, mode)
    return StepRecord(t, idx, y, mode, env_mod.instant_regret(env, t, idx), detected)
