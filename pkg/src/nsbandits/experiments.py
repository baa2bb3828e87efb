"""Episode runner, replication harness and power-law fitting.

Replications are share-nothing tasks identified by (base_seed, rep index);
seeds are derived with ``numpy.random.SeedSequence`` spawn keys, so results
are identical at any worker count as long as the reduction walks replication
indices in order (which it does).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import t as student_t

from . import environment as env_mod
from . import policy
from .cpd import CpdConfig
from .environment import PiecewiseEnv
from .kernel import KernelSpec
from .policy import ActionMode, AgentConfig, AgentState, DetectorMode

MODE_LABELS = {
    DetectorMode.CPD: "GP-UCB-CPD",
    DetectorMode.ORACLE: "GP-UCB-Oracle",
    DetectorMode.NEVER: "GP-UCB-NO-Detector",
    DetectorMode.NONE: "GP-UCB",
}
COMPARE_MODES = (DetectorMode.CPD, DetectorMode.ORACLE,
                 DetectorMode.NEVER, DetectorMode.NONE)


@dataclass(frozen=True)
class RegretTrace:
    label: str
    cumulative: np.ndarray            # length T, nondecreasing
    detections: tuple[int, ...] = ()  # step indices where the detector fired


@dataclass(frozen=True)
class PowerLawFit:
    coeff: float
    exponent: float
    ci_low: float
    ci_high: float
    n_points: int


@dataclass(frozen=True)
class ExperimentSetup:
    """Everything needed to rebuild environments and agents from seeds."""

    T: int
    K: int
    kernel: KernelSpec = KernelSpec(alpha=2.5, lengthscale=1.0)
    domain_low: float = 0.0
    domain_high: float = 5.0
    grid_size: int = 1000
    noise_sd: float = 0.05
    xi: float = math.sqrt(3.0)
    big_d: float = 0.02
    theta_coeff: float = 2.6
    c_rho: float = 0.2
    sigma2: float | None = None      # None -> 6 g^2 log T
    detector_mode: DetectorMode = DetectorMode.CPD

    def grid(self) -> np.ndarray:
        return env_mod.uniform_grid(self.domain_low, self.domain_high, self.grid_size)

    def resolved_sigma2(self) -> float:
        if self.sigma2 is not None:
            return self.sigma2
        return policy.default_sigma2(self.noise_sd, self.T)

    def make_env(self, rng: np.random.Generator) -> PiecewiseEnv:
        return env_mod.make_env(self.K, self.T, self.kernel, self.grid(),
                                self.noise_sd, rng,
                                domain_measure=self.domain_high - self.domain_low)

    def agent_config(self, env: PiecewiseEnv,
                     mode: DetectorMode | None = None) -> AgentConfig:
        # The stock theta_coeff and big_d are calibrated against a
        # measure-normalized L2 discrepancy and base-10 logarithms; the core
        # modules use a measure-weighted quadrature and natural logs, so the
        # coefficients are rescaled here before they reach the agent.
        mode = self.detector_mode if mode is None else mode
        sigma2 = self.resolved_sigma2()
        measure = self.domain_high - self.domain_low
        cpd_cfg = CpdConfig(
            kernel=self.kernel,
            quad_grid=self.grid(),
            domain_measure=measure,
            sigma2=sigma2,
            c_rho=self.c_rho,
            theta_coeff=(math.inf if mode is DetectorMode.NEVER
                         else self.theta_coeff * measure),
        )
        return AgentConfig(
            kernel=self.kernel,
            cpd=cpd_cfg,
            T=self.T,
            xi=0.0 if mode is DetectorMode.NONE else self.xi,
            big_d=self.big_d * (math.log10(self.T) / math.log(self.T)) ** 4,
            sigma2=sigma2,
            detector_mode=mode,
            change_points=tuple(int(x) for x in env.tau[1:-1]),
        )


def _episode_rng(base_seed: int, rep: int, mode_idx: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(base_seed, spawn_key=(rep, 1 + mode_idx)))


def _env_rng(base_seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(base_seed, spawn_key=(rep, 0)))


def run_episode(env: PiecewiseEnv, cfg: AgentConfig,
                rng: np.random.Generator, label: str | None = None) -> RegretTrace:
    """Drive the agent through t = 1..T, accumulating instantaneous regret."""
    if cfg.T != env.horizon:
        raise ValueError(f"config horizon {cfg.T} != environment horizon {env.horizon}")
    state = AgentState(cfg, env.grid)
    cumulative = np.empty(cfg.T)
    detections: list[int] = []
    running = 0.0
    for t in range(1, cfg.T + 1):
        rec = policy.step(state, env, t, rng)
        running += rec.regret
        cumulative[t - 1] = running
        if rec.detected:
            detections.append(t)
    return RegretTrace(label or MODE_LABELS[cfg.detector_mode], cumulative,
                       tuple(detections))


def _run_rep(setup: ExperimentSetup, base_seed: int, rep: int) -> RegretTrace:
    env = setup.make_env(_env_rng(base_seed, rep))
    cfg = setup.agent_config(env)
    return run_episode(env, cfg, _episode_rng(base_seed, rep, 0))


def _run_compare_rep(setup: ExperimentSetup, base_seed: int,
                     rep: int) -> list[RegretTrace]:
    # all four modes share the per-replication environment realization
    env = setup.make_env(_env_rng(base_seed, rep))
    traces = []
    for mode_idx, mode in enumerate(COMPARE_MODES):
        cfg = setup.agent_config(env, mode)
        traces.append(run_episode(env, cfg, _episode_rng(base_seed, rep, mode_idx)))
    return traces


def _map_reps(fn, setup: ExperimentSetup, n_reps: int, base_seed: int,
              workers: int | None):
    args = [(setup, base_seed, rep) for rep in range(n_reps)]
    if workers is None or workers <= 1 or n_reps == 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=min(workers, n_reps)) as pool:
        futures = [pool.submit(fn, *a) for a in args]
        return [f.result() for f in futures]  # rep-index order


@dataclass(frozen=True)
class ReplicatedResult:
    mean_trace: RegretTrace
    final_regrets: np.ndarray  # per-replication R_T, rep-index order

    @property
    def mean_final(self) -> float:
        return float(np.mean(self.final_regrets))

    @property
    def stderr_final(self) -> float:
        n = self.final_regrets.shape[0]
        if n < 2:
            return 0.0
        return float(np.std(self.final_regrets, ddof=1) / math.sqrt(n))


def run_replicated(setup: ExperimentSetup, n_reps: int, base_seed: int,
                   workers: int | None = None) -> ReplicatedResult:
    """Average n_reps independent episodes; environments are redrawn per
    replication from derived seeds."""
    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")
    traces = _map_reps(_run_rep, setup, n_reps, base_seed, workers)
    stacked = np.stack([tr.cumulative for tr in traces])
    label = traces[0].label
    return ReplicatedResult(
        RegretTrace(label, stacked.mean(axis=0)),
        stacked[:, -1].copy(),
    )


def fit_power_law(points) -> PowerLawFit:
    """OLS of log y on log x; exponent = slope, coeff = exp(intercept),
    95% CI from the Student-t distribution with n-2 degrees of freedom."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError("need at least 3 (x, y) points")
    if np.any(pts <= 0):
        raise ValueError("all coordinates must be strictly positive")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    n = pts.shape[0]
    mx = lx.mean()
    sxx = np.sum((lx - mx) ** 2)
    if sxx == 0:
        raise ValueError("x values must not all coincide")
    slope = float(np.sum((lx - mx) * (ly - ly.mean())) / sxx)
    intercept = float(ly.mean() - slope * mx)
    resid = ly - (intercept + slope * lx)
    se = math.sqrt(float(np.sum(resid**2)) / (n - 2) / sxx)
    half = float(student_t.ppf(0.975, n - 2)) * se
    return PowerLawFit(math.exp(intercept), slope, slope - half, slope + half, n)


@dataclass(frozen=True)
class SweepResult:
    xs: tuple[float, ...]
    mean_finals: tuple[float, ...]
    stderrs: tuple[float, ...]
    fit: PowerLawFit
    per_point_finals: tuple[tuple[float, ...], ...] = field(default=())


def _sweep(setups: list[tuple[float, ExperimentSetup]], reps: int, base_seed: int,
           workers: int | None) -> SweepResult:
    xs, means, errs, finals = [], [], [], []
    for x, setup in setups:
        # Sweep points share replication seed streams (common random numbers):
        # per-replication function draws then coincide across points, which
        # cancels draw-to-draw scatter out of the fitted slope.
        res = run_replicated(setup, reps, base_seed, workers)
        xs.append(x)
        means.append(res.mean_final)
        errs.append(res.stderr_final)
        finals.append(tuple(res.final_regrets))
    fit = fit_power_law(np.column_stack([xs, means]))
    return SweepResult(tuple(xs), tuple(means), tuple(errs), fit, tuple(finals))


DEFAULT_T_SWEEP = (900, 1275, 1650, 2025, 2400)
DEFAULT_K_SWEEP = (3, 4, 5, 6, 7, 8, 9)


def sweep_T(setup: ExperimentSetup, reps: int, base_seed: int,
            Ts=DEFAULT_T_SWEEP, workers: int | None = None) -> SweepResult:
    """Mean final regret versus horizon (K fixed), plus the power-law fit."""
    return _sweep([(float(T), replace(setup, T=int(T))) for T in Ts],
                  reps, base_seed, workers)


def sweep_K(setup: ExperimentSetup, reps: int, base_seed: int,
            Ks=DEFAULT_K_SWEEP, workers: int | None = None) -> SweepResult:
    """Mean final regret versus number of stationary periods (T fixed)."""
    return _sweep([(float(K), replace(setup, K=int(K))) for K in Ks],
                  reps, base_seed, workers)


def compare(setup: ExperimentSetup, reps: int, base_seed: int,
            workers: int | None = None) -> list[RegretTrace]:
    """Averaged traces of the four detector modes on shared environments."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    per_rep = _map_reps(_run_compare_rep, setup, reps, base_seed, workers)
    out = []
    for mode_idx, mode in enumerate(COMPARE_MODES):
        stacked = np.stack([traces[mode_idx].cumulative for traces in per_rep])
        out.append(RegretTrace(MODE_LABELS[mode], stacked.mean(axis=0)))
    return out
