"""Non-stationary continuum-armed bandit simulator.

Gaussian process regression, a two-window change-point detector, the
GP-UCB family of agents, a piecewise-stationary synthetic environment and
a reproducible experiment harness.
"""

from .kernel import KernelSpec, backend_name, gram, kernel_eval, sup_norm
from .gpr import Dataset, GprModel, fit, information_gain, predict_mean, predict_var
from .cpd import CpdConfig, DetectionResult, detect
from .environment import PiecewiseEnv, make_env
from .policy import AgentConfig, AgentState, DetectorMode
from .experiments import (
    ExperimentSetup,
    PowerLawFit,
    RegretTrace,
    compare,
    fit_power_law,
    run_episode,
    run_replicated,
    sweep_K,
    sweep_T,
)

__version__ = "0.1.0"

__all__ = [
    "KernelSpec", "backend_name", "gram", "kernel_eval", "sup_norm",
    "Dataset", "GprModel", "fit", "information_gain", "predict_mean", "predict_var",
    "CpdConfig", "DetectionResult", "detect",
    "PiecewiseEnv", "make_env",
    "AgentConfig", "AgentState", "DetectorMode",
    "ExperimentSetup", "PowerLawFit", "RegretTrace", "compare", "fit_power_law",
    "run_episode", "run_replicated", "sweep_K", "sweep_T",
    "__version__",
]
