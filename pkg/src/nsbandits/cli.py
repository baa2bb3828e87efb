"""Command-line entry point.

Subcommands: run, sweep-t, sweep-k, compare, fit.  Every run emits a CSV
artifact plus a JSON summary embedding the resolved configuration, written
atomically (temp file + rename).  Exit codes: 0 success, 1 configuration
error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import experiments as exp
from .experiments import ExperimentSetup, PowerLawFit, RegretTrace, SweepResult
from .gpr import NumericalError
from .kernel import KernelSpec

ENV_SEED_VAR = "NSBANDITS_SEED"


class ConfigError(ValueError):
    pass


STOCK_DEFAULTS = {
    "alpha": 2.5,
    "lengthscale": 1.0,
    "low": 0.0,
    "high": 5.0,
    "grid_size": 1000,
    "noise_sd": 0.05,
    "xi": math.sqrt(3.0),
    "big_d": 0.02,
    "theta_coeff": 2.6,
    "c_rho": 0.2,
    "sigma2": None,
    "T": 1200,
    "K": 4,
    "reps": 64,
    "seed": 0,
    "out": None,
    "workers": None,
}

_NESTED_GROUPS = {
    "kernel": ("alpha", "lengthscale"),
    "domain": ("low", "high", "grid_size"),
}


@dataclasses.dataclass(frozen=True)
class RunConfig:
    alpha: float
    lengthscale: float
    low: float
    high: float
    grid_size: int
    noise_sd: float
    xi: float
    big_d: float
    theta_coeff: float
    c_rho: float
    sigma2: float | None
    T: int
    K: int
    reps: int
    seed: int
    out: str | None
    workers: int | None

    def validate(self) -> "RunConfig":
        if self.grid_size < 2:
            raise ConfigError("grid_size must be >= 2")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.K < 1:
            raise ConfigError("K must be >= 1")
        if self.T < self.K:
            raise ConfigError(f"constraint T >= K violated: T={self.T}, K={self.K}")
        if not self.high > self.low:
            raise ConfigError("domain requires high > low")
        return self

    def setup(self) -> ExperimentSetup:
        return ExperimentSetup(
            T=self.T, K=self.K,
            kernel=KernelSpec(alpha=self.alpha, lengthscale=self.lengthscale),
            domain_low=self.low, domain_high=self.high, grid_size=self.grid_size,
            noise_sd=self.noise_sd, xi=self.xi, big_d=self.big_d,
            theta_coeff=self.theta_coeff, c_rho=self.c_rho, sigma2=self.sigma2,
        )


def _flatten_config_file(raw: dict) -> dict:
    flat: dict = {}
    for key, value in raw.items():
        if key in _NESTED_GROUPS:
            if not isinstance(value, dict):
                raise ConfigError(f"'{key}' must be a mapping")
            for sub, subval in value.items():
                if sub not in _NESTED_GROUPS[key]:
                    raise ConfigError(f"unknown key '{key}.{sub}'")
                flat[sub] = subval
        elif key in STOCK_DEFAULTS:
            flat[key] = value
        else:
            raise ConfigError(f"unknown key '{key}'")
    return flat


def parse_config(file_text: str | None, overrides: dict) -> RunConfig:
    """Merge the stock defaults, a JSON config file and flag overrides (flags
    win).  Unknown keys are rejected."""
    values = dict(STOCK_DEFAULTS)
    if file_text is not None and file_text.strip():
        try:
            raw = json.loads(file_text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config parse error at line {e.lineno}: {e.msg}") from e
        if not isinstance(raw, dict):
            raise ConfigError("config file must contain a JSON object")
        values.update(_flatten_config_file(raw))
    for key, value in overrides.items():
        if value is not None:
            if key not in values:
                raise ConfigError(f"unknown key '{key}'")
            values[key] = value
    ints = {"grid_size", "T", "K", "reps", "seed"}
    coerced = {}
    for key, value in values.items():
        if value is not None and key in ints:
            value = int(value)
        coerced[key] = value
    return RunConfig(**coerced).validate()


def _format(x) -> str:
    # full round-trip decimal formatting, locale-independent
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_trace_csv(path: str, traces: list[RegretTrace]) -> None:
    header = "t," + ",".join(tr.label for tr in traces)
    lines = [header]
    T = traces[0].cumulative.shape[0]
    for t in range(T):
        row = [str(t + 1)] + [_format(tr.cumulative[t]) for tr in traces]
        lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_sweep_csv(path: str, result: SweepResult) -> None:
    lines = ["x,mean_final_regret,stderr"]
    for x, mean, err in zip(result.xs, result.mean_finals, result.stderrs):
        lines.append(f"{_format(x)},{_format(mean)},{_format(err)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def _fit_dict(fit: PowerLawFit) -> dict:
    return {
        "coeff": fit.coeff,
        "exponent": fit.exponent,
        "ci_low": fit.ci_low,
        "ci_high": fit.ci_high,
        "n_points": fit.n_points,
    }


def _config_dict(cfg: RunConfig) -> dict:
    # the output path is presentation, not configuration; dropping it keeps
    # summaries byte-identical across runs that differ only in destination
    d = dataclasses.asdict(cfg)
    d.pop("out")
    return d


def write_summary_json(path: str, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _read_points_csv(path: str) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) < 2:
                raise ConfigError(f"{path}:{lineno}: expected two columns")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise ConfigError(f"{path}:{lineno}: non-numeric row") from None
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    return np.asarray(rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsbandits",
        description="Non-stationary continuum-armed bandit simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("run", "average replicated GP-UCB-CPD episodes at fixed T and K"),
        ("sweep-t", "regret vs horizon sweep with a power-law fit"),
        ("sweep-k", "regret vs number-of-periods sweep with a power-law fit"),
        ("compare", "four-algorithm comparison on shared environments"),
        ("fit", "fit a power law to an external CSV of (x, y) points"),
    ]:
        p = sub.add_parser(name, help=help_text)
        if name == "fit":
            p.add_argument("--input", required=True, help="CSV with x,y columns")
            p.add_argument("--out", default=None)
            continue
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--reps", type=int, default=None)
        p.add_argument("--T", type=int, default=None)
        p.add_argument("--K", type=int, default=None)
        p.add_argument("--xi", type=float, default=None)
        p.add_argument("--big-d", type=float, default=None, dest="big_d")
        p.add_argument("--theta", type=float, default=None, dest="theta_coeff")
        p.add_argument("--grid", type=int, default=None, dest="grid_size")
        p.add_argument("--noise", type=float, default=None, dest="noise_sd")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", default=None)
    return parser


def _resolve_seed(cfg_seed: int, flag_seed: int | None) -> int:
    if flag_seed is not None:
        return flag_seed
    env = os.environ.get(ENV_SEED_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{ENV_SEED_VAR} must be an integer, got {env!r}")
    return cfg_seed


def _load_config(args: argparse.Namespace) -> RunConfig:
    text = None
    if args.config is not None:
        with open(args.config) as fh:
            text = fh.read()
    overrides = {
        key: getattr(args, key, None)
        for key in ("reps", "T", "K", "xi", "big_d", "theta_coeff",
                    "grid_size", "noise_sd", "workers", "out")
    }
    cfg = parse_config(text, overrides)
    seed = _resolve_seed(cfg.seed, args.seed)
    return dataclasses.replace(cfg, seed=seed)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fit":
            points = _read_points_csv(args.input)
            fit = exp.fit_power_law(points)
            out = args.out or "fit"
            write_summary_json(out + ".json", {"command": "fit", "fit": _fit_dict(fit),
                                               "input": args.input})
            print(json.dumps(_fit_dict(fit)))
            return 0
        cfg = _load_config(args)
        setup = cfg.setup()
        out = cfg.out or args.command
        summary: dict = {"command": args.command, "config": _config_dict(cfg)}
        if args.command == "run":
            res = exp.run_replicated(setup, cfg.reps, cfg.seed, cfg.workers)
            write_trace_csv(out + ".csv", [res.mean_trace])
            summary["mean_final_regret"] = res.mean_final
            summary["per_rep_final_regret"] = res.final_regrets.tolist()
        elif args.command in ("sweep-t", "sweep-k"):
            runner = exp.sweep_T if args.command == "sweep-t" else exp.sweep_K
            res = runner(setup, cfg.reps, cfg.seed, workers=cfg.workers)
            write_sweep_csv(out + ".csv", res)
            summary["fit"] = _fit_dict(res.fit)
            summary["points"] = [
                {"x": x, "mean_final_regret": m, "stderr": e}
                for x, m, e in zip(res.xs, res.mean_finals, res.stderrs)
            ]
            summary["per_point_finals"] = [list(f) for f in res.per_point_finals]
        elif args.command == "compare":
            traces = exp.compare(setup, cfg.reps, cfg.seed, cfg.workers)
            write_trace_csv(out + ".csv", traces)
            summary["final_regret"] = {tr.label: float(tr.cumulative[-1])
                                       for tr in traces}
        write_summary_json(out + ".json", summary)
        print(f"wrote {out}.csv and {out}.json")
        return 0
    except (ConfigError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (NumericalError, np.linalg.LinAlgError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
