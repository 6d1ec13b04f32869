"""Command-line front end: single runs, SNR sweeps, timing benchmarks.

Subcommands
-----------
solve      Solve the canonical fixed point at one noise level, print JSON.
optimize   Maximize the EMI approximation, print a report, write Q to file.
sweep      SNR sweep comparing uniform vs optimized covariance, CSV output.
bench      Median wall time of the optimizer for one or more path counts.

Conventions (documented here once, used everywhere):

* ``snr_db`` means ``-10 * log10(sigma2)``, i.e. SNR = 1/sigma2 under
  unit-normalized total path power.
* The library computes in nats; ``units: "bits"`` divides by ln 2 at this
  boundary only.
* Exit codes: 0 success, 1 usage/configuration error, 2 numerical
  non-convergence.
* The sweep's ``wall_time_s`` column is 0 unless ``--timing`` is passed, so
  that identical configuration and seed produce byte-identical CSV files.

Config JSON schema::

    {
      "r": 4, "t": 4,
      "sigma2": 0.1,                  # or "snr_db_list": [-5, 0, 5, ...]
      "clusters": [
        {"mean_aod": 6.15, "aod_spread": 0.06,
         "mean_aoa": 4.85, "aoa_spread": 0.06, "power": 0.2},
        ...
      ],
      "trials": 100000, "seed": 0, "units": "nats",
      "tol": {"fixed_point": 1e-10, "outer": 1e-8}
    }

Matrix files are JSON objects ``{"dim": t, "entries": [[re, im], ...]}``
with row-major entries; written matrices round-trip bit-exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
import time
from dataclasses import dataclass, replace

import numpy as np

from .canonical_solver import SolverOptions, contraction_radius, solve_canonical
from .channel_model import ChannelStats, PathCluster, build_stats, isotropic_stats
from .emi_approx import covariance_matrix, emi_approx, uniform_covariance
from .errors import ConfigError, MimoCapacityError, NonConvergenceError
from .monte_carlo import emi_mc
from .optimizer import optimize_covariance
from .presets import five_cluster_clusters

__all__ = ["ScenarioConfig", "load_config", "preset_config", "main", "entrypoint"]

SWEEP_HEADER = ("snr_db,emi_uniform_mc,emi_uniform_se,emi_opt_mc,emi_opt_se,"
                "emi_opt_approx,outer_iters,wall_time_s")

#: Published reference timings (seconds) for the r=t=4 benchmark scenario,
#: printed as context only, never as pass/fail.
BENCH_REFERENCE_S = {3: 7.0e-3, 4: 7.4e-3, 5: 8.3e-3}

_CONFIG_KEYS = {"r", "t", "sigma2", "snr_db_list", "clusters", "trials",
                "seed", "units", "tol"}
_CLUSTER_KEYS = {"mean_aod", "aod_spread", "mean_aoa", "aoa_spread", "power"}
_TOL_KEYS = {"fixed_point", "outer"}


def snr_db_to_sigma2(snr_db: float) -> float:
    return 10.0 ** (-snr_db / 10.0)


def sigma2_to_snr_db(sigma2: float) -> float:
    return -10.0 * math.log10(sigma2) + 0.0  # +0.0 normalizes -0.0


@dataclass(frozen=True)
class ScenarioConfig:
    """Parsed scenario: geometry, clusters (or isotropic paths), run knobs."""

    r: int
    t: int
    clusters: tuple | None
    iso_paths: int | None
    sigma2: float | None
    snr_db_list: tuple
    trials: int = 100_000
    seed: int = 0
    units: str = "nats"
    fixed_point_tol: float = 1e-10
    outer_tol: float = 1e-8

    def solver_opts(self) -> SolverOptions:
        return SolverOptions(tol=self.fixed_point_tol)

    def stats_at(self, sigma2: float) -> ChannelStats:
        if self.iso_paths is not None:
            return isotropic_stats(self.r, self.t, self.iso_paths, sigma2)
        return build_stats(self.clusters, self.r, self.t, sigma2)

    def single_sigma2(self) -> float:
        """The one noise level of the scenario; error if ambiguous."""
        if self.sigma2 is not None:
            return self.sigma2
        if len(self.snr_db_list) == 1:
            return snr_db_to_sigma2(self.snr_db_list[0])
        raise ConfigError("this command needs a single noise level: set "
                          "'sigma2' or a one-element 'snr_db_list'")

    def sweep_snrs(self) -> tuple:
        if self.snr_db_list:
            return self.snr_db_list
        if self.sigma2 is not None:
            return (sigma2_to_snr_db(self.sigma2),)
        raise ConfigError("sweep needs 'snr_db_list' (or 'sigma2')")

    def to_units(self, nats: float) -> float:
        return nats / math.log(2.0) if self.units == "bits" else nats


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _parse_config_dict(raw: dict) -> ScenarioConfig:
    _require(isinstance(raw, dict), "config root must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    _require(not unknown, f"unknown config keys: {sorted(unknown)}")
    for key in ("r", "t", "clusters"):
        _require(key in raw, f"config is missing required key '{key}'")

    r, t = raw["r"], raw["t"]
    _require(isinstance(r, int) and isinstance(t, int) and r >= 1 and t >= 1,
             "'r' and 't' must be integers >= 1")

    _require(isinstance(raw["clusters"], list) and raw["clusters"],
             "'clusters' must be a non-empty list")
    clusters = []
    for i, c in enumerate(raw["clusters"]):
        _require(isinstance(c, dict), f"cluster {i} must be an object")
        unknown = set(c) - _CLUSTER_KEYS
        _require(not unknown, f"cluster {i} has unknown keys: {sorted(unknown)}")
        missing = {"mean_aod", "aod_spread", "mean_aoa", "aoa_spread"} - set(c)
        _require(not missing, f"cluster {i} is missing keys: {sorted(missing)}")
        try:
            clusters.append(PathCluster(**c))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"cluster {i} is invalid: {exc}") from exc

    sigma2 = raw.get("sigma2")
    _require(sigma2 is None or (isinstance(sigma2, (int, float)) and sigma2 > 0),
             "'sigma2' must be a positive number")
    snr_list = raw.get("snr_db_list", [])
    _require(isinstance(snr_list, list)
             and all(isinstance(x, (int, float)) for x in snr_list),
             "'snr_db_list' must be a list of numbers")

    trials = raw.get("trials", 100_000)
    _require(isinstance(trials, int) and trials >= 2, "'trials' must be an integer >= 2")
    seed = raw.get("seed", 0)
    _require(isinstance(seed, int), "'seed' must be an integer")
    units = raw.get("units", "nats")
    _require(units in ("nats", "bits"), "'units' must be 'nats' or 'bits'")

    tol = raw.get("tol", {})
    _require(isinstance(tol, dict) and not set(tol) - _TOL_KEYS,
             f"'tol' keys must be a subset of {sorted(_TOL_KEYS)}")
    fp_tol = tol.get("fixed_point", 1e-10)
    outer_tol = tol.get("outer", 1e-8)
    _require(all(isinstance(x, (int, float)) and x > 0 for x in (fp_tol, outer_tol)),
             "tolerances must be positive numbers")

    return ScenarioConfig(r=r, t=t, clusters=tuple(clusters), iso_paths=None,
                          sigma2=float(sigma2) if sigma2 is not None else None,
                          snr_db_list=tuple(float(x) for x in snr_list),
                          trials=trials, seed=seed, units=units,
                          fixed_point_tol=float(fp_tol),
                          outer_tol=float(outer_tol))


def load_config(path: str) -> ScenarioConfig:
    """Parse and validate a scenario config JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    return _parse_config_dict(raw)


def preset_config(name: str) -> ScenarioConfig:
    """Bundled scenarios runnable without a config file."""
    snrs = tuple(float(x) for x in range(-5, 30, 5))
    if name in ("table1-4x4", "table1-8x8"):
        n = 4 if name.endswith("4x4") else 8
        return ScenarioConfig(r=n, t=n, clusters=tuple(five_cluster_clusters()),
                              iso_paths=None, sigma2=None, snr_db_list=snrs)
    if name == "iso-4x4":
        return ScenarioConfig(r=4, t=4, clusters=None, iso_paths=1,
                              sigma2=1.0, snr_db_list=())
    raise ConfigError(f"unknown preset {name!r} "
                      "(available: table1-4x4, table1-8x8, iso-4x4)")


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    updates = {}
    if args.trials is not None:
        _require(args.trials >= 2, "--trials must be >= 2")
        updates["trials"] = args.trials
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.units is not None:
        updates["units"] = args.units
    if getattr(args, "sigma2", None) is not None:
        _require(args.sigma2 > 0, "--sigma2 must be positive")
        updates["sigma2"] = args.sigma2
        updates["snr_db_list"] = ()
    if getattr(args, "snr_db", None) is not None:
        try:
            snrs = tuple(float(x) for x in args.snr_db.split(","))
        except ValueError as exc:
            raise ConfigError(f"--snr-db must be comma-separated numbers: {exc}")
        updates["snr_db_list"] = snrs
        updates["sigma2"] = None
    return replace(cfg, **updates) if updates else cfg


def _load_scenario(args) -> ScenarioConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = preset_config(args.preset)
    return _apply_overrides(cfg, args)


# ---------------------------------------------------------------------------
# Matrix file I/O
# ---------------------------------------------------------------------------

def write_matrix_json(path: str, m: np.ndarray) -> None:
    """Write a square complex matrix as row-major [re, im] pairs."""
    dim = m.shape[0]
    entries = [[float(v.real), float(v.imag)] for v in m.reshape(-1)]
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump({"dim": dim, "entries": entries}, fh)
            fh.write("\n")
    except OSError as exc:
        raise ConfigError(f"cannot write matrix file {path!r}: {exc}") from exc


def read_matrix_json(path: str) -> np.ndarray:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read matrix file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"matrix file {path!r} is not valid JSON: {exc}") from exc
    _require(isinstance(raw, dict) and set(raw) == {"dim", "entries"},
             "matrix file must be an object with keys 'dim' and 'entries'")
    dim = raw["dim"]
    _require(isinstance(dim, int) and dim >= 1, "'dim' must be an integer >= 1")
    entries = raw["entries"]
    _require(isinstance(entries, list) and len(entries) == dim * dim,
             f"'entries' must hold {dim * dim} [re, im] pairs")
    flat = np.empty(dim * dim, dtype=complex)
    for i, pair in enumerate(entries):
        _require(isinstance(pair, list) and len(pair) == 2
                 and all(isinstance(x, (int, float)) for x in pair),
                 f"entry {i} must be a [re, im] pair of numbers")
        flat[i] = complex(pair[0], pair[1])
    return flat.reshape(dim, dim)


def _covariance_from_args(args, t: int) -> np.ndarray:
    spec = getattr(args, "Q", "identity")
    if spec == "identity":
        return uniform_covariance(t)
    m = read_matrix_json(spec)
    _require(m.shape[0] == t, f"Q has dim {m.shape[0]}, scenario has t={t}")
    try:
        return covariance_matrix(m)
    except (MimoCapacityError, ValueError) as exc:
        raise ConfigError(f"Q from {spec!r} is not a valid covariance: {exc}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    cfg = _load_scenario(args)
    stats = cfg.stats_at(cfg.single_sigma2())
    q = _covariance_from_args(args, cfg.t)
    try:
        sol = solve_canonical(stats, q, cfg.solver_opts())
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    payload = {
        "sigma2": stats.sigma2,
        "snr_db": sigma2_to_snr_db(stats.sigma2),
        "delta": list(sol.delta),
        "delta_tilde": list(sol.delta_tilde),
        "iterations": sol.iterations,
        "residual": sol.residual,
        "contraction_radius": contraction_radius(sol, stats, q),
        "converged": True,
    }
    print(json.dumps(payload, indent=2))
    return 0


def cmd_optimize(args) -> int:
    cfg = _load_scenario(args)
    stats = cfg.stats_at(cfg.single_sigma2())
    try:
        report = optimize_covariance(stats, outer_tol=cfg.outer_tol,
                                     max_outer=args.max_outer,
                                     solver_opts=cfg.solver_opts(),
                                     max_restarts=args.max_restarts)
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_matrix_json(args.out_q, report.Q_star)
    payload = {
        "sigma2": stats.sigma2,
        "snr_db": sigma2_to_snr_db(stats.sigma2),
        "emi_opt": cfg.to_units(report.emi_approx_value),
        "units": cfg.units,
        "outer_iterations": report.outer_iterations,
        "converged": report.converged,
        "restarts": report.restarts,
        "q_file": args.out_q,
    }
    print(json.dumps(payload, indent=2))
    return 0


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def cmd_sweep(args) -> int:
    cfg = _load_scenario(args)
    lines = [SWEEP_HEADER]
    for snr_db in cfg.sweep_snrs():
        stats = cfg.stats_at(snr_db_to_sigma2(snr_db))
        t0 = time.perf_counter()
        report = optimize_covariance(stats, outer_tol=cfg.outer_tol,
                                     solver_opts=cfg.solver_opts(),
                                     max_restarts=args.max_restarts)
        mc_uniform = emi_mc(stats, None, trials=cfg.trials, seed=cfg.seed)
        mc_opt = emi_mc(stats, report.Q_star, trials=cfg.trials, seed=cfg.seed)
        wall = time.perf_counter() - t0 if args.timing else 0.0
        lines.append(",".join([
            _fmt(snr_db),
            _fmt(cfg.to_units(mc_uniform.mean)),
            _fmt(cfg.to_units(mc_uniform.std_err)),
            _fmt(cfg.to_units(mc_opt.mean)),
            _fmt(cfg.to_units(mc_opt.std_err)),
            _fmt(cfg.to_units(report.emi_approx_value)),
            str(report.outer_iterations),
            _fmt(wall),
        ]))
    try:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write CSV {args.out!r}: {exc}") from exc
    return 0


def cmd_bench(args) -> int:
    cfg = _load_scenario(args)
    _require(args.repeats >= 3, "--repeats must be >= 3")
    if cfg.iso_paths is not None:
        raise ConfigError("bench needs a cluster-based scenario")
    sigma2 = cfg.single_sigma2() \
        if (cfg.sigma2 is not None or len(cfg.snr_db_list) == 1) \
        else snr_db_to_sigma2(10.0)  # multi-point config: bench at 10 dB
    max_l = len(cfg.clusters)
    if args.paths is None:
        path_counts = [max_l]
    else:
        try:
            path_counts = [int(x) for x in args.paths.split(",")]
        except ValueError as exc:
            raise ConfigError(f"--paths must be comma-separated integers: {exc}")
        _require(all(1 <= p <= max_l for p in path_counts),
                 f"--paths values must be in 1..{max_l}")

    print(f"optimizer wall time, r={cfg.r}, t={cfg.t}, sigma2={sigma2:g} "
          f"({args.repeats} repeats, no Monte-Carlo in the loop)")
    for n_paths in path_counts:
        stats = build_stats(cfg.clusters[:n_paths], cfg.r, cfg.t, sigma2)
        times = []
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            optimize_covariance(stats, outer_tol=cfg.outer_tol,
                                solver_opts=cfg.solver_opts())
            times.append(time.perf_counter() - t0)
        med = statistics.median(times)
        ref = BENCH_REFERENCE_S.get(n_paths)
        context = f"  reference_s={ref:.1e} (published, r=t=4)" if ref else ""
        print(f"L={n_paths}  median_s={med:.6f}  min_s={min(times):.6f}"
              f"{context}")
    return 0


# ---------------------------------------------------------------------------
# Parser / entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit code 1)."""

    def error(self, message):
        raise ConfigError(message)


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", "-c", help="scenario config JSON file")
    src.add_argument("--preset", "-p",
                     help="bundled scenario: table1-4x4, table1-8x8, iso-4x4")
    p.add_argument("--trials", type=int, help="override Monte-Carlo trials")
    p.add_argument("--seed", type=int, help="override base seed")
    p.add_argument("--units", choices=("nats", "bits"), help="override units")
    p.add_argument("--sigma2", type=float, help="override noise power")
    p.add_argument("--snr-db", dest="snr_db",
                   help="override SNR list, comma-separated dB values")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mimo-capacity",
                     description="Capacity-achieving covariance tools for "
                                 "frequency-selective correlated MIMO channels")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve",
                       help="solve the canonical fixed point, print JSON")
    _add_scenario_args(p)
    p.add_argument("--Q", default="identity",
                   help="'identity' or a matrix JSON file (default identity)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("optimize",
                       help="maximize the EMI approximation, write Q to file")
    _add_scenario_args(p)
    p.add_argument("--out-q", default="q_star.json",
                   help="output matrix JSON path (default q_star.json)")
    p.add_argument("--max-outer", type=int, default=100)
    p.add_argument("--max-restarts", type=int, default=3)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="SNR sweep, CSV output")
    _add_scenario_args(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--max-restarts", type=int, default=3)
    p.add_argument("--timing", action="store_true",
                   help="record per-point wall time (makes the CSV "
                        "run-dependent; default writes 0)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="optimizer timing benchmark")
    _add_scenario_args(p)
    p.add_argument("--repeats", type=int, default=5, help="repeats (>= 3)")
    p.add_argument("--paths",
                   help="comma-separated path counts, each a prefix of the "
                        "configured cluster list (default: all clusters)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
