"""Command-line entry point.

Subcommands: simulate-agents, solve-boltzmann, solve-fp, analyze, ingest,
metrics. Each run writes its outputs under a run directory together with a
manifest recording the resolved configuration, seed, and package version,
so any run can be reproduced byte-for-byte from its manifest.

Exit codes: 0 success, 1 runtime failure (solver instability, failed
monotonicity check, bad input data), 2 configuration error.
"""
from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .agents import InitialCondition, SimConfig, run
from .analysis import TolPolicy, pareto_fit, verify_h_theorem
from .beta_dist import BetaDistribution
from .boltzmann import BoltzmannConfig, solve_boltzmann
from .distribution import WealthDistribution, moments
from .errors import ConfigError, InsufficientDataError, StabilityError
from .fokker_planck import FpConfig, solve_fp
from .grid import WealthGrid
from .inequality import lorenz_curve, sample_gini
from . import io_csv

_GRID_DEFAULTS = {"kind": "log", "nodes": 512, "wmax": 50.0, "wfirst": 1e-3}
_ETA_DEFAULTS = {"kind": "uniform", "beta0": 0.1}
_INITIAL_DEFAULTS = {"kind": "exponential", "w0": 1.0, "alpha": 1.5, "wmin": 1.0, "mean": 1.0}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file; explicit flags override it")
    p.add_argument("--out", help="output directory (default runs/<timestamp>-<label>/)")
    p.add_argument("--label", help="run label used in the default output directory name")
    p.add_argument("--seed", type=int, help="base RNG seed (default 0)")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", choices=("linear", "log"), help="node spacing (default log)")
    p.add_argument("--nodes", type=int, help="grid size (default 512)")
    p.add_argument("--wmax", type=float, help="largest grid wealth (default 50)")
    p.add_argument("--wfirst", type=float, help="first positive node of a log grid (default 1e-3)")


def _add_eta(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eta", choices=("uniform", "twopoint"),
                   help="exchange-fraction density kind (default uniform)")
    p.add_argument("--beta0", type=float, help="exchange-fraction scale (default 0.1)")


def _add_initial(p: argparse.ArgumentParser) -> None:
    p.add_argument("--initial", choices=("equal", "pareto", "exponential"),
                   help="initial condition (default exponential)")
    p.add_argument("--w0", type=float, help="equal initial wealth (default 1)")
    p.add_argument("--alpha", type=float, help="initial Pareto exponent (default 1.5)")
    p.add_argument("--wmin", type=float, help="initial Pareto scale (default 1)")
    p.add_argument("--mean", type=float, help="initial exponential mean (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="yardsale",
        description="Yard-sale exchange dynamics: agent Monte Carlo, collision "
                    "integral, and diffusion-limit solvers with inequality metrics.",
    )
    parser.add_argument("--version", action="version", version=f"yardsale {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-agents", help="Monte Carlo ensemble of pairwise exchanges")
    _add_common(p)
    _add_eta(p)
    _add_initial(p)
    p.add_argument("--agents", type=int, help="agents per replica (default 1000)")
    p.add_argument("--transactions", type=int, help="transactions per replica (default 10^6)")
    p.add_argument("--replicas", type=int, help="independent replicas (default 1)")
    p.add_argument("--record-every", type=int, help="transactions between records (default 10000)")

    p = sub.add_parser("solve-boltzmann", help="march the pairwise collision integral")
    _add_common(p)
    _add_grid(p)
    _add_eta(p)
    _add_initial(p)
    p.add_argument("--steps", type=int, help="time steps (default 500)")
    p.add_argument("--dt", type=float, help="time step (default: adaptive stability bound)")
    p.add_argument("--nbeta", type=int, help="beta quadrature points (default 16)")
    p.add_argument("--record-every", type=int, help="steps between records (default 10)")
    p.add_argument("--checkpoint-every", type=int,
                   help="steps between distribution checkpoints (default: final only)")

    p = sub.add_parser("solve-fp", help="march the diffusion-limit equation")
    _add_common(p)
    _add_grid(p)
    _add_eta(p)
    _add_initial(p)
    p.add_argument("--gamma", type=float,
                   help="diffusion rate constant (default: second moment of eta)")
    p.add_argument("--steps", type=int, help="time steps (default 2000)")
    p.add_argument("--dt", type=float, help="time step (default: adaptive stability bound)")
    p.add_argument("--record-every", type=int, help="steps between records (default 10)")
    p.add_argument("--checkpoint-every", type=int,
                   help="steps between distribution checkpoints (default: final only)")

    p = sub.add_parser("analyze", help="verify monotonicity of recorded traces; fit tails")
    _add_common(p)
    p.add_argument("--trace", help="trace CSV from a deterministic solver")
    p.add_argument("--aggregate", help="ensemble aggregate CSV (t,G_mean,G_stderr)")
    p.add_argument("--tol", type=float, help="allowed Gini decrease for --trace (default 0)")
    p.add_argument("--condensation", type=float,
                   help="additionally require final G at or above this value")
    p.add_argument("--pareto", help="wealth samples CSV for a tail fit")
    p.add_argument("--pareto-wmin", type=float,
                   help="tail cutoff (default: minimize KS distance)")

    p = sub.add_parser("ingest", help="load external wealth samples")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--input", required=True, help="CSV with one wealth per row")
    p.add_argument("--bin", action="store_true",
                   help="also bin the samples into a grid density")

    p = sub.add_parser("metrics", help="inequality metrics of a wealth sample file")
    p.add_argument("--input", required=True, help="CSV with one wealth per row")
    p.add_argument("--lorenz-out", help="write the sample Lorenz curve CSV here")
    return parser


# ------------------------------------------------------------ config merge

def _as_config_error(fn, *args, **kwargs):
    """Constructing run configuration from user input: validation failures
    are configuration errors (exit 2), not runtime errors."""
    try:
        return fn(*args, **kwargs)
    except ValueError as e:
        raise ConfigError(str(e)) from e


class Resolver:
    """Flag > config-file > default, recording every resolved value."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.ini = configparser.ConfigParser()
        if getattr(args, "config", None):
            path = Path(args.config)
            if not path.is_file():
                raise ConfigError(f"config file not found: {path}")
            try:
                self.ini.read(path)
            except configparser.Error as e:
                raise ConfigError(f"bad config file {path}: {e}") from e
        self.resolved: dict[str, dict[str, object]] = {}

    def get(self, section: str, key: str, default, cast, flag: str | None = None):
        flag = key if flag is None else flag
        value = getattr(self.args, flag, None)
        if value is None and self.ini.has_option(section, key):
            raw = self.ini.get(section, key)
            try:
                value = cast(raw)
            except ValueError:
                raise ConfigError(f"config [{section}] {key}: cannot parse {raw!r}") from None
        if value is None:
            value = default
        self.resolved.setdefault(section, {})[key] = value
        return value


def _resolve_grid(r: Resolver) -> WealthGrid:
    kind = r.get("grid", "kind", _GRID_DEFAULTS["kind"], str, flag="grid")
    nodes = r.get("grid", "nodes", _GRID_DEFAULTS["nodes"], int)
    wmax = r.get("grid", "wmax", _GRID_DEFAULTS["wmax"], float)
    if kind == "linear":
        return _as_config_error(WealthGrid.linear, wmax, nodes)
    if kind == "log":
        wfirst = r.get("grid", "wfirst", _GRID_DEFAULTS["wfirst"], float)
        return _as_config_error(WealthGrid.logarithmic, wmax, nodes, w_first=wfirst)
    raise ConfigError(f"grid kind must be linear or log, not {kind!r}")


def _resolve_eta(r: Resolver) -> BetaDistribution:
    kind = r.get("eta", "kind", _ETA_DEFAULTS["kind"], str, flag="eta")
    beta0 = r.get("eta", "beta0", _ETA_DEFAULTS["beta0"], float)
    if kind == "uniform":
        return _as_config_error(BetaDistribution.uniform, beta0)
    if kind == "twopoint":
        return _as_config_error(BetaDistribution.twopoint, beta0)
    raise ConfigError(f"eta kind must be uniform or twopoint, not {kind!r}")


def _resolve_initial(r: Resolver) -> InitialCondition:
    kind = r.get("initial", "kind", _INITIAL_DEFAULTS["kind"], str, flag="initial")
    if kind == "equal":
        return _as_config_error(
            InitialCondition.equal, r.get("initial", "w0", _INITIAL_DEFAULTS["w0"], float)
        )
    if kind == "pareto":
        return _as_config_error(
            InitialCondition.pareto,
            r.get("initial", "alpha", _INITIAL_DEFAULTS["alpha"], float),
            r.get("initial", "wmin", _INITIAL_DEFAULTS["wmin"], float),
        )
    if kind == "exponential":
        return _as_config_error(
            InitialCondition.exponential, r.get("initial", "mean", _INITIAL_DEFAULTS["mean"], float)
        )
    raise ConfigError(f"initial kind must be equal, pareto, or exponential, not {kind!r}")


def _run_dir(r: Resolver, command: str) -> Path:
    out = r.get("run", "out", None, str)
    label = r.get("run", "label", command, str)
    if out is not None:
        d = Path(out)
    else:
        stamp = time.strftime("%Y%m%d-%H%M%S", time.gmtime())
        d = Path("runs") / f"{stamp}-{label}"
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_manifest(run_dir: Path, command: str, r: Resolver, outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "config": r.resolved,
        "outputs": sorted(outputs),
    }
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


# ------------------------------------------------------------- subcommands

def _cmd_simulate_agents(r: Resolver) -> int:
    seed = r.get("run", "seed", 0, int)
    eta = _resolve_eta(r)
    initial = _resolve_initial(r)
    config = _as_config_error(
        SimConfig,
        n_agents=r.get("agents", "agents", 1000, int),
        initial=initial,
        beta=eta,
        n_transactions=r.get("agents", "transactions", 1_000_000, int),
        record_every=r.get("agents", "record_every", 10_000, int),
        n_replicas=r.get("agents", "replicas", 1, int),
        seed=seed,
    )
    run_dir = _run_dir(r, "simulate-agents")
    result = run(config)
    outputs = []
    for k, (trace, final) in enumerate(zip(result.traces, result.finals)):
        tname, wname = f"trace_replica_{k:03d}.csv", f"wealths_replica_{k:03d}.csv"
        io_csv.write_trace(run_dir / tname, trace)
        io_csv.write_snapshot(run_dir / wname, final)
        outputs += [tname, wname]
    io_csv.write_aggregate_trace(
        run_dir / "aggregate.csv", result.t, result.gini_mean, result.gini_stderr
    )
    outputs.append("aggregate.csv")
    _write_manifest(run_dir, "simulate-agents", r, outputs)
    g = result.gini_mean
    print(f"replicas: {config.n_replicas}  transactions each: {config.n_transactions}")
    print(f"mean G: {g[0]:.6f} -> {g[-1]:.6f}  (final stderr {result.gini_stderr[-1]:.2e})")
    print(f"outputs in {run_dir}")
    return 0


def _emit_solver_outputs(run_dir: Path, r: Resolver, command: str, trace, final, checkpoints) -> None:
    outputs = ["trace.csv", "final.csv"]
    io_csv.write_trace(run_dir / "trace.csv", trace)
    io_csv.write_distribution(run_dir / "final.csv", final)
    for step, dist in checkpoints:
        name = f"checkpoint_{step:07d}.csv"
        io_csv.write_distribution(run_dir / name, dist)
        outputs.append(name)
    _write_manifest(run_dir, command, r, outputs)
    n0, w0 = trace.n_agents[0], trace.total_wealth[0]
    print(f"G: {trace.gini[0]:.6f} -> {trace.gini[-1]:.6f}  over t = {trace.t[-1]:.6g}")
    print(f"relative drift: N {abs(trace.n_agents[-1] / n0 - 1):.2e}  "
          f"W {abs(trace.total_wealth[-1] / w0 - 1):.2e}")
    print(f"outputs in {run_dir}")


def _cmd_solve_boltzmann(r: Resolver) -> int:
    r.get("run", "seed", 0, int)  # recorded for provenance; solver is deterministic
    eta = _resolve_eta(r)
    grid = _resolve_grid(r)
    initial = _resolve_initial(r).density(grid, n_agents=1.0)
    config = _as_config_error(
        BoltzmannConfig,
        beta=eta,
        n_steps=r.get("boltzmann", "steps", 500, int),
        dt=r.get("boltzmann", "dt", None, float),
        n_beta=r.get("boltzmann", "nbeta", 16, int),
        record_every=r.get("boltzmann", "record_every", 10, int),
        checkpoint_every=r.get("boltzmann", "checkpoint_every", None, int),
    )
    run_dir = _run_dir(r, "solve-boltzmann")
    result = solve_boltzmann(initial, config)
    _emit_solver_outputs(run_dir, r, "solve-boltzmann", result.trace, result.final,
                         result.checkpoints)
    print(f"split-rate tolerances: {result.tol_linear:.2e} {result.tol_quadratic:.2e}  "
          f"clipped mass: {result.clipped_total:.2e}")
    return 0


def _cmd_solve_fp(r: Resolver) -> int:
    r.get("run", "seed", 0, int)
    grid = _resolve_grid(r)
    initial = _resolve_initial(r).density(grid, n_agents=1.0)
    gamma = r.get("fp", "gamma", None, float)
    if gamma is None:
        gamma = _resolve_eta(r).second_moment
        r.resolved.setdefault("fp", {})["gamma"] = gamma
    config = _as_config_error(
        FpConfig,
        gamma=gamma,
        n_steps=r.get("fp", "steps", 2000, int),
        dt=r.get("fp", "dt", None, float),
        record_every=r.get("fp", "record_every", 10, int),
        checkpoint_every=r.get("fp", "checkpoint_every", None, int),
    )
    run_dir = _run_dir(r, "solve-fp")
    result = solve_fp(initial, config)
    _emit_solver_outputs(run_dir, r, "solve-fp", result.trace, result.final, result.checkpoints)
    if result.truncation_flagged:
        print("warning: nonzero flux reached the upper grid boundary")
    return 0


def _cmd_analyze(r: Resolver, args: argparse.Namespace) -> int:
    if not (args.trace or args.aggregate or args.pareto):
        raise ConfigError("analyze needs --trace, --aggregate, or --pareto")
    run_dir = _run_dir(r, "analyze")
    lines: list[str] = []
    failed = False
    if args.trace:
        trace = io_csv.read_trace(args.trace)
        tol = r.get("analyze", "tol", 0.0, float, flag="tol")
        report = verify_h_theorem(trace, TolPolicy.deterministic(tol))
        lines.append(report.summary())
        failed |= not report.passed
        if args.condensation is not None:
            ok = report.final_gini >= args.condensation
            lines.append(f"condensation check: final G = {report.final_gini:.6f} "
                         f">= {args.condensation}: {'PASS' if ok else 'FAIL'}")
            failed |= not ok
    if args.aggregate:
        t, gm, se = io_csv.read_aggregate_trace(args.aggregate)
        trace_like = _aggregate_as_trace(t, gm)
        report = verify_h_theorem(trace_like, TolPolicy.stochastic(se))
        lines.append(report.summary())
        failed |= not report.passed
        if args.condensation is not None:
            ok = report.final_gini >= args.condensation
            lines.append(f"condensation check: final G = {report.final_gini:.6f} "
                         f">= {args.condensation}: {'PASS' if ok else 'FAIL'}")
            failed |= not ok
    if args.pareto:
        samples = io_csv.read_wealth_samples(args.pareto)
        fit = pareto_fit(samples, w_min=args.pareto_wmin)
        lines.append("tail fit: " + fit.summary())
    text = "\n".join(lines)
    (run_dir / "report.txt").write_text(text + "\n")
    _write_manifest(run_dir, "analyze", r, ["report.txt"])
    print(text)
    return 1 if failed else 0


def _aggregate_as_trace(t: np.ndarray, gm: np.ndarray):
    from .traces import GiniTrace

    z = np.full(t.size, np.nan)
    return GiniTrace(t=t, gini=gm, n_agents=z, total_wealth=z, rate=z)


def _bin_samples(grid: WealthGrid, samples: np.ndarray) -> tuple[WealthDistribution, int]:
    """Deposit each sample on its two bracketing nodes (linear split), which
    conserves both count and total wealth exactly for in-range samples.
    Samples beyond w_max are parked at the last node and counted."""
    nodes = grid.nodes
    mass = np.zeros(nodes.size)
    over = int(np.count_nonzero(samples > nodes[-1]))
    w = np.minimum(samples, nodes[-1])
    idx = np.clip(np.searchsorted(nodes, w, side="right") - 1, 0, nodes.size - 2)
    frac = (w - nodes[idx]) / (nodes[idx + 1] - nodes[idx])
    np.add.at(mass, idx, 1.0 - frac)
    np.add.at(mass, idx + 1, frac)
    return WealthDistribution(grid, mass / grid.weights), over


def _cmd_ingest(r: Resolver, args: argparse.Namespace) -> int:
    samples = io_csv.read_wealth_samples(args.input)
    run_dir = _run_dir(r, "ingest")
    outputs = ["samples.csv"]
    io_csv.write_snapshot(run_dir / "samples.csv", samples)
    g = sample_gini(samples)
    print(f"samples: {samples.size}  total wealth: {samples.sum():.6g}  sample G: {g:.6f}")
    extra: dict[str, object] = {}
    if args.bin:
        grid = _resolve_grid(r)
        dist, over = _bin_samples(grid, samples)
        io_csv.write_distribution(run_dir / "distribution.csv", dist)
        outputs.append("distribution.csv")
        n, w = moments(dist)
        extra = {
            "binning": {
                "samples": int(samples.size),
                "samples_beyond_wmax": over,
                "binned_n": n,
                "binned_w": w,
                "sample_w": float(samples.sum()),
            }
        }
        print(f"binned: N = {n:.6g}  W = {w:.6g}  beyond w_max: {over}")
    r.resolved.setdefault("ingest", {}).update({"input": args.input, **extra})
    _write_manifest(run_dir, "ingest", r, outputs)
    print(f"outputs in {run_dir}")
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    samples = io_csv.read_wealth_samples(args.input)
    n = samples.size
    total = float(samples.sum())
    g = sample_gini(samples)
    print(f"n = {n}")
    print(f"W = {total!r}")
    print(f"mean = {total / n!r}")
    print(f"G = {g!r}")
    if args.lorenz_out:
        order = np.sort(samples)
        f = np.arange(n + 1) / n
        l = np.concatenate([[0.0], np.cumsum(order)]) / total
        lines = [io_csv.LORENZ_HEADER] + [f"{repr(float(a))},{repr(float(b))}" for a, b in zip(f, l)]
        Path(args.lorenz_out).write_text("\n".join(lines) + "\n")
        print(f"lorenz curve written to {args.lorenz_out}")
    return 0


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "metrics":
            return _cmd_metrics(args)
        r = Resolver(args)
        if args.command == "simulate-agents":
            return _cmd_simulate_agents(r)
        if args.command == "solve-boltzmann":
            return _cmd_solve_boltzmann(r)
        if args.command == "solve-fp":
            return _cmd_solve_fp(r)
        if args.command == "analyze":
            return _cmd_analyze(r, args)
        if args.command == "ingest":
            return _cmd_ingest(r, args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError, InsufficientDataError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except StabilityError as e:
        print(f"solver aborted: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
