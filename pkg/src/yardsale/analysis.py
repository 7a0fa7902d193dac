"""Post-processing: monotonicity verification, tail fitting, model comparison.

The central claim being checked is that the Gini coefficient never
decreases under any of the three dynamics, so the verifier treats a
negative increment beyond tolerance as a hard failure, not a warning.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .agents import InitialCondition, SimConfig, run
from .beta_dist import BetaDistribution
from .boltzmann import BoltzmannConfig, solve_boltzmann
from .distribution import WealthDistribution
from .errors import ConfigError, InsufficientDataError
from .fokker_planck import FpConfig, fp_gini_rate, solve_fp
from .grid import WealthGrid
from .traces import GiniTrace

MIN_TAIL_SAMPLES = 50


# ---------------------------------------------------------------- H-theorem

@dataclass(frozen=True)
class TolPolicy:
    """Allowance for a recorded Gini decrease.

    Deterministic solvers get a flat tol (discretization error estimate);
    stochastic ensembles get stderr_factor times the per-record standard
    error of the ensemble mean, whichever is larger.
    """

    tol: float = 0.0
    stderr: np.ndarray | None = None
    stderr_factor: float = 3.0

    def __post_init__(self) -> None:
        if self.tol < 0.0:
            raise ValueError("tol must be nonnegative")
        if self.stderr_factor <= 0.0:
            raise ValueError("stderr_factor must be positive")

    @classmethod
    def deterministic(cls, tol: float) -> "TolPolicy":
        return cls(tol=tol)

    @classmethod
    def stochastic(cls, stderr: np.ndarray, factor: float = 3.0) -> "TolPolicy":
        return cls(stderr=np.asarray(stderr, dtype=float), stderr_factor=factor)

    def allowances(self, n_records: int) -> np.ndarray:
        out = np.full(n_records - 1, self.tol)
        if self.stderr is not None:
            se = np.asarray(self.stderr, dtype=float)
            if se.size != n_records:
                raise ValueError("stderr must have one entry per trace record")
            out = np.maximum(out, self.stderr_factor * np.maximum(se[:-1], se[1:]))
        return out


@dataclass(frozen=True)
class HTheoremReport:
    passed: bool
    increments: np.ndarray
    allowances: np.ndarray
    t: np.ndarray
    violations: tuple[tuple[int, float, float], ...]  # (increment index, dG, allowance)
    final_gini: float

    @property
    def min_increment(self) -> float:
        return float(self.increments.min())

    def summary(self) -> str:
        head = "PASS" if self.passed else "FAIL"
        lines = [
            f"H-theorem check: {head}  ({self.increments.size} increments, "
            f"min dG = {self.min_increment:.3e}, final G = {self.final_gini:.6f})"
        ]
        for k, (dg, a) in enumerate(zip(self.increments, self.allowances)):
            flag = "  VIOLATION" if dg < -a else ""
            lines.append(
                f"  [{k:4d}] t {self.t[k]:.6g} -> {self.t[k + 1]:.6g}: "
                f"dG = {dg: .6e}  (allowed >= {-a:.3e}){flag}"
            )
        return "\n".join(lines)

    def __str__(self) -> str:
        return self.summary()


def verify_h_theorem(trace: GiniTrace, policy: TolPolicy | None = None) -> HTheoremReport:
    """Flag every recorded Gini decrease beyond the policy allowance."""
    if len(trace) < 2:
        raise ValueError("need at least 2 records to check monotonicity")
    policy = policy or TolPolicy()
    dg = np.diff(trace.gini)
    allow = policy.allowances(len(trace))
    bad = np.nonzero(dg < -allow)[0]
    violations = tuple((int(k), float(dg[k]), float(allow[k])) for k in bad)
    return HTheoremReport(
        passed=bad.size == 0,
        increments=dg,
        allowances=allow,
        t=trace.t,
        violations=violations,
        final_gini=float(trace.gini[-1]),
    )


# ---------------------------------------------------------------- tail fit

@dataclass(frozen=True)
class ParetoFit:
    alpha: float
    w_min: float
    n_tail: float
    stderr: float                 # alpha / sqrt(n_tail)
    ks_distance: float            # sup |empirical - fitted| CDF over the tail
    loglog_residual: float        # rms residual of the log-log survival line

    def summary(self) -> str:
        return (
            f"alpha = {self.alpha:.4f} +- {self.stderr:.4f}  (w_min = {self.w_min:.6g}, "
            f"tail n = {self.n_tail:.6g}, KS = {self.ks_distance:.4f}, "
            f"log-log residual = {self.loglog_residual:.4f})"
        )


def _fit_samples_at(w_sorted: np.ndarray, w_min: float) -> ParetoFit:
    tail = w_sorted[w_sorted >= w_min]
    n = tail.size
    if n < MIN_TAIL_SAMPLES:
        raise InsufficientDataError(
            f"only {n} samples above w_min = {w_min:.6g}; need {MIN_TAIL_SAMPLES}"
        )
    logs = np.log(tail / w_min)
    mean_log = logs.mean()
    if mean_log <= 0.0:
        raise InsufficientDataError("tail has no spread above w_min")
    alpha = 1.0 / mean_log
    model_cdf = 1.0 - (w_min / tail) ** alpha
    i = np.arange(1, n + 1)
    ks = float(np.max(np.maximum(i / n - model_cdf, model_cdf - (i - 1) / n)))
    surv = 1.0 - (i - 0.5) / n  # midpoint rule keeps the last point usable
    coeffs = np.polyfit(np.log(tail), np.log(surv), 1)
    resid = np.log(surv) - np.polyval(coeffs, np.log(tail))
    return ParetoFit(
        alpha=float(alpha),
        w_min=float(w_min),
        n_tail=float(n),
        stderr=float(alpha / math.sqrt(n)),
        ks_distance=ks,
        loglog_residual=float(np.sqrt(np.mean(resid**2))),
    )


def _fit_dist_at(dist: WealthDistribution, w_min: float) -> ParetoFit:
    grid = dist.grid
    n_tail = float(grid.tail_at(dist.density, w_min))
    if n_tail < MIN_TAIL_SAMPLES:
        raise InsufficientDataError(
            f"tail holds {n_tail:.3g} agents above w_min = {w_min:.6g}; need {MIN_TAIL_SAMPLES}"
        )
    # effective MLE: replace the sample mean of ln(w/w_min) by its
    # density-weighted expectation over the tail
    mask = grid.nodes > w_min
    vals = np.zeros_like(dist.density)
    vals[mask] = dist.density[mask] * np.log(grid.nodes[mask] / w_min)
    mean_log = (grid.integrate(vals)) / n_tail
    if mean_log <= 0.0:
        raise InsufficientDataError("tail has no spread above w_min")
    alpha = 1.0 / mean_log
    w_tail = grid.nodes[mask]
    emp_surv = np.asarray(grid.tail_at(dist.density, w_tail)) / n_tail
    model_surv = (w_min / w_tail) ** alpha
    ks = float(np.max(np.abs(model_surv - emp_surv)))
    # grid truncation forces survival to 0 at w_max, bending the log-log
    # line; judge linearity only where the tail is well represented
    keep = emp_surv > 1e-3
    if np.count_nonzero(keep) < 3:
        keep = emp_surv > 1e-12
    coeffs = np.polyfit(np.log(w_tail[keep]), np.log(emp_surv[keep]), 1)
    resid = np.log(emp_surv[keep]) - np.polyval(coeffs, np.log(w_tail[keep]))
    return ParetoFit(
        alpha=float(alpha),
        w_min=float(w_min),
        n_tail=n_tail,
        stderr=float(alpha / math.sqrt(n_tail)),
        ks_distance=ks,
        loglog_residual=float(np.sqrt(np.mean(resid**2))),
    )


def pareto_fit(
    data: np.ndarray | WealthDistribution,
    w_min: float | None = None,
    max_candidates: int = 64,
) -> ParetoFit:
    """Maximum-likelihood tail exponent for samples or a grid density.

    With w_min given, fits the tail above it; otherwise scans candidate
    cutoffs (order statistics for samples, grid nodes for densities) and
    keeps the one minimizing the KS distance.
    """
    if isinstance(data, WealthDistribution):
        if w_min is not None:
            return _fit_dist_at(data, w_min)
        nodes = data.grid.nodes
        positive = nodes[(nodes > 0.0) & (data.grid.tail_at(data.density, nodes) >= MIN_TAIL_SAMPLES)]
        candidates = positive[:: max(1, positive.size // max_candidates)]
        fits = [_fit_dist_at(data, float(c)) for c in candidates]
    else:
        w = np.sort(np.asarray(data, dtype=float))
        if w.size == 0:
            raise InsufficientDataError("no samples")
        if np.any(w < 0.0):
            raise ValueError("wealth samples must be nonnegative")
        if w_min is not None:
            return _fit_samples_at(w, w_min)
        hi = w.size - MIN_TAIL_SAMPLES
        if hi < 0:
            raise InsufficientDataError(
                f"{w.size} samples total; need {MIN_TAIL_SAMPLES} above any cutoff"
            )
        idx = np.unique(np.linspace(0, hi, min(max_candidates, hi + 1)).astype(int))
        candidates = np.unique(w[idx])
        candidates = candidates[candidates > 0.0]
        fits = [_fit_samples_at(w, float(c)) for c in candidates]
    if not fits:
        raise InsufficientDataError("no viable cutoff candidates")
    return min(fits, key=lambda f: f.ks_distance)


# ---------------------------------------------------------------- comparison

def compare_traces(curves: dict[str, tuple[np.ndarray, np.ndarray]], n_tau: int = 201
                   ) -> tuple[np.ndarray, dict[str, np.ndarray], dict[str, float]]:
    """Resample named G(t) curves onto the common time horizon.

    Returns the shared time array, the aligned curves, and the max
    pairwise deviation for every unordered pair, keyed "a_vs_b".
    """
    if len(curves) < 2:
        raise ValueError("need at least two curves to compare")
    t_end = min(float(t[-1]) for t, _ in curves.values())
    t_start = max(float(t[0]) for t, _ in curves.values())
    if t_end <= t_start:
        raise ConfigError("curves share no time overlap")
    tau = np.linspace(t_start, t_end, n_tau)
    aligned = {name: np.interp(tau, t, g) for name, (t, g) in curves.items()}
    names = sorted(aligned)
    devs: dict[str, float] = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            devs[f"{a}_vs_{b}"] = float(np.max(np.abs(aligned[a] - aligned[b])))
    return tau, aligned, devs


@dataclass(frozen=True)
class CrossCompareReport:
    tau: np.ndarray
    curves: dict[str, np.ndarray]
    max_deviation: dict[str, float]
    agent_time_scale: float | None      # sweeps -> continuum time calibration
    agent_stderr: np.ndarray | None     # resampled on tau
    fp_tolerance: float                 # grid-halving error of the FP curve
    max_z: float | None                 # agents vs FP in combined error units

    def summary(self) -> str:
        lines = [f"cross-model comparison over t in [{self.tau[0]:.6g}, {self.tau[-1]:.6g}]"]
        for k, v in sorted(self.max_deviation.items()):
            lines.append(f"  max |dG| {k}: {v:.3e}")
        if self.agent_time_scale is not None:
            lines.append(f"  agent time calibration: {self.agent_time_scale:.4f} per sweep")
        if self.max_z is not None:
            lines.append(f"  agents vs fp: max {self.max_z:.2f} combined error bars")
        lines.append(f"  fp grid-halving tolerance: {self.fp_tolerance:.3e}")
        return "\n".join(lines)

    def __str__(self) -> str:
        return self.summary()


def _fp_curve(initial: WealthDistribution, config: FpConfig) -> GiniTrace:
    return solve_fp(initial, config).trace


def cross_compare(
    initial: InitialCondition,
    grid: WealthGrid,
    fp_config: FpConfig,
    boltzmann_config: BoltzmannConfig | None = None,
    sim_config: SimConfig | None = None,
    n_tau: int = 201,
) -> CrossCompareReport:
    """Run the available dynamics from one initial condition and compare G(t).

    The Fokker-Planck run is the reference clock. A Boltzmann config must
    use an exchange-fraction density whose second moment matches gamma; an
    agent config must use the same density and the same initial condition.
    Agent sweep time is calibrated onto continuum time by matching initial
    dG/dt slopes (one sweep is about one unit when each agent transacts
    once per unit time; the calibration absorbs the residual).
    """
    d0 = initial.density(grid, n_agents=1.0)
    curves: dict[str, tuple[np.ndarray, np.ndarray]] = {}

    fp_trace = _fp_curve(d0, fp_config)
    curves["fp"] = (fp_trace.t, fp_trace.gini)
    idx = grid.coarse_indices()
    d0_coarse = WealthDistribution(grid.coarsen(), d0.density[idx])
    coarse_trace = _fp_curve(d0_coarse, fp_config)
    tol = float(
        np.max(np.abs(np.interp(fp_trace.t, coarse_trace.t, coarse_trace.gini) - fp_trace.gini))
    )

    if boltzmann_config is not None:
        gamma_eta = boltzmann_config.beta.second_moment
        if not math.isclose(gamma_eta, fp_config.gamma, rel_tol=1e-9):
            raise ConfigError(
                f"eta second moment {gamma_eta:.6g} does not match gamma {fp_config.gamma:.6g}"
            )
        b_trace = solve_boltzmann(d0, boltzmann_config).trace
        curves["boltzmann"] = (b_trace.t, b_trace.gini)

    scale = None
    se_tau = None
    max_z = None
    if sim_config is not None:
        if sim_config.initial != initial:
            raise ConfigError("agent simulation must start from the shared initial condition")
        if boltzmann_config is not None and sim_config.beta != boltzmann_config.beta:
            raise ConfigError("agent and Boltzmann runs must share the exchange-fraction density")
        if not math.isclose(sim_config.beta.second_moment, fp_config.gamma, rel_tol=1e-9):
            raise ConfigError("agent exchange-fraction second moment does not match gamma")
        res = run(sim_config)
        t_sw = res.t
        gm = res.gini_mean
        k = max(2, len(t_sw) // 10)
        slope_agent = float(np.polyfit(t_sw[: k + 1], gm[: k + 1], 1)[0])
        slope_fp = fp_gini_rate(d0, fp_config.gamma)
        if slope_agent <= 0.0 or slope_fp <= 0.0:
            raise ConfigError("cannot calibrate time from nonpositive initial slopes")
        scale = slope_agent / slope_fp
        curves["agents"] = (t_sw * scale, gm)

    tau, aligned, devs = compare_traces(curves, n_tau=n_tau)
    if sim_config is not None:
        se_tau = np.interp(tau, curves["agents"][0], res.gini_stderr)
        combined = np.sqrt(se_tau**2 + tol**2)
        max_z = float(np.max(np.abs(aligned["agents"] - aligned["fp"]) / np.maximum(combined, 1e-15)))
    return CrossCompareReport(
        tau=tau,
        curves=aligned,
        max_deviation=devs,
        agent_time_scale=scale,
        agent_stderr=se_tau,
        fp_tolerance=tol,
        max_z=max_z,
    )
