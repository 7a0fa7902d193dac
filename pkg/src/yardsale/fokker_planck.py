"""Nonlocal Fokker-Planck limit of the yard-sale exchange dynamics.

A transaction moves a fraction of the poorer party's wealth, so an agent
at wealth w accumulates variance at rate gamma * V(w), where gamma is the
second moment of the exchange-fraction density and

    V(w) = E_partner[ min(w, x)^2 ]
         = (1/N) [ int_0^w x^2 P(x) dx  +  w^2 int_w^inf P(x) dx ].

In the frequent-small-transaction limit the density therefore obeys the
degenerate nonlinear diffusion

    dP/dt = d^2/dw^2 [ (gamma / 2) V(w) P(w) ],

which is also the small-beta expansion of the pairwise collision operator
in boltzmann.py (the consistency tests exercise exactly this). V relates
to the poorer-partner coefficient C of nonlocal_coefficient() through
V = w^2 (1 - C).

The spatial operator is discretized in conservative flux form on the grid
(trapezoid-consistent), with zero-flux boundary faces, so the agent count
is conserved to rounding; wealth is conserved while the flux potential
vanishes at w_max and the boundary value is monitored otherwise.

The Gini production rate has the closed form

    dG/dt = (gamma / (N W)) int V(w) P(w)^2 dw >= 0,

an integral of nonnegative terms: inequality never decreases under this
flow. (Two integrations by parts against the Gini gradient, whose second
w-derivative is 2P/(NW), leave the flux potential gamma V P / 2 paired
with P itself; the discrete flux form telescopes the same way, so the
identity holds on the grid to rounding.)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distribution import WealthDistribution, moments
from .errors import StabilityError
from .grid import WealthGrid
from .inequality import gini_via_survival
from .traces import GiniTrace

_CFL_SAFETY = 0.4
_CLIP_ABORT_FRACTION = 1e-3
_BOUNDARY_FLUX_FRACTION = 1e-8


def nonlocal_coefficient(dist: WealthDistribution) -> np.ndarray:
    """C(w) at every node: the poorer-agent fraction weighted by 1 - x^2/w^2.

    Satisfies 0 <= C <= F <= 1 and is nondecreasing; C(0) = 0.
    """
    grid = dist.grid
    n, _ = moments(dist)
    icum = grid.cumulative(dist.density)
    kcum = grid.cumulative(dist.density * grid.nodes ** 2)
    c = np.zeros(grid.n_nodes)
    w = grid.nodes[1:]
    c[1:] = (icum[1:] - kcum[1:] / w ** 2) / n
    return c


def transfer_variance(dist: WealthDistribution) -> np.ndarray:
    """V(w) = E over partners of min(w, partner)^2, at every node.

    Nondecreasing (dV/dw = 2 w A(w) >= 0), V(0) = 0, bounded by w^2, and
    equal to w^2 (1 - C(w)) with C from nonlocal_coefficient. Computed from
    its own cumulative integrals rather than through 1 - C to avoid the
    cancellation when C is close to 1.
    """
    grid = dist.grid
    n, _ = moments(dist)
    icum = grid.cumulative(dist.density)
    kcum = grid.cumulative(dist.density * grid.nodes ** 2)
    return (kcum + grid.nodes ** 2 * (n - icum)) / n


def _flux_potential(dist: WealthDistribution, gamma: float) -> np.ndarray:
    return 0.5 * gamma * transfer_variance(dist) * dist.density


def fp_rhs(dist: WealthDistribution, gamma: float) -> np.ndarray:
    """dP/dt in conservative flux form. Zeroth moment of the result is zero
    to rounding; the first moment equals the (normally negligible) flux
    potential at w_max."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    grid = dist.grid
    q = _flux_potential(dist, gamma)
    g = np.diff(q) / grid.cell_widths  # gradient at interior faces
    out = np.empty(grid.n_nodes)
    out[0] = g[0] / grid.weights[0]
    out[-1] = -g[-1] / grid.weights[-1]
    out[1:-1] = (g[1:] - g[:-1]) / grid.weights[1:-1]
    return out


def boundary_flux_potential(dist: WealthDistribution, gamma: float) -> float:
    """Flux potential at w_max; nonzero values signal truncation pressure."""
    return float(_flux_potential(dist, gamma)[-1])


def stable_dt(dist: WealthDistribution, gamma: float, safety: float = _CFL_SAFETY) -> float:
    """Largest explicit-Euler step that keeps the update a positive scheme.

    Local diffusion bound dt <= safety * weight_i / (D_i (1/dw_left + 1/dw_right))
    with D = gamma V / 2; on a uniform grid this reduces to
    safety * dw^2 / (gamma max V).
    """
    grid = dist.grid
    d = 0.5 * gamma * transfer_variance(dist)
    widths = grid.cell_widths
    inv = np.zeros(grid.n_nodes)
    inv[:-1] += 1.0 / widths
    inv[1:] += 1.0 / widths
    with np.errstate(divide="ignore"):
        bounds = grid.weights / (d * inv)
    bounds = bounds[d > 0.0]
    if bounds.size == 0:
        return np.inf
    return float(safety * bounds.min())


def step_fp(dist: WealthDistribution, gamma: float, dt: float) -> WealthDistribution:
    """One explicit Euler step. Raises StabilityError if dt exceeds the
    positivity bound or if clipping removes more than 1e-3 * N of mass.
    dt = 0 is the identity."""
    if dt < 0.0:
        raise ValueError("dt must be nonnegative")
    if dt == 0.0:
        return dist
    limit = stable_dt(dist, gamma)
    if dt > limit * (1.0 + 1e-12):
        raise StabilityError(f"dt={dt:.3e} exceeds diffusion stability bound {limit:.3e}")
    p_new = dist.density + dt * fp_rhs(dist, gamma)
    clipped = np.minimum(p_new, 0.0)
    if np.any(clipped < 0.0):
        n, _ = moments(dist)
        lost = -dist.grid.integrate(clipped)
        if lost > _CLIP_ABORT_FRACTION * n:
            raise StabilityError(f"clipped mass {lost:.3e} exceeds 1e-3 of N in one step")
        p_new = np.maximum(p_new, 0.0)
    return WealthDistribution(dist.grid, p_new)


def fp_gini_rate(dist: WealthDistribution, gamma: float) -> float:
    """Closed-form Gini production (gamma / N W) int V P^2 dw; never negative."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    n, w = moments(dist)
    integrand = transfer_variance(dist) * dist.density ** 2
    return (gamma / (n * w)) * dist.grid.integrate(integrand)


@dataclass(frozen=True)
class FpConfig:
    gamma: float
    n_steps: int
    dt: float | None = None  # None: adapt to the stability bound each step
    record_every: int = 1
    checkpoint_every: int | None = None

    def __post_init__(self) -> None:
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        if self.n_steps < 0:
            raise ValueError("n_steps must be nonnegative")
        if self.dt is not None and self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")
        if self.checkpoint_every is not None and self.checkpoint_every < 1:
            raise ValueError("checkpoint_every must be at least 1")


@dataclass(frozen=True)
class FpResult:
    trace: GiniTrace
    final: WealthDistribution
    second_moment: np.ndarray       # diagnostic: int P w^2 dw at each record
    boundary_flux: np.ndarray       # flux potential at w_max at each record
    truncation_flagged: bool        # boundary flux exceeded 1e-8 * gamma * N
    checkpoints: tuple[tuple[int, WealthDistribution], ...] = ()


def solve_fp(initial: WealthDistribution, config: FpConfig) -> FpResult:
    """March the density config.n_steps steps, recording G, moments, and the
    closed-form production rate every record_every steps."""
    dist = initial
    grid = initial.grid
    t = 0.0
    rows_t, rows_g, rows_n, rows_w, rows_r = [], [], [], [], []
    rows_m2, rows_bf = [], []
    flagged = False

    def record() -> None:
        n, w = moments(dist)
        rows_t.append(t)
        rows_g.append(gini_via_survival(dist))
        rows_n.append(n)
        rows_w.append(w)
        rows_r.append(fp_gini_rate(dist, config.gamma))
        rows_m2.append(grid.integrate(dist.density * grid.nodes ** 2))
        rows_bf.append(boundary_flux_potential(dist, config.gamma))

    record()
    checkpoints: list[tuple[int, WealthDistribution]] = []
    n0, _ = moments(dist)
    for k in range(config.n_steps):
        dt = config.dt if config.dt is not None else stable_dt(dist, config.gamma)
        dist = step_fp(dist, config.gamma, dt)
        t += dt
        if abs(boundary_flux_potential(dist, config.gamma)) > _BOUNDARY_FLUX_FRACTION * config.gamma * n0:
            flagged = True
        if (k + 1) % config.record_every == 0 or k + 1 == config.n_steps:
            record()
        if (config.checkpoint_every is not None and (k + 1) % config.checkpoint_every == 0
                and k + 1 < config.n_steps):
            checkpoints.append((k + 1, dist))
    trace = GiniTrace(
        t=np.array(rows_t),
        gini=np.array(rows_g),
        n_agents=np.array(rows_n),
        total_wealth=np.array(rows_w),
        rate=np.array(rows_r),
    )
    return FpResult(
        trace=trace,
        final=dist,
        second_moment=np.array(rows_m2),
        boundary_flux=np.array(rows_bf),
        truncation_flagged=flagged,
        checkpoints=tuple(checkpoints),
    )
