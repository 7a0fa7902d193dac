"""Wealth distributions on a grid, reference densities, and cumulative laws.

A distribution stores a nonnegative density P(w) normalized so that the
trapezoid integral of P is the number of agents N (not 1) and the integral
of P*w is the total wealth W.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .grid import WealthGrid


@dataclass(frozen=True)
class WealthDistribution:
    grid: WealthGrid
    density: np.ndarray

    def __post_init__(self) -> None:
        density = np.asarray(self.density, dtype=float).copy()
        if density.shape != self.grid.nodes.shape:
            raise ValueError("density must have one value per grid node")
        if not np.all(np.isfinite(density)):
            raise ValueError("density must be finite")
        if np.any(density < 0.0):
            raise ValueError("density must be nonnegative")
        n, w = self.grid.integrate(density), self.grid.integrate(density * self.grid.nodes)
        if n <= 0.0:
            raise ValueError("distribution has no agents (zeroth moment is 0)")
        if w <= 0.0:
            raise ValueError("distribution has no wealth (first moment is 0)")
        density.flags.writeable = False
        object.__setattr__(self, "density", density)


def moments(dist: WealthDistribution) -> tuple[float, float]:
    """(N, W): agent count and total wealth under trapezoid quadrature."""
    p = dist.density
    return dist.grid.integrate(p), dist.grid.integrate(p * dist.grid.nodes)


def point_mass(grid: WealthGrid, w: float, n_agents: float) -> WealthDistribution:
    """All agents in the single cell nearest to w.

    The mass is exact under the grid quadrature: density = n_agents / weight
    at the chosen node, zero elsewhere.
    """
    if n_agents <= 0.0:
        raise ValueError("n_agents must be positive")
    if not 0.0 < w <= grid.w_max:
        raise ValueError("atom location must lie in (0, w_max]")
    i = int(np.argmin(np.abs(grid.nodes - w)))
    if i == 0:
        i = 1  # an atom at w=0 would carry no wealth
    density = np.zeros(grid.n_nodes)
    density[i] = n_agents / grid.weights[i]
    return WealthDistribution(grid, density)


def pareto_tail_fraction(alpha: float, w_min: float, w: float) -> float:
    """Fraction of Pareto agents above w (1 if w <= w_min)."""
    if w <= w_min:
        return 1.0
    return (w_min / w) ** alpha


def pareto_density(grid: WealthGrid, alpha: float, w_min: float, n_agents: float) -> WealthDistribution:
    """Pareto density: 0 for w <= w_min, (alpha*N/w_min)(w_min/w)^(alpha+1) above.

    Warns if the analytic mass beyond w_max exceeds 1e-6 * n_agents; the
    returned distribution is the truncated sample of the formula, never
    renormalized.
    """
    if alpha <= 1.0:
        # alpha <= 1 has no finite mean; still representable on a finite grid,
        # but reject alpha <= 0 outright and warn for heavy tails at alpha <= 1.
        if alpha <= 0.0:
            raise ValueError("alpha must be positive")
    if not 0.0 < w_min < grid.w_max:
        raise ValueError("w_min must lie strictly between 0 and w_max")
    if n_agents <= 0.0:
        raise ValueError("n_agents must be positive")
    w = grid.nodes
    density = np.zeros_like(w)
    above = w > w_min
    density[above] = (alpha * n_agents / w_min) * (w_min / w[above]) ** (alpha + 1.0)
    lost = pareto_tail_fraction(alpha, w_min, grid.w_max)
    if lost > 1e-6:
        warnings.warn(
            f"pareto tail beyond w_max holds fraction {lost:.3e} of agents; "
            "enlarge w_max if this matters",
            stacklevel=2,
        )
    return WealthDistribution(grid, density)


def exponential_density(grid: WealthGrid, mean: float, n_agents: float) -> WealthDistribution:
    """Exponential density (N/mean) * exp(-w/mean)."""
    if mean <= 0.0:
        raise ValueError("mean must be positive")
    if n_agents <= 0.0:
        raise ValueError("n_agents must be positive")
    lost = float(np.exp(-grid.w_max / mean))
    if lost > 1e-6:
        warnings.warn(
            f"exponential tail beyond w_max holds fraction {lost:.3e} of agents",
            stacklevel=2,
        )
    return WealthDistribution(grid, (n_agents / mean) * np.exp(-grid.nodes / mean))


def cumulative_agents(dist: WealthDistribution, w) -> np.ndarray | float:
    """F(w): fraction of agents with wealth below w."""
    n, _ = moments(dist)
    return dist.grid.cumulative_at(dist.density, w) / n


def survival(dist: WealthDistribution, w) -> np.ndarray | float:
    """A(w): fraction of agents with wealth above w, integrated from the tail."""
    n, _ = moments(dist)
    return dist.grid.tail_at(dist.density, w) / n


def cumulative_wealth(dist: WealthDistribution, w) -> np.ndarray | float:
    """L(w): fraction of total wealth held by agents with wealth below w."""
    _, total = moments(dist)
    return dist.grid.cumulative_at(dist.density * dist.grid.nodes, w) / total
