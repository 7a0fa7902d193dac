"""Shared builders for property-style tests.

Random states are smooth bump mixtures whose tails have decayed well
before w_max, so quadrature truncation does not pollute conservation and
identity checks.
"""
from __future__ import annotations

import numpy as np
import pytest

from yardsale import WealthDistribution, WealthGrid


def _bump_mixture(grid: WealthGrid, rng: np.random.Generator, n_agents: float = 1.0) -> WealthDistribution:
    w = grid.nodes
    p = np.zeros_like(w)
    cap = grid.w_max / 12.0
    for _ in range(int(rng.integers(2, 5))):
        k = float(rng.uniform(1.0, 4.0))
        theta = float(rng.uniform(0.4 * cap, cap))
        p += float(rng.uniform(0.5, 2.0)) * (w / theta) ** k * np.exp(-w / theta)
    return WealthDistribution(grid, p * (n_agents / grid.integrate(p)))


def _random_grid(rng: np.random.Generator) -> WealthGrid:
    n = int(rng.integers(160, 400))
    w_max = float(rng.uniform(12.0, 30.0))
    if rng.random() < 0.5:
        return WealthGrid.linear(w_max, n)
    return WealthGrid.logarithmic(w_max, n, w_first=1e-3 * w_max)


def _interior_mixture(seed: int) -> WealthDistribution:
    """Mixture tapered to exact zero well before w_max. Identities derived
    by summation by parts hold to rounding only for such states: their
    boundary terms are proportional to the boundary density."""
    rng = np.random.default_rng(seed)
    grid = WealthGrid.linear(30.0, 601)
    w = grid.nodes
    p = np.zeros_like(w)
    for _ in range(int(rng.integers(2, 5))):
        k = float(rng.uniform(1.0, 4.0))
        theta = float(rng.uniform(1.0, 2.5))
        p += float(rng.uniform(0.5, 2.0)) * (w / theta) ** k * np.exp(-w / theta)
    s = np.clip((w - 18.0) / 6.0, 0.0, 1.0)
    p *= (1.0 - s) ** 3 * (1.0 + 3.0 * s + 6.0 * s**2)  # C2 taper, zero past 24
    return WealthDistribution(grid, p / grid.integrate(p))


@pytest.fixture
def make_interior_state():
    return _interior_mixture


@pytest.fixture
def make_state():
    """Factory for reproducible random smooth states; pass a grid or let the
    factory draw one."""

    def make(seed: int, grid: WealthGrid | None = None, n_agents: float = 1.0) -> WealthDistribution:
        rng = np.random.default_rng(seed)
        if grid is None:
            grid = _random_grid(rng)
        return _bump_mixture(grid, rng, n_agents)

    return make
