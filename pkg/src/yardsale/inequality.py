"""Lorenz curves, Gini coefficients, and the Gini response to density changes.

The Gini coefficient G of a wealth distribution is computed in two
algebraically equivalent forms,

    G = 1 - (2/N) * int P(w) L(w) dw   (Lorenz form)
    G = 1 - (2/W) * int P(w) A(w) w dw (survival form),

where L is the cumulative wealth share and A the agent survival function.
Both reduce to trapezoid sums on the grid. G = 0 for equal wealth and
G -> 1 as wealth condenses into a vanishing fraction of agents.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distribution import WealthDistribution, moments

# Cells with an agent-fraction increment below this are treated as Lorenz
# plateaus; slopes are not formed across them.
_PLATEAU_EPS = 1e-13


@dataclass(frozen=True)
class LorenzCurve:
    """Piecewise-linear Lorenz curve: wealth share L against agent share F."""

    f: np.ndarray
    l: np.ndarray

    def __post_init__(self) -> None:
        f = np.asarray(self.f, dtype=float).copy()
        l = np.asarray(self.l, dtype=float).copy()
        if f.shape != l.shape or f.ndim != 1 or f.size < 2:
            raise ValueError("Lorenz curve needs matching 1-d F and L arrays")
        if abs(f[0]) > 1e-12 or abs(l[0]) > 1e-12:
            raise ValueError("Lorenz curve must start at (0, 0)")
        if abs(f[-1] - 1.0) > 1e-9 or abs(l[-1] - 1.0) > 1e-9:
            raise ValueError("Lorenz curve must end at (1, 1)")
        if np.any(np.diff(f) < -1e-15) or np.any(np.diff(l) < -1e-15):
            raise ValueError("Lorenz curve must be nondecreasing in both coordinates")
        if np.any(l > f + 1e-9):
            raise ValueError("wealth share may not exceed agent share")
        slopes, _ = _segment_slopes(f, l)
        if slopes.size and np.any(np.diff(slopes) < -1e-9 * (1.0 + np.abs(slopes[1:]))):
            raise ValueError("Lorenz curve must be concave up")
        f.flags.writeable = False
        l.flags.writeable = False
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "l", l)


def _segment_slopes(f: np.ndarray, l: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Slopes dL/dF over cells where F strictly increases; also the cell index."""
    df = np.diff(f)
    dl = np.diff(l)
    keep = df > _PLATEAU_EPS
    return dl[keep] / df[keep], np.nonzero(keep)[0]


def lorenz_curve(dist: WealthDistribution) -> LorenzCurve:
    """Lorenz curve sampled at every grid node."""
    n, w = moments(dist)
    f = dist.grid.cumulative(dist.density) / n
    l = dist.grid.cumulative(dist.density * dist.grid.nodes) / w
    return LorenzCurve(f, l)


def gini_via_lorenz(dist: WealthDistribution) -> float:
    n, w = moments(dist)
    l = dist.grid.cumulative(dist.density * dist.grid.nodes) / w
    return 1.0 - (2.0 / n) * dist.grid.integrate(dist.density * l)


def gini_via_survival(dist: WealthDistribution) -> float:
    n, w = moments(dist)
    a = 1.0 - dist.grid.cumulative(dist.density) / n
    return 1.0 - (2.0 / w) * dist.grid.integrate(dist.density * a * dist.grid.nodes)


def gini(dist: WealthDistribution) -> float:
    """Default Gini evaluation (survival form)."""
    return gini_via_survival(dist)


def sample_gini(wealths: np.ndarray) -> float:
    """Gini of a finite sample: sum_{ij} |w_i - w_j| / (2 n^2 mean).

    Computed in O(n log n) through the sorted-rank identity. Lies in
    [0, 1 - 1/n].
    """
    w = np.asarray(wealths, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("wealths must be a nonempty 1-d array")
    if np.any(w < 0.0) or not np.all(np.isfinite(w)):
        raise ValueError("wealths must be finite and nonnegative")
    total = w.sum()
    if total <= 0.0:
        raise ValueError("total wealth is zero; Gini undefined")
    n = w.size
    ranked = np.sort(w)
    coef = 2.0 * np.arange(1, n + 1) - n - 1
    return float(np.dot(coef, ranked) / (n * total))


def frechet_derivative(dist: WealthDistribution, w) -> np.ndarray | float:
    """Response of G to adding agents at wealth w, holding N and W fixed.

    Equals -(2/W) w A(w) - (2/N) L(w). This is the functional gradient of G
    restricted to perturbations that conserve agent count and total wealth;
    gini_rate adds the normalization response for general perturbations.
    """
    from .distribution import cumulative_wealth, survival

    n, total = moments(dist)
    w_arr = np.asarray(w, dtype=float)
    a = survival(dist, w_arr)
    l = cumulative_wealth(dist, w_arr)
    out = -(2.0 / total) * w_arr * a - (2.0 / n) * l
    if w_arr.ndim == 0:
        return float(out)
    return out


def _frechet_on_nodes(dist: WealthDistribution) -> np.ndarray:
    n, w = moments(dist)
    cum = dist.grid.cumulative(dist.density)
    a = 1.0 - cum / dist.grid.integrate(dist.density)
    l = dist.grid.cumulative(dist.density * dist.grid.nodes) / w
    return -(2.0 / w) * dist.grid.nodes * a - (2.0 / n) * l


def gini_rate(dist: WealthDistribution, dpdt: np.ndarray) -> float:
    """dG/dt for a density changing at rate dpdt (values on the grid nodes).

    Pairs dpdt with the fixed-(N, W) gradient and adds the response of the
    normalizations, (1 - G) (dN/dt / N + dW/dt / W), so that fields which
    merely rescale P report a zero rate. For conservative fields the
    correction vanishes.
    """
    dpdt = np.asarray(dpdt, dtype=float)
    if dpdt.shape != dist.grid.nodes.shape:
        raise ValueError("dpdt must have one value per grid node")
    n, w = moments(dist)
    # The mean of the two Gini forms makes the correction cancel the gradient
    # term exactly (not just to quadrature error) for pure rescalings of P.
    g = 0.5 * (gini_via_lorenz(dist) + gini_via_survival(dist))
    base = dist.grid.integrate(_frechet_on_nodes(dist) * dpdt)
    ndot = dist.grid.integrate(dpdt)
    wdot = dist.grid.integrate(dpdt * dist.grid.nodes)
    return base + (1.0 - g) * (ndot / n + wdot / w)
