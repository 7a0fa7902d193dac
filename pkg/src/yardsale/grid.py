"""Wealth grids on [0, w_max] with trapezoid quadrature.

A grid is a strictly increasing sequence of nodes starting at exactly 0.
All integrals in this package are trapezoid sums on these nodes, so a
density array is always interpreted as piecewise linear between nodes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MIN_NODES = 16


@dataclass(frozen=True)
class WealthGrid:
    """Strictly increasing partition of [0, w_max], first node at 0."""

    nodes: np.ndarray
    spacing: str = "custom"

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float).copy()
        if nodes.ndim != 1:
            raise ValueError("grid nodes must be a 1-d array")
        if nodes.size < MIN_NODES:
            raise ValueError(f"grid needs at least {MIN_NODES} nodes, got {nodes.size}")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("grid nodes must be finite")
        if nodes[0] != 0.0:
            raise ValueError("first grid node must be exactly 0")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("grid nodes must be strictly increasing")
        nodes.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        widths = np.diff(nodes)
        weights = np.empty_like(nodes)
        weights[0] = 0.5 * widths[0]
        weights[-1] = 0.5 * widths[-1]
        weights[1:-1] = 0.5 * (widths[:-1] + widths[1:])
        widths.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "_widths", widths)
        object.__setattr__(self, "_weights", weights)

    # cached arrays filled in __post_init__
    _widths: np.ndarray = field(init=False, repr=False, compare=False)
    _weights: np.ndarray = field(init=False, repr=False, compare=False)

    @classmethod
    def linear(cls, w_max: float, n_nodes: int) -> "WealthGrid":
        if w_max <= 0.0:
            raise ValueError("w_max must be positive")
        return cls(np.linspace(0.0, float(w_max), n_nodes), spacing="linear")

    @classmethod
    def logarithmic(cls, w_max: float, n_nodes: int, w_first: float | None = None) -> "WealthGrid":
        """Node at 0, then geometric spacing from w_first up to w_max.

        The cell [0, w_first] is the single linear zero-cell; w_first defaults
        to w_max * 1e-4.
        """
        if w_max <= 0.0:
            raise ValueError("w_max must be positive")
        if w_first is None:
            w_first = 1e-4 * w_max
        if not 0.0 < w_first < w_max:
            raise ValueError("w_first must lie strictly between 0 and w_max")
        pos = np.geomspace(float(w_first), float(w_max), n_nodes - 1)
        return cls(np.concatenate(([0.0], pos)), spacing="log")

    @classmethod
    def from_nodes(cls, nodes) -> "WealthGrid":
        return cls(np.asarray(nodes, dtype=float), spacing="custom")

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def w_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def cell_widths(self) -> np.ndarray:
        return self._widths

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights, one per node."""
        return self._weights

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self._weights, values))

    def cumulative(self, values: np.ndarray) -> np.ndarray:
        """Trapezoid integral from 0 to each node; first entry is 0."""
        cells = 0.5 * (values[1:] + values[:-1]) * self._widths
        out = np.empty(self.nodes.size)
        out[0] = 0.0
        np.cumsum(cells, out=out[1:])
        return out

    def cumulative_at(self, values: np.ndarray, w) -> np.ndarray | float:
        """Trapezoid integral of a piecewise-linear integrand from 0 to w.

        w may be a scalar or array and must lie inside [0, w_max]; the final
        partial cell is integrated exactly for the linear interpolant.
        """
        w_arr = np.asarray(w, dtype=float)
        if np.any(w_arr < 0.0) or np.any(w_arr > self.w_max):
            raise ValueError("evaluation points must lie in [0, w_max]")
        base = self.cumulative(values)
        j = np.clip(np.searchsorted(self.nodes, w_arr, side="right") - 1, 0, self.nodes.size - 2)
        x0 = self.nodes[j]
        theta = w_arr - x0
        f0 = values[j]
        fw = f0 + (values[j + 1] - f0) * theta / self._widths[j]
        out = base[j] + 0.5 * (f0 + fw) * theta
        if w_arr.ndim == 0:
            return float(out)
        return out

    def tail_at(self, values: np.ndarray, w) -> np.ndarray | float:
        """Trapezoid integral of a piecewise-linear integrand from w to w_max."""
        w_arr = np.asarray(w, dtype=float)
        if np.any(w_arr < 0.0) or np.any(w_arr > self.w_max):
            raise ValueError("evaluation points must lie in [0, w_max]")
        cells = 0.5 * (values[1:] + values[:-1]) * self._widths
        rev = np.empty(self.nodes.size)
        rev[-1] = 0.0
        np.cumsum(cells[::-1], out=rev[:-1][::-1])
        j = np.clip(np.searchsorted(self.nodes, w_arr, side="right") - 1, 0, self.nodes.size - 2)
        x1 = self.nodes[j + 1]
        theta = x1 - w_arr
        f1 = values[j + 1]
        fw = values[j] + (f1 - values[j]) * (w_arr - self.nodes[j]) / self._widths[j]
        out = rev[j + 1] + 0.5 * (fw + f1) * theta
        if w_arr.ndim == 0:
            return float(out)
        return out

    def coarsen(self) -> "WealthGrid":
        """Grid with every second node dropped (endpoints kept).

        Used for grid-halving error estimates.
        """
        idx = np.arange(0, self.nodes.size, 2)
        if idx[-1] != self.nodes.size - 1:
            idx = np.append(idx, self.nodes.size - 1)
        if idx.size < MIN_NODES:
            raise ValueError("grid too small to coarsen")
        return WealthGrid(self.nodes[idx], spacing="custom")

    def coarse_indices(self) -> np.ndarray:
        idx = np.arange(0, self.nodes.size, 2)
        if idx[-1] != self.nodes.size - 1:
            idx = np.append(idx, self.nodes.size - 1)
        return idx
