"""Time series of inequality and conserved quantities along a run."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GiniTrace:
    """Recorded (t, G, N, W, dG/dt) samples.

    The rate column holds whatever estimate the producer has: solvers store
    the computed production rate, agent simulations store a forward
    difference (nan for the final record).
    """

    t: np.ndarray
    gini: np.ndarray
    n_agents: np.ndarray
    total_wealth: np.ndarray
    rate: np.ndarray

    def __post_init__(self) -> None:
        arrays = {}
        for name in ("t", "gini", "n_agents", "total_wealth", "rate"):
            a = np.asarray(getattr(self, name), dtype=float).copy()
            if a.ndim != 1:
                raise ValueError("trace columns must be 1-d")
            arrays[name] = a
        length = arrays["t"].size
        if length == 0:
            raise ValueError("trace must contain at least one record")
        if any(a.size != length for a in arrays.values()):
            raise ValueError("trace columns must share a length")
        if np.any(np.diff(arrays["t"]) < 0.0):
            raise ValueError("trace times must be nondecreasing")
        for name, a in arrays.items():
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    def __len__(self) -> int:
        return self.t.size
