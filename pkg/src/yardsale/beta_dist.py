"""Distribution of the exchanged fraction beta in a single transaction.

A positive beta moves wealth from the first agent of a pair to the second;
the magnitude transferred is beta * min(w1, w2). Supported shapes are
symmetric about zero so that every transaction is a fair coin flip:

  * "uniform":  constant density on (-beta0, +beta0)
  * "twopoint": equal point masses at -beta0 and +beta0
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("uniform", "twopoint")


@dataclass(frozen=True)
class BetaDistribution:
    kind: str
    beta0: float

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if not 0.0 < self.beta0 < 1.0:
            raise ValueError("beta0 must lie strictly inside (0, 1)")

    @classmethod
    def uniform(cls, beta0: float) -> "BetaDistribution":
        return cls("uniform", float(beta0))

    @classmethod
    def twopoint(cls, beta0: float) -> "BetaDistribution":
        return cls("twopoint", float(beta0))

    def density(self, beta) -> np.ndarray | float:
        """Probability density (uniform) or point mass (twopoint) at beta."""
        b = np.asarray(beta, dtype=float)
        if self.kind == "uniform":
            out = np.where(np.abs(b) <= self.beta0, 0.5 / self.beta0, 0.0)
        else:
            out = np.where(np.abs(b) == self.beta0, 0.5, 0.0)
        if b.ndim == 0:
            return float(out)
        return out

    @property
    def second_moment(self) -> float:
        """gamma = int beta^2 eta(beta) dbeta; beta0^2/3 uniform, beta0^2 twopoint."""
        if self.kind == "uniform":
            return self.beta0 ** 2 / 3.0
        return self.beta0 ** 2

    def quadrature(self, n_points: int = 16) -> tuple[np.ndarray, np.ndarray]:
        """Nodes b_k and weights v_k so that int f(b) eta(b) db ~= sum v_k f(b_k).

        Gauss-Legendre scaled to (-beta0, beta0) for the uniform kind (exact
        for polynomials up to degree 2 n_points - 1); the exact two-point sum
        otherwise. Weights always sum to 1.
        """
        if self.kind == "twopoint":
            return np.array([-self.beta0, self.beta0]), np.array([0.5, 0.5])
        if n_points < 2:
            raise ValueError("need at least 2 quadrature points")
        x, w = np.polynomial.legendre.leggauss(n_points)
        return self.beta0 * x, 0.5 * w

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray | float:
        if self.kind == "uniform":
            return rng.uniform(-self.beta0, self.beta0, size)
        signs = rng.integers(0, 2, size) * 2 - 1
        return self.beta0 * signs
