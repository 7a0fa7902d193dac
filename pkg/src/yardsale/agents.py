"""Monte Carlo simulation of pairwise yard-sale exchanges.

Each transaction picks an unordered pair of distinct agents uniformly at
random, draws an exchange fraction beta, and moves beta * min(w1, w2) from
the first agent to the second (a negative beta moves wealth the other way).
Wealth never goes negative and the total is conserved exactly: wealths are
kept on a power-of-two quantum grid fine enough (2^-50 of the total) that
transfers and sums incur no floating-point rounding at all.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .beta_dist import BetaDistribution
from .distribution import (
    WealthDistribution,
    exponential_density,
    pareto_density,
    point_mass,
)
from .grid import WealthGrid
from .inequality import sample_gini
from .traces import GiniTrace

_QUANTUM_BITS = 50


@dataclass(frozen=True)
class InitialCondition:
    """Shared initial-state menu for agent ensembles and grid densities."""

    kind: str
    w0: float = 1.0
    alpha: float = 1.5
    w_min: float = 1.0
    mean: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("equal", "pareto", "exponential"):
            raise ValueError("kind must be equal, pareto, or exponential")
        if self.kind == "equal" and self.w0 <= 0.0:
            raise ValueError("w0 must be positive")
        if self.kind == "pareto" and (self.alpha <= 0.0 or self.w_min <= 0.0):
            raise ValueError("pareto needs alpha > 0 and w_min > 0")
        if self.kind == "exponential" and self.mean <= 0.0:
            raise ValueError("mean must be positive")

    @classmethod
    def equal(cls, w0: float = 1.0) -> "InitialCondition":
        return cls("equal", w0=w0)

    @classmethod
    def pareto(cls, alpha: float, w_min: float = 1.0) -> "InitialCondition":
        return cls("pareto", alpha=alpha, w_min=w_min)

    @classmethod
    def exponential(cls, mean: float = 1.0) -> "InitialCondition":
        return cls("exponential", mean=mean)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw n wealths. Pareto uses the inverse CDF w_min * u^(-1/alpha)."""
        if self.kind == "equal":
            return np.full(n, self.w0)
        if self.kind == "pareto":
            u = rng.random(n)
            return self.w_min * u ** (-1.0 / self.alpha)
        return rng.exponential(self.mean, n)

    def density(self, grid: WealthGrid, n_agents: float) -> WealthDistribution:
        """The same initial state as a grid density."""
        if self.kind == "equal":
            return point_mass(grid, self.w0, n_agents)
        if self.kind == "pareto":
            return pareto_density(grid, self.alpha, self.w_min, n_agents)
        return exponential_density(grid, self.mean, n_agents)


@dataclass(frozen=True)
class SimConfig:
    n_agents: int
    initial: InitialCondition
    beta: BetaDistribution
    n_transactions: int
    record_every: int = 10_000
    n_replicas: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_agents < 2:
            raise ValueError("need at least 2 agents")
        if self.n_transactions < 0:
            raise ValueError("n_transactions must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")
        if self.n_replicas < 1:
            raise ValueError("need at least 1 replica")


@dataclass
class AgentEnsemble:
    """Mutable ensemble state: one wealth per agent plus its RNG stream."""

    wealths: np.ndarray
    quantum: float
    rng: np.random.Generator
    seed: int
    transactions_done: int = 0

    @classmethod
    def initialize(
        cls, initial: InitialCondition, n_agents: int, seed: int = 0, replica: int | None = None
    ) -> "AgentEnsemble":
        """Build an ensemble; replica r uses the spawned child stream r of seed.

        Initial wealths are rounded onto the conservation quantum, so the
        recorded total is exact from the first transaction on.
        """
        if n_agents < 2:
            raise ValueError("need at least 2 agents")
        key = np.random.SeedSequence(entropy=seed) if replica is None else np.random.SeedSequence(
            entropy=seed, spawn_key=(replica,)
        )
        rng = np.random.default_rng(key)
        w = np.asarray(initial.sample(rng, n_agents), dtype=float)
        q = _pick_quantum(float(w.sum()))
        w = np.rint(w / q) * q
        if np.any(w < 0.0) or w.sum() <= 0.0:
            raise ValueError("initial wealths must be nonnegative with positive total")
        return cls(wealths=w, quantum=q, rng=rng, seed=seed)

    @property
    def n_agents(self) -> int:
        return self.wealths.size

    @property
    def total_wealth(self) -> float:
        return float(self.wealths.sum())


def _pick_quantum(total: float) -> float:
    if total <= 0.0 or not math.isfinite(total):
        raise ValueError("total wealth must be positive and finite")
    return 2.0 ** (math.ceil(math.log2(total)) - _QUANTUM_BITS)


def transact(ensemble: AgentEnsemble, i: int, j: int, beta: float) -> None:
    """One exchange between agents i and j with fraction beta in (-1, 1)."""
    n = ensemble.n_agents
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError("agent index out of range")
    if i == j:
        raise ValueError("an agent cannot transact with itself")
    if not -1.0 < beta < 1.0:
        raise ValueError("beta must lie strictly inside (-1, 1)")
    _kernels.apply_transactions(
        ensemble.wealths,
        np.array([i], dtype=np.int64),
        np.array([j], dtype=np.int64),
        np.array([beta], dtype=float),
        ensemble.quantum,
    )
    ensemble.transactions_done += 1


def step(ensemble: AgentEnsemble, beta: BetaDistribution) -> tuple[int, int, float]:
    """One random transaction; returns the pair and the drawn beta."""
    i, j = _draw_pair(ensemble.rng, ensemble.n_agents, 1)
    b = float(beta.sample(ensemble.rng))
    transact(ensemble, int(i[0]), int(j[0]), b)
    return int(i[0]), int(j[0]), b


def _draw_pair(rng: np.random.Generator, n: int, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform ordered pairs of distinct agents (uniform over unordered pairs
    with a fair choice of which side beta favors)."""
    i = rng.integers(0, n, size=size)
    j = (i + rng.integers(1, n, size=size)) % n
    return i, j


@dataclass(frozen=True)
class SimResult:
    config: SimConfig
    traces: list[GiniTrace]
    finals: list[np.ndarray]
    gini_matrix: np.ndarray  # replicas x records

    @property
    def t(self) -> np.ndarray:
        return self.traces[0].t

    @property
    def gini_mean(self) -> np.ndarray:
        return self.gini_matrix.mean(axis=0)

    @property
    def gini_stderr(self) -> np.ndarray:
        r = self.gini_matrix.shape[0]
        if r == 1:
            return np.zeros(self.gini_matrix.shape[1])
        return self.gini_matrix.std(axis=0, ddof=1) / math.sqrt(r)


def run_replica(config: SimConfig, replica: int = 0) -> tuple[GiniTrace, AgentEnsemble]:
    """Simulate one replica, recording the sample Gini every record_every
    transactions. Time is reported in sweeps (n_agents / 2 transactions)."""
    ens = AgentEnsemble.initialize(config.initial, config.n_agents, config.seed, replica=replica)
    per_sweep = config.n_agents / 2.0
    times = [0.0]
    ginis = [sample_gini(ens.wealths)]
    totals = [ens.total_wealth]
    done = 0
    while done < config.n_transactions:
        batch = min(config.record_every, config.n_transactions - done)
        ii, jj = _draw_pair(ens.rng, ens.n_agents, batch)
        bb = np.asarray(config.beta.sample(ens.rng, batch), dtype=float)
        _kernels.apply_transactions(ens.wealths, ii, jj, bb, ens.quantum)
        done += batch
        ens.transactions_done = done
        times.append(done / per_sweep)
        ginis.append(sample_gini(ens.wealths))
        totals.append(ens.total_wealth)
    t = np.array(times)
    g = np.array(ginis)
    rate = np.full(t.size, np.nan)
    if t.size > 1:
        rate[:-1] = np.diff(g) / np.diff(t)
    trace = GiniTrace(
        t=t,
        gini=g,
        n_agents=np.full(t.size, float(config.n_agents)),
        total_wealth=np.array(totals),
        rate=rate,
    )
    return trace, ens


def run(config: SimConfig) -> SimResult:
    """Simulate all replicas (replica r uses child stream r of the seed)."""
    traces: list[GiniTrace] = []
    finals: list[np.ndarray] = []
    for r in range(config.n_replicas):
        trace, ens = run_replica(config, replica=r)
        traces.append(trace)
        finals.append(ens.wealths.copy())
    gm = np.vstack([tr.gini for tr in traces])
    return SimResult(config=config, traces=traces, finals=finals, gini_matrix=gm)
