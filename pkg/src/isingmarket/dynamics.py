"""Coupled-lattice heat-bath dynamics for K stocks.

Each agent's field combines three influences: ferromagnetic pressure from
its four lattice neighbors, a minority-game penalty proportional to its own
alignment with the absolute magnetization of its stock, and the live
magnetizations of the other stocks weighted by the coupling matrix:

    h = J * sum(neighbor spins) - alpha * s_i * |M_k| + sum_j gamma[j, k] * M_j

The spin is then redrawn from the conditional distribution
p(+1) = 1 / (1 + exp(-2 beta h)), independent of its current value.

Randomness contract (fixed, documented, relied on by tests): the master
seed feeds a SeedSequence whose K spawned children drive one PCG64
generator per stock.  Stock k's stream is consumed in this order: first
N = L*L initialization integer draws, then, for every single-site update
of stock k, a site draw u1 (site = int(u1 * N), clamped to N - 1) followed
by the acceptance draw u2.  A sweep performs N update rounds, each
updating stock 0..K-1 once.  Magnetizations are read live (asynchronous
updates), kept as exact integer sums internally and normalized only when
read.  The compiled kernel consumes the streams identically, so compiled
and pure-Python trajectories agree bit for bit.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernel
from .lattice import NORMALIZATION_MODES, PER_SITE, SpinGrid, neighbor_table
from .observables import SeriesRecord, SummaryStats, summarize_magnetizations


class ConfigError(ValueError):
    """A model or run parameter failed validation."""


def symmetric_gamma(value: float, n_stocks: int) -> np.ndarray:
    """Expand a scalar coupling to the all-pairs symmetric matrix."""
    g = np.full((n_stocks, n_stocks), float(value))
    np.fill_diagonal(g, 0.0)
    return g


@dataclass(eq=False)
class SimConfig:
    """All model and run parameters.

    gamma[j, k] weighs stock j's magnetization in stock k's local field;
    the diagonal must be zero (no self-coupling through the cross term).
    """

    L: int = 120
    K: int = 2
    beta: float = 2.0
    alpha: float = 30.0
    J: float = 1.0
    gamma: np.ndarray = None
    thermalization_sweeps: int = 10_000
    measurement_sweeps: int = 500_000
    seed: int = 0
    normalization: str = PER_SITE

    def __post_init__(self):
        if self.gamma is None:
            self.gamma = np.zeros((self.K, self.K))
        else:
            self.gamma = np.asarray(self.gamma, dtype=np.float64)

    def __eq__(self, other):
        if not isinstance(other, SimConfig):
            return NotImplemented
        scalars = ("L", "K", "beta", "alpha", "J", "thermalization_sweeps",
                   "measurement_sweeps", "seed", "normalization")
        return (all(getattr(self, f) == getattr(other, f) for f in scalars)
                and np.array_equal(self.gamma, other.gamma))

    @property
    def n_sites(self) -> int:
        return self.L * self.L

    @property
    def norm_divisor(self) -> float:
        return float(self.n_sites) if self.normalization == PER_SITE else 1.0

    def validate(self) -> "SimConfig":
        if self.L < 2:
            raise ConfigError(f"L must be >= 2, got {self.L}")
        if self.K < 1:
            raise ConfigError(f"K must be >= 1, got {self.K}")
        if self.beta < 0:
            raise ConfigError(f"beta must be >= 0, got {self.beta}")
        if self.alpha < 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")
        if self.thermalization_sweeps < 0:
            raise ConfigError("thermalization_sweeps must be >= 0")
        if self.measurement_sweeps < 1:
            raise ConfigError("measurement_sweeps must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        if self.normalization not in NORMALIZATION_MODES:
            raise ConfigError(f"normalization must be one of {NORMALIZATION_MODES}, "
                              f"got {self.normalization!r}")
        if self.gamma.shape != (self.K, self.K):
            raise ConfigError(f"gamma must be a {self.K}x{self.K} matrix, "
                              f"got shape {tuple(self.gamma.shape)}")
        if not np.all(np.isfinite(self.gamma)):
            raise ConfigError("gamma entries must be finite")
        if np.any(np.diagonal(self.gamma) != 0.0):
            raise ConfigError("gamma diagonal must be zero")
        return self


class MarketState:
    """K spin grids, one RNG stream per stock, and the sweep clock."""

    def __init__(self, grids, rngs, t: int = 0):
        sides = {g.side for g in grids}
        if len(sides) != 1:
            raise ValueError("all grids must share the same side length")
        self.grids = list(grids)
        self.rngs = list(rngs)
        self.t = t
        self.neighbors = neighbor_table(self.grids[0].side)

    @classmethod
    def initialize(cls, config: SimConfig) -> "MarketState":
        """Fresh i.i.d. +-1 state; one spawned RNG stream per stock."""
        config.validate()
        children = np.random.SeedSequence(config.seed).spawn(config.K)
        rngs = [np.random.default_rng(c) for c in children]
        grids = [SpinGrid.from_random(config.L, rngs[k]) for k in range(config.K)]
        return cls(grids, rngs)

    @property
    def n_stocks(self) -> int:
        return len(self.grids)

    def magnetization(self, stock: int, mode: str = PER_SITE) -> float:
        return self.grids[stock].magnetization(mode)

    def magnetizations(self, mode: str = PER_SITE) -> tuple:
        return tuple(g.magnetization(mode) for g in self.grids)


def local_field(state: MarketState, config: SimConfig, stock: int, site: int) -> float:
    """The field acting on one agent, using live magnetizations."""
    grid = state.grids[stock]
    spins = grid.spins
    up, down, left, right = state.neighbors[site]
    nn = int(spins[up]) + int(spins[down]) + int(spins[left]) + int(spins[right])
    s = int(spins[site])
    mode = config.normalization
    h = config.J * nn - config.alpha * s * abs(grid.magnetization(mode))
    for j in range(config.K):
        h += config.gamma[j, stock] * state.grids[j].magnetization(mode)
    return float(h)


def update_probability(h: float, beta: float) -> float:
    """p(+1) = 1 / (1 + exp(-2 beta h)), overflow-free for any finite h."""
    x = 2.0 * beta * h
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def update_site(state: MarketState, config: SimConfig, stock: int, site: int,
                rng: np.random.Generator) -> None:
    """Heat-bath update of one spin; consumes one uniform from rng."""
    p = update_probability(local_field(state, config, stock, site), config.beta)
    u = rng.random()
    state.grids[stock].set_spin(site, 1 if u < p else -1)


def sweep(state: MarketState, config: SimConfig) -> None:
    """One model time step: N update rounds, each touching every stock once.

    Sites are chosen uniformly at random with replacement from each stock's
    own stream (site draw, then acceptance draw), so with gamma = 0 a
    stock's trajectory depends only on its own stream and initial spins.
    """
    n = config.n_sites
    n_f = float(n)
    for _ in range(n):
        for k in range(state.n_stocks):
            rng = state.rngs[k]
            site = int(rng.random() * n_f)
            if site >= n:
                site = n - 1
            update_site(state, config, k, site, rng)
    state.t += 1


def simulate_series(config: SimConfig, sink: Optional[Callable[[SeriesRecord], None]] = None):
    """Thermalize, then measure; returns ((T, K) magnetizations, final state).

    One row per measurement sweep, in the configured normalization.  Records
    are streamed to `sink` as they become available; the first record has no
    returns because they need two consecutive magnetizations.
    """
    config.validate()
    state = MarketState.initialize(config)

    spins = np.empty((config.K, config.n_sites), dtype=np.int8)
    for k in range(config.K):
        spins[k] = state.grids[k].spins
    sums = np.array([g.sum_spins for g in state.grids], dtype=np.int64)
    gens = tuple(state.rngs)
    gamma_t = np.ascontiguousarray(config.gamma.T)
    two_beta = 2.0 * config.beta

    def advance(n_sweeps: int) -> np.ndarray:
        sums_out = np.empty((n_sweeps, config.K), dtype=np.int64)
        if n_sweeps:
            _kernel.run_sweeps(spins, sums, state.neighbors, gens, n_sweeps,
                               config.J, config.alpha, two_beta, gamma_t,
                               config.norm_divisor, sums_out)
        return sums_out

    advance(config.thermalization_sweeps)
    sums_meas = advance(config.measurement_sweeps)
    m = sums_meas / config.norm_divisor

    # adopt the kernel's final configuration (it worked on copies)
    state.grids = [SpinGrid(spins[k], config.L) for k in range(config.K)]
    state.t = config.thermalization_sweeps + config.measurement_sweeps

    if sink is not None:
        t0 = config.thermalization_sweeps
        for i in range(m.shape[0]):
            rets = tuple((m[i] - m[i - 1]) / 2.0) if i > 0 else None
            sink(SeriesRecord(t=t0 + i + 1, magnetizations=tuple(m[i]), returns=rets))

    return m, state


def run_simulation(config: SimConfig,
                   sink: Optional[Callable[[SeriesRecord], None]] = None,
                   max_lag: int = 100) -> SummaryStats:
    """Run the full protocol and summarize it.

    Initializes i.i.d. spins from the seed, discards the thermalization
    sweeps, then emits one SeriesRecord per measurement sweep to `sink`
    and returns the summary statistics of the measured series.  Output is
    fully determined by (config, seed).
    """
    m, _ = simulate_series(config, sink)
    return summarize_magnetizations(m, max_lag=max_lag)
