"""Ground-truth HMM data with Gaussian emissions.

Random streams come from numpy's PCG64 seeded through
``SeedSequence(seed, spawn_key=(replication_id,))``: one independent,
reproducible stream per (seed, replication) pair.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelError, exit_probability, gaussian_log_pdf
from .viterbi import LogDensityMatrix

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    n: int
    m: int
    s: int
    sigma: float
    seed: int = 0
    replication_id: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ModelError(f"n must be >= 2, got {self.n}")
        if self.m < 2:
            raise ModelError(f"m must be >= 2, got {self.m}")
        if self.s > self.n:
            raise ModelError("s exceeds n")
        if self.s < 1:
            raise ModelError(f"s must be >= 1, got {self.s}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ModelError(f"sigma must be positive, got {self.sigma}")
        if self.replication_id < 0:
            raise ModelError(f"replication_id must be >= 0, got {self.replication_id}")

    @property
    def p(self) -> float:
        return exit_probability(self.n, self.s)


@dataclass(frozen=True)
class SimOutput:
    x_true: np.ndarray  # 1-based states
    y: np.ndarray
    true_segments: int


def make_rng(seed: int, replication_id: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=(int(replication_id),))
    return np.random.Generator(np.random.PCG64(ss))


def count_segments(path) -> int:
    path = np.asarray(path)
    return 1 + int(np.count_nonzero(path[1:] != path[:-1]))


def simulate_hmm(config: SimConfig) -> SimOutput:
    """Uniform initial state, uniform exit-probability chain, ``y_k ~ N(x_k, sigma^2)``.

    Each step leaves the current state with probability ``p = (s-1)/(n-1)``,
    moving to one of the other ``m - 1`` states uniformly, which is a draw
    from the corresponding row of the transition matrix.
    """
    n, m = config.n, config.m
    rng = make_rng(config.seed, config.replication_id)
    x1 = int(rng.integers(m))
    leave = rng.random(n - 1) < config.p
    shift = rng.integers(1, m, size=n - 1)
    steps = np.where(leave, shift, 0)
    x = np.empty(n, dtype=np.int64)
    x[0] = x1
    x[1:] = (x1 + np.cumsum(steps)) % m
    x += 1
    y = x + config.sigma * rng.standard_normal(n)
    return SimOutput(x, y, count_segments(x))


def sample_chain(pi, trans, n: int, rng: np.random.Generator) -> np.ndarray:
    """Markov chain path (1-based) for an arbitrary initial law and transition matrix."""
    cum_pi = np.cumsum(pi)
    cum_rows = np.cumsum(np.asarray(trans, dtype=float), axis=1)
    u = rng.random(n)
    x = np.empty(n, dtype=np.int64)
    x[0] = min(int(np.searchsorted(cum_pi, u[0], side="right")), len(cum_pi) - 1)
    last = len(cum_pi) - 1
    for k in range(1, n):
        x[k] = min(int(np.searchsorted(cum_rows[x[k - 1]], u[k], side="right")), last)
    return x + 1


def gaussian_log_densities(y, means, sigma: float) -> LogDensityMatrix:
    """``g_ik = -log(2 pi sigma^2)/2 - (y_k - means_i)^2 / (2 sigma^2)``."""
    if not sigma > 0:
        raise ModelError(f"sigma must be positive, got {sigma}")
    return LogDensityMatrix(gaussian_log_pdf(y, means, sigma))
