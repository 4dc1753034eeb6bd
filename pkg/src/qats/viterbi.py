"""Viterbi MAP decoding, the complete log-likelihood, and an exhaustive oracle."""
from __future__ import annotations

import math
import warnings
from itertools import product

import numpy as np

from .model import HmmModel

BRUTE_FORCE_LIMIT = 10**6


class LogDensityMatrix:
    """Finite (m, n) matrix ``g[i-1, k-1] = log f_i(y_k)``.

    ``columns`` (one Python list per position) is built on first use so the
    conversion can happen outside any timed region.
    """

    def __init__(self, g):
        g = np.array(g, dtype=float)
        if g.ndim != 2 or g.shape[1] < 1:
            raise ValueError(f"g must be an (m, n >= 1) matrix, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError("log-densities must be finite")
        g.flags.writeable = False
        self.g = g
        self.m, self.n = g.shape
        self._columns = None

    @property
    def columns(self) -> list[list[float]]:
        if self._columns is None:
            self._columns = self.g.T.tolist()
        return self._columns


def _as_ldm(g) -> LogDensityMatrix:
    return g if isinstance(g, LogDensityMatrix) else LogDensityMatrix(g)


class ViterbiWorkspace:
    """Back-pointer storage sized for ``n`` positions, reusable across decodes."""

    def __init__(self, m: int, n: int):
        self.m, self.n = m, n
        self.zeta = [0] * (m * max(n - 1, 0))


def viterbi_decode(model: HmmModel, g, workspace: ViterbiWorkspace | None = None) -> np.ndarray:
    """A path maximising the complete likelihood (1-based states).

    Forward recursion over ``rho``, back-pointers ``zeta``, then a backward
    trace.  Ties go to the smallest state both in the recursion and the final
    argmax.  If every path has zero probability the trace still follows the
    argmaxes and a ``RuntimeWarning`` is issued.
    """
    ldm = _as_ldm(g)
    m, n = ldm.m, ldm.n
    if m != model.m:
        raise ValueError(f"g has {m} rows, model has {model.m} states")
    if workspace is None or workspace.m != m or workspace.n < n:
        workspace = ViterbiWorkspace(m, n)
    zeta = workspace.zeta
    cols = ldm.columns
    lp = model.log_pi.tolist()
    # column i of q: log-probabilities of reaching state i
    q_into = model.log_trans.T.tolist()
    states = range(m)
    rest = range(1, m)

    col = cols[0]
    rho = [lp[i] + col[i] for i in states]
    new = [0.0] * m
    for k in range(1, n):
        col = cols[k]
        base = (k - 1) * m
        for i in states:
            qi = q_into[i]
            best = rho[0] + qi[0]
            arg = 0
            for j in rest:
                v = rho[j] + qi[j]
                if v > best:
                    best, arg = v, j
            new[i] = best + col[i]
            zeta[base + i] = arg
        rho, new = new, rho

    last, best = 0, rho[0]
    for j in rest:
        if rho[j] > best:
            last, best = j, rho[j]
    if best == -math.inf:
        warnings.warn("every path has zero probability; returned path is arbitrary", RuntimeWarning)
    path = [0] * n
    path[n - 1] = last
    for k in range(n - 2, -1, -1):
        last = zeta[k * m + last]
        path[k] = last
    return np.asarray(path, dtype=np.int64) + 1


def complete_log_lik(model: HmmModel, g, path) -> float:
    """``log pi_{x_1} + g_{x_1,1} + sum_{k>=2} (q_{x_{k-1} x_k} + g_{x_k,k})``, summed left to right."""
    ldm = _as_ldm(g)
    x = [int(v) - 1 for v in path]
    if len(x) != ldm.n:
        raise ValueError(f"path has length {len(x)}, expected {ldm.n}")
    if min(x) < 0 or max(x) >= model.m:
        raise ValueError(f"path states must lie in 1..{model.m}")
    g_ = ldm.g
    q = model.log_trans
    total = float(model.log_pi[x[0]]) + float(g_[x[0], 0])
    for k in range(1, len(x)):
        total = total + float(q[x[k - 1], x[k]]) + float(g_[x[k], k])
    return total


def brute_force_map(model: HmmModel, g) -> tuple[np.ndarray, float]:
    """Exhaustive maximiser of the complete likelihood; ties go to the lexicographically smallest path."""
    ldm = _as_ldm(g)
    m, n = ldm.m, ldm.n
    if m ** n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"m^n = {m}^{n} exceeds {BRUTE_FORCE_LIMIT} paths")
    best_path, best = None, -math.inf
    for cand in product(range(1, m + 1), repeat=n):
        v = complete_log_lik(model, ldm, cand)
        if best_path is None or v > best:
            best_path, best = cand, v
    return np.asarray(best_path, dtype=np.int64), best
