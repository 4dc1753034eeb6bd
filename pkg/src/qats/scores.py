"""Cumulative log-density storage and O(1) local log-likelihood probes.

``G[i-1, k-1]`` holds ``sum_{t<=k} log f_i(y_t)``.  Every local score of a
path with one, two or three constant pieces on ``l..r`` is a handful of
differences of ``G`` plus transition terms, so a probe costs O(1) for a fixed
state tuple and O(m), O(m^2), O(m^3) once maximised over states.

Positions and states are 1-based throughout the public API.  ``x0`` is the
state preceding the segment; it is ignored when ``l == 1`` (the initial law
is used instead) and required otherwise.
"""
from __future__ import annotations

import math
import struct
from itertools import product
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .model import HmmModel

NEG_INF = -math.inf

CACHE_MAGIC = b"QATSG1"
_CACHE_HEADER = struct.Struct("<6sQQ")


class ScoreError(ValueError):
    """Invalid probe arguments or non-finite emission log-densities."""


class ScoredStates(NamedTuple):
    states: tuple[int, ...]
    score: float


def _ramp(qd: float, length: int) -> float:
    # length * q_ii with 0 * -inf treated as 0 (no self-transition taken)
    return qd * length if length else 0.0


class CumScores:
    """Prefix sums of emission log-densities bound to a model.

    Immutable after construction; every method is a pure read.
    """

    def __init__(self, model: HmmModel, G: np.ndarray):
        G = np.array(G, dtype=float)
        if G.ndim != 2 or G.shape[0] != model.m or G.shape[1] < 1:
            raise ScoreError(f"G must have shape ({model.m}, n >= 1), got {G.shape}")
        if not np.all(np.isfinite(G)):
            raise ScoreError("cumulative scores must be finite")
        G.flags.writeable = False
        self.G = G
        self.model = model
        self.m, self.n = G.shape
        # row i: [0, G_i1, ..., G_in] so that G_{i,l-1} is rows[i][l-1] even for l = 1
        self._rows = [[0.0] + row for row in G.tolist()]
        self._log_pi = model.log_pi.tolist()
        self._q = model.log_trans.tolist()
        self._qd = [self._q[i][i] for i in range(self.m)]
        states = range(self.m)
        self._pairs = [(a, b) for a, b in product(states, states) if a != b]
        self._triples = [(a, b, c) for a, b, c in product(states, states, states) if a != b and b != c]

    def __repr__(self):
        return f"CumScores(m={self.m}, n={self.n})"

    # -- helpers ------------------------------------------------------------

    def entry_scores(self, l: int, x0: int | None) -> list[float]:
        """Log-weight of entering the segment at ``l`` in each state (0-based list)."""
        if l == 1:
            return self._log_pi
        if x0 is None:
            raise ScoreError(f"x0 is required for a segment starting at l={l} > 1")
        if not 1 <= x0 <= self.m:
            raise ScoreError(f"x0={x0} outside 1..{self.m}")
        return self._q[x0 - 1]

    def _check_segment(self, l: int, r: int) -> None:
        if not 1 <= l <= r <= self.n:
            raise ScoreError(f"segment {l}:{r} outside 1:{self.n}")

    def _check_states(self, *states: int) -> None:
        for i in states:
            if not 1 <= i <= self.m:
                raise ScoreError(f"state {i} outside 1..{self.m}")

    # -- fixed-state local log-likelihoods -----------------------------------

    def log_lik_1(self, l: int, r: int, i: int, x0: int | None = None) -> float:
        self._check_segment(l, r)
        self._check_states(i)
        start = self.entry_scores(l, x0)
        a = i - 1
        R = self._rows[a]
        return R[r] - R[l - 1] + start[a] + _ramp(self._qd[a], r - l)

    def log_lik_2(self, l: int, k: int, r: int, i1: int, i2: int, x0: int | None = None) -> float:
        self._check_segment(l, r)
        if not l < k <= r:
            raise ScoreError(f"split k={k} outside {l + 1}:{r}")
        self._check_states(i1, i2)
        start = self.entry_scores(l, x0)
        return self._lik2(start, l, k, r, i1 - 1, i2 - 1)

    def log_lik_3(self, l: int, k1: int, k2: int, r: int, i1: int, i2: int, i3: int,
                  x0: int | None = None) -> float:
        self._check_segment(l, r)
        if not l < k1 < k2 <= r:
            raise ScoreError(f"splits ({k1}, {k2}) outside l < k1 < k2 <= r for {l}:{r}")
        self._check_states(i1, i2, i3)
        start = self.entry_scores(l, x0)
        return self._lik3(start, l, k1, k2, r, i1 - 1, i2 - 1, i3 - 1)

    def _lik2(self, start, l, k, r, a, b) -> float:
        Ra, Rb, qd = self._rows[a], self._rows[b], self._qd
        return (Ra[k - 1] - Ra[l - 1] + Rb[r] - Rb[k - 1]
                + start[a] + _ramp(qd[a], k - l - 1) + self._q[a][b] + _ramp(qd[b], r - k))

    def _lik3(self, start, l, k1, k2, r, a, b, c) -> float:
        Ra, Rb, Rc, qd, q = self._rows[a], self._rows[b], self._rows[c], self._qd, self._q
        return (Ra[k1 - 1] - Ra[l - 1] + Rb[k2 - 1] - Rb[k1 - 1] + Rc[r] - Rc[k2 - 1]
                + start[a] + _ramp(qd[a], k1 - l - 1)
                + q[a][b] + _ramp(qd[b], k2 - k1 - 1)
                + q[b][c] + _ramp(qd[c], r - k2))

    # -- maximised over states ------------------------------------------------
    # The underscored variants skip validation and take the entry vector
    # directly; the searches call them in their inner loops.

    def _h1(self, start, l, r) -> ScoredStates:
        rows, qd = self._rows, self._qd
        best, arg = NEG_INF, 0
        for a in range(self.m):
            R = rows[a]
            v = R[r] - R[l - 1] + start[a] + _ramp(qd[a], r - l)
            if v > best:
                best, arg = v, a
        return ScoredStates((arg + 1,), best)

    def _h2(self, start, l, r, k) -> ScoredStates:
        rows, qd, q = self._rows, self._qd, self._q
        d1, d2 = k - l - 1, r - k
        best, arg = NEG_INF, self._pairs[0]
        for a, b in self._pairs:
            Ra, Rb = rows[a], rows[b]
            v = (Ra[k - 1] - Ra[l - 1] + Rb[r] - Rb[k - 1]
                 + start[a] + _ramp(qd[a], d1) + q[a][b] + _ramp(qd[b], d2))
            if v > best:
                best, arg = v, (a, b)
        return ScoredStates((arg[0] + 1, arg[1] + 1), best)

    def _h3(self, start, l, r, k1, k2) -> ScoredStates:
        rows, qd, q = self._rows, self._qd, self._q
        d1, d2, d3 = k1 - l - 1, k2 - k1 - 1, r - k2
        best, arg = NEG_INF, self._triples[0]
        for a, b, c in self._triples:
            Ra, Rb, Rc = rows[a], rows[b], rows[c]
            v = (Ra[k1 - 1] - Ra[l - 1] + Rb[k2 - 1] - Rb[k1 - 1] + Rc[r] - Rc[k2 - 1]
                 + start[a] + _ramp(qd[a], d1) + q[a][b] + _ramp(qd[b], d2)
                 + q[b][c] + _ramp(qd[c], d3))
            if v > best:
                best, arg = v, (a, b, c)
        return ScoredStates((arg[0] + 1, arg[1] + 1, arg[2] + 1), best)

    def h1(self, l: int, r: int, x0: int | None = None) -> ScoredStates:
        """Best constant path on ``l..r``; ties go to the smallest state."""
        self._check_segment(l, r)
        return self._h1(self.entry_scores(l, x0), l, r)

    def h2(self, l: int, r: int, k: int, x0: int | None = None) -> ScoredStates:
        """Best two-piece path jumping at ``k`` (``l < k <= r``), distinct states."""
        self._check_segment(l, r)
        if not l < k <= r:
            raise ScoreError(f"split k={k} outside {l + 1}:{r}")
        return self._h2(self.entry_scores(l, x0), l, r, k)

    def h3(self, l: int, r: int, k1: int, k2: int, x0: int | None = None) -> ScoredStates:
        """Best three-piece path jumping at ``k1 < k2``; adjacent states distinct."""
        self._check_segment(l, r)
        if not l < k1 < k2 <= r:
            raise ScoreError(f"splits ({k1}, {k2}) outside l < k1 < k2 <= r for {l}:{r}")
        return self._h3(self.entry_scores(l, x0), l, r, k1, k2)

    # -- rotated (tilted) scores ------------------------------------------------

    def h2_rotated(self, l: int, r: int, k: int, x0: int | None = None) -> float:
        """``H2(k)`` minus the chord slope so both ends of ``l+1..r`` score alike.

        Falls back to the plain score when ``r - l - 1 == 0`` or the endpoint
        difference is not finite.
        """
        h = self.h2(l, r, k, x0).score
        span = r - l - 1
        if span == 0:
            return h
        start = self.entry_scores(l, x0)
        slope = self._h2(start, l, r, r).score - self._h2(start, l, r, l + 1).score
        if not math.isfinite(slope):
            return h
        return h - slope * (k - l - 1) / span

    def h3_rotated_slice(self, l: int, r: int, fixed: int, k: int, direction: str,
                         x0: int | None = None) -> float:
        """Tilted ``H3`` along one axis.

        ``direction="horizontal"`` varies the first split ``k`` in ``l+1..fixed-1``
        with the second split held at ``fixed``; ``"vertical"`` varies the second
        split in ``fixed+1..r`` with the first held at ``fixed``.
        """
        start = self.entry_scores(l, x0)
        if direction == "horizontal":
            h = self.h3(l, r, k, fixed, x0).score
            span = fixed - l - 2
            if span == 0:
                return h
            slope = self._h3(start, l, r, fixed - 1, fixed).score - self._h3(start, l, r, l + 1, fixed).score
            offset = k - l - 1
        elif direction == "vertical":
            h = self.h3(l, r, fixed, k, x0).score
            span = r - fixed - 1
            if span == 0:
                return h
            slope = self._h3(start, l, r, fixed, r).score - self._h3(start, l, r, fixed, fixed + 1).score
            offset = k - fixed - 1
        else:
            raise ScoreError(f"direction must be 'horizontal' or 'vertical', got {direction!r}")
        if not math.isfinite(slope):
            return h
        return h - slope * offset / span


def build_cum_scores(model: HmmModel, y) -> CumScores:
    """Single left-to-right pass of prefix sums over the emission log-densities."""
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] < 1:
        raise ScoreError("observations must be a non-empty 1-d sequence")
    return cum_scores_from_log_densities(model, model.log_densities(y))


def cum_scores_from_log_densities(model: HmmModel, g: np.ndarray) -> CumScores:
    g = np.asarray(g, dtype=float)
    bad = np.argwhere(~np.isfinite(g))
    if bad.size:
        i, k = bad[0]
        raise ScoreError(f"log f_{i + 1}(y_{k + 1}) = {g[i, k]} is not finite")
    return CumScores(model, np.cumsum(g, axis=1))


# --- binary cache ----------------------------------------------------------------

def save_cum_scores(scores: CumScores, path) -> None:
    """Header ``QATSG1`` + m + n (uint64 LE), then m rows of n float64 LE."""
    with open(path, "wb") as fh:
        fh.write(_CACHE_HEADER.pack(CACHE_MAGIC, scores.m, scores.n))
        fh.write(np.ascontiguousarray(scores.G, dtype="<f8").tobytes())


def read_cum_matrix(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _CACHE_HEADER.size:
        raise ScoreError(f"{path}: truncated header")
    magic, m, n = _CACHE_HEADER.unpack_from(data)
    if magic != CACHE_MAGIC:
        raise ScoreError(f"{path}: bad magic {magic!r}")
    expected = _CACHE_HEADER.size + 8 * m * n
    if len(data) != expected:
        raise ScoreError(f"{path}: expected {expected} bytes for m={m}, n={n}, found {len(data)}")
    return np.frombuffer(data, dtype="<f8", offset=_CACHE_HEADER.size).reshape(m, n).astype(float)


def load_cum_scores(path, model: HmmModel) -> CumScores:
    return CumScores(model, read_cum_matrix(path))
