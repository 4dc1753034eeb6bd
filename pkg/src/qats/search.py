"""Optimistic (bracket-shrinking) searches for local maxima of the split scores.

``optimistic_search`` works on any integer-indexed score function.  The
``osh2``/``sosh3``/``osh3`` wrappers bind it to the two- and three-piece
scores of a :class:`~qats.scores.CumScores` segment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .scores import NEG_INF, CumScores


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class SearchParams:
    """Tuning of the approximate searches.

    nu: step ratio of the optimistic search, in (0, 1).
    d_o: bracket length below which the search sweeps exhaustively, > 1.
    v_o: cap on horizontal/vertical alternations per seed, > 1.
    n_seeds: starting points of the two-dimensional search.
    rotated: search on chord-tilted scores instead of the raw ones.
    """

    nu: float = 0.5
    d_o: int = 3
    v_o: int = 20
    n_seeds: int = 3
    rotated: bool = False

    def __post_init__(self):
        if not 0.0 < self.nu < 1.0:
            raise SearchError(f"nu must lie in (0, 1), got {self.nu}")
        if self.d_o <= 1:
            raise SearchError(f"d_o must be > 1, got {self.d_o}")
        if self.v_o <= 1:
            raise SearchError(f"v_o must be > 1, got {self.v_o}")
        if self.n_seeds < 1:
            raise SearchError(f"n_seeds must be >= 1, got {self.n_seeds}")


DEFAULT_PARAMS = SearchParams()


@dataclass(frozen=True)
class LocalMax1D:
    k: int
    h: float
    probes: int


@dataclass(frozen=True)
class LocalMax2D:
    k1: int
    k2: int
    h: float
    probes: int
    alternations: int = 0


def optimistic_search(L: int, R: int, M: int | None, H: Callable[[int], float],
                      params: SearchParams = DEFAULT_PARAMS) -> LocalMax1D:
    """Local maximum of ``H`` on ``L..R``.

    ``M`` is the first probe point; ``0`` or ``None`` selects
    ``floor((L + nu R) / (1 + nu))``.  A probe ``W`` replaces ``M`` only when
    ``H(W) > H(M)`` strictly.  Once ``R - L < max(d_o, 3)`` the remaining bracket is
    swept and the first index attaining the maximum is returned.  Each index
    is evaluated at most once; ``probes`` counts the distinct evaluations.
    """
    if L > R:
        raise SearchError(f"empty search domain {L}:{R}")
    nu, d_o = params.nu, params.d_o
    seen: dict[int, float] = {}

    def probe(k: int) -> float:
        v = seen.get(k)
        if v is None:
            v = seen[k] = H(k)
        return v

    if not M:
        M = math.floor((L + nu * R) / (1.0 + nu))
    M = min(max(M, L), R)

    # With R - L >= 3 the probe can always sit strictly between M and the far
    # end, so every comparison is informative and the bracket always shrinks.
    while R - L >= max(d_o, 3):
        if R - M > M - L:
            W = min(max(math.ceil(R - nu * (R - M)), M + 1), R - 1)
            if probe(W) > probe(M):
                L, M = M, W
            else:
                R = W
        else:
            W = min(max(math.ceil(L + nu * (M - L)), L + 1), M - 1)
            if probe(W) > probe(M):
                R, M = M, W
            else:
                L = W

    k_best, h_best = L, NEG_INF
    for k in range(L, R + 1):
        v = probe(k)
        if v > h_best:
            k_best, h_best = k, v
    return LocalMax1D(k_best, h_best, len(seen))


def tilted(H: Callable[[int], float], lo: int, hi: int) -> Callable[[int], float]:
    """``H`` minus the chord through ``(lo, H(lo))`` and ``(hi, H(hi))``.

    The result agrees with ``H`` at ``lo`` and takes the value ``H(lo)`` at
    ``hi``.  Returns ``H`` unchanged on a one-point domain or a non-finite chord.
    """
    if hi <= lo:
        return H
    slope = H(hi) - H(lo)
    if not math.isfinite(slope):
        return H
    span = hi - lo
    return lambda k: H(k) - slope * (k - lo) / span


def osh2(scores: CumScores, l: int, r: int, x0: int | None = None,
         params: SearchParams = DEFAULT_PARAMS) -> LocalMax1D:
    """Local maximum of the two-piece score over splits ``l+1..r``."""
    if r - l < 1:
        raise SearchError(f"segment {l}:{r} too short for a split")
    start = scores.entry_scores(l, x0)
    h2 = scores._h2

    def H(k):
        return h2(start, l, r, k).score

    if not params.rotated:
        return optimistic_search(l + 1, r, 0, H, params)
    res = optimistic_search(l + 1, r, 0, tilted(H, l + 1, r), params)
    return LocalMax1D(res.k, H(res.k), res.probes)


def sosh3(scores: CumScores, l: int, r: int, x0: int | None, params: SearchParams,
          k_o: int) -> LocalMax2D:
    """Alternating horizontal/vertical search for a local maximum of the three-piece score.

    Starts from ``(l+1, k_o)``.  The first (horizontal) pass uses the default
    probe; later passes start from the current coordinate.  Whenever the pair
    lands on the diagonal ``k2 = k1 + 1`` the diagonal ``k -> (k, k+1)`` is
    searched as well.  Stops when a pass brings no strict improvement or after
    ``v_o - 1`` passes.
    """
    if r - l < 2:
        raise SearchError(f"segment {l}:{r} too short for two splits")
    if not l + 2 <= k_o <= r:
        raise SearchError(f"seed k_o={k_o} outside {l + 2}:{r}")
    start = scores.entry_scores(l, x0)
    h3 = scores._h3
    memo: dict[tuple[int, int], float] = {}

    def H3(k1, k2):
        key = (k1, k2)
        v = memo.get(key)
        if v is None:
            v = memo[key] = h3(start, l, r, k1, k2).score
        return v

    def run(lo, hi, M, f):
        if params.rotated:
            f = tilted(f, lo, hi)
        return optimistic_search(lo, hi, M, f, params).k

    k1, k2 = l + 1, k_o
    h_old = h_new = NEG_INF
    horizontal = True
    v = 1
    while (h_old < h_new and v < params.v_o) or v == 1:
        h_old = h_new
        if horizontal:
            fixed = k2
            k1 = run(l + 1, k2 - 1, 0 if v == 1 else k1, lambda k: H3(k, fixed))
        else:
            fixed = k1
            k2 = run(k1 + 1, r, k2, lambda k: H3(fixed, k))
        if k1 + 1 == k2:
            k1 = run(l + 1, r - 1, k1, lambda k: H3(k, k + 1))
            k2 = k1 + 1
        h_new = H3(k1, k2)
        horizontal = not horizontal
        v += 1
    return LocalMax2D(k1, k2, h_new, len(memo), v - 1)


def seed_points(l: int, r: int, n_seeds: int) -> list[int]:
    """Evenly spaced seeds in ``l+2..r``; ``n_seeds`` is clamped to ``r - l - 1``."""
    n_seeds = max(1, min(n_seeds, r - l - 1))
    return [l + 2 + (i * (r - l - 1)) // (n_seeds + 1) for i in range(1, n_seeds + 1)]


def osh3(scores: CumScores, l: int, r: int, x0: int | None = None,
         params: SearchParams = DEFAULT_PARAMS) -> LocalMax2D:
    """Best of ``sosh3`` over the seeds; earlier seeds win ties."""
    if r - l < 2:
        raise SearchError(f"segment {l}:{r} too short for two splits")
    best: LocalMax2D | None = None
    probes = 0
    alternations = 0
    for k_o in seed_points(l, r, params.n_seeds):
        res = sosh3(scores, l, r, x0, params, k_o)
        probes += res.probes
        alternations += res.alternations
        if best is None or res.h > best.h:
            best = res
    return LocalMax2D(best.k1, best.k2, best.h, probes, alternations)
