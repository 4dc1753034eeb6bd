"""Quick adaptive ternary segmentation: the main decoding loop."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .model import HmmModel
from .scores import CumScores
from .search import DEFAULT_PARAMS, SearchParams, osh2, osh3


class InfeasibleError(RuntimeError):
    """No path with at most three pieces has positive probability on some segment."""


@dataclass(frozen=True)
class Segmentation:
    """Contiguous 1-based inclusive segments covering ``1..n`` and one state per segment."""

    segments: tuple[tuple[int, int], ...]
    states: tuple[int, ...]

    def __post_init__(self):
        segs = tuple((int(l), int(r)) for l, r in self.segments)
        states = tuple(int(z) for z in self.states)
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "states", states)
        if not segs:
            raise ValueError("a segmentation needs at least one segment")
        if len(states) != len(segs):
            raise ValueError(f"{len(segs)} segments but {len(states)} states")
        if segs[0][0] != 1:
            raise ValueError("first segment must start at 1")
        for (l, r), nxt in zip(segs, segs[1:] + (None,)):
            if l > r:
                raise ValueError(f"empty segment {l}:{r}")
            if nxt is not None and nxt[0] != r + 1:
                raise ValueError(f"segments {l}:{r} and {nxt[0]}:{nxt[1]} are not contiguous")

    @property
    def s(self) -> int:
        return len(self.segments)

    @property
    def n(self) -> int:
        return self.segments[-1][1]

    @property
    def change_points(self) -> list[int]:
        return [l for l, _ in self.segments[1:]]


def build_path(seg: Segmentation) -> np.ndarray:
    """Expand each segment to its state: ``(z_1 * 1_{d_1}, ..., z_s * 1_{d_s})``."""
    lengths = [r - l + 1 for l, r in seg.segments]
    return np.repeat(np.asarray(seg.states, dtype=np.int64), lengths)


def segments_of(path) -> Segmentation:
    """Maximal constant runs of a path."""
    path = np.asarray(path)
    if path.ndim != 1 or path.size == 0:
        raise ValueError("path must be a non-empty vector")
    starts = np.concatenate(([0], np.flatnonzero(path[1:] != path[:-1]) + 1))
    ends = np.concatenate((starts[1:], [path.size]))
    return Segmentation(tuple(zip((starts + 1).tolist(), ends.tolist())), tuple(path[starts].tolist()))


def merge_runs(seg: Segmentation) -> Segmentation:
    """Merge neighbouring segments that carry the same state."""
    segs, states = [list(seg.segments[0])], [seg.states[0]]
    for (l, r), z in zip(seg.segments[1:], seg.states[1:]):
        if z == states[-1]:
            segs[-1][1] = r
        else:
            segs.append([l, r])
            states.append(z)
    return Segmentation(tuple(map(tuple, segs)), tuple(states))


@dataclass(frozen=True)
class DecodeResult:
    path: np.ndarray
    segmentation: Segmentation
    loop_iterations: int
    probes_h2: int
    probes_h3: int
    wall_time: float  # seconds

    def diagnostics(self) -> dict:
        return {
            "s": self.segmentation.s,
            "loop_iterations": self.loop_iterations,
            "probes_h2": self.probes_h2,
            "probes_h3": self.probes_h3,
            "wall_ms": 1e3 * self.wall_time,
        }


def qats_decode(model: HmmModel, scores: CumScores,
                params: SearchParams = DEFAULT_PARAMS) -> DecodeResult:
    """Segment ``1..n`` until every segment prefers its best constant path.

    The current segment ``l..r`` (entered from the confirmed state of the
    previous segment) is compared against the approximate best two- and
    three-piece paths.  A constant winner is confirmed and the loop moves on;
    otherwise the segment is split in place and its first piece is examined
    next.  Ties go to fewer pieces.  The wall time covers the loop and the
    path expansion.
    """
    if scores.model is not model:
        if not (scores.m == model.m and np.array_equal(scores.model.log_pi, model.log_pi)
                and np.array_equal(scores.model.log_trans, model.log_trans)):
            raise ValueError("scores were built for a different model")
    t0 = time.perf_counter()
    segs: list[tuple[int, int]] = [(1, scores.n)]
    z: list[int] = [1]
    u = 0
    iterations = probes_h2 = probes_h3 = 0
    neg_inf = -np.inf
    while u < len(segs):
        iterations += 1
        l, r = segs[u]
        x0 = z[u - 1] if u > 0 else None
        start = scores.entry_scores(l, x0)
        const = scores._h1(start, l, r)
        h1, h2, h3 = const.score, neg_inf, neg_inf
        if r - l >= 1:
            two = osh2(scores, l, r, x0, params)
            probes_h2 += two.probes
            h2 = two.h
            if r - l >= 2:
                three = osh3(scores, l, r, x0, params)
                probes_h3 += three.probes
                h3 = three.h
        if h1 >= h2 and h1 >= h3:
            if h1 == neg_inf:
                raise InfeasibleError(
                    f"segment {l}:{r} (entered from state {x0}) has no feasible path with <= 3 pieces")
            z[u] = const.states[0]
            u += 1
        elif h2 >= h3:
            k = two.k
            assert l < k <= r
            segs[u:u + 1] = [(l, k - 1), (k, r)]
            z[u:u + 1] = scores._h2(start, l, r, k).states
        else:
            k1, k2 = three.k1, three.k2
            assert l < k1 < k2 <= r
            segs[u:u + 1] = [(l, k1 - 1), (k1, k2 - 1), (k2, r)]
            z[u:u + 1] = scores._h3(start, l, r, k1, k2).states
    seg = Segmentation(tuple(segs), tuple(z))
    path = build_path(seg)
    wall = time.perf_counter() - t0
    assert iterations <= 2 * seg.s - 1, (iterations, seg.s)
    return DecodeResult(path, seg, iterations, probes_h2, probes_h3, wall)
