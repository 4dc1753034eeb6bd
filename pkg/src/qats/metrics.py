"""Path distances, nearest-rank quantiles and the timed QATS-vs-Viterbi harness."""
from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import benchmark_model
from .scores import build_cum_scores
from .search import DEFAULT_PARAMS, SearchParams
from .simulate import SimConfig, simulate_hmm
from .ternary import qats_decode
from .viterbi import LogDensityMatrix, ViterbiWorkspace, viterbi_decode

BETAS = (0.1, 0.5, 0.9)
BENCH_HEADER = ("n", "m", "s", "sigma", "seed", "rep", "t_qats_ms", "t_viterbi_ms",
                "d0_q", "d0_v", "d2_q", "d2_v", "s_hat")
SUMMARY_METRICS = ("t_qats_ms", "t_viterbi_ms", "ratio", "d0_q", "d0_v", "d0_diff",
                   "d2_q", "d2_v", "d2_diff", "s_hat")
# replication id of the discarded warm-up run; never used for recorded runs
WARMUP_REPLICATION = 2**31 - 1


def distance(x_hat, x_true, w: float) -> float:
    """Misclassification rate for ``w == 0``, else ``(mean |x_hat - x_true|^w)^(1/w)``."""
    a = np.asarray(x_hat, dtype=float)
    b = np.asarray(x_true, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty paths")
    if w < 0:
        raise ValueError(f"w must be >= 0, got {w}")
    if w == 0:
        return float(np.count_nonzero(a != b)) / a.size
    return float(np.mean(np.abs(a - b) ** w) ** (1.0 / w))


def quantiles(samples: Sequence[float], betas: Sequence[float] = BETAS) -> list[float]:
    """Nearest-rank quantiles: the ``ceil(beta N)``-th smallest sample (the minimum for beta = 0)."""
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("no samples")
    out = []
    for b in betas:
        if not 0.0 <= b <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {b}")
        out.append(float(x[max(math.ceil(b * x.size), 1) - 1]))
    return out


@dataclass(frozen=True)
class BenchRecord:
    config: SimConfig
    t_qats: float  # seconds
    t_viterbi: float
    d0_qats: float
    d0_viterbi: float
    d2_qats: float
    d2_viterbi: float
    s_hat_qats: int
    probes_h3: int = 0

    @property
    def ratio(self) -> float:
        return self.t_viterbi / self.t_qats

    def row(self) -> list:
        c = self.config
        return [c.n, c.m, c.s, c.sigma, c.seed, c.replication_id,
                1e3 * self.t_qats, 1e3 * self.t_viterbi,
                self.d0_qats, self.d0_viterbi, self.d2_qats, self.d2_viterbi, self.s_hat_qats]


def bench_pair(config: SimConfig, params: SearchParams = DEFAULT_PARAMS,
               workspace: ViterbiWorkspace | None = None) -> BenchRecord:
    """Simulate once, decode with both algorithms, time only the decoders.

    ``G``, ``g`` and their list views are built before the clocks start; the
    QATS time includes expanding the segmentation into a path.
    """
    sim = simulate_hmm(config)
    model = benchmark_model(config.m, config.n, config.s, config.sigma)
    scores = build_cum_scores(model, sim.y)
    ldm = LogDensityMatrix(model.log_densities(sim.y))
    ldm.columns
    if workspace is None or workspace.m != config.m or workspace.n < config.n:
        workspace = ViterbiWorkspace(config.m, config.n)

    t0 = time.perf_counter()
    res = qats_decode(model, scores, params)
    t1 = time.perf_counter()
    x_v = viterbi_decode(model, ldm, workspace)
    t2 = time.perf_counter()

    x = sim.x_true
    return BenchRecord(
        config=config, t_qats=t1 - t0, t_viterbi=t2 - t1,
        d0_qats=distance(res.path, x, 0), d0_viterbi=distance(x_v, x, 0),
        d2_qats=distance(res.path, x, 2), d2_viterbi=distance(x_v, x, 2),
        s_hat_qats=res.segmentation.s, probes_h3=res.probes_h3,
    )


@dataclass(frozen=True)
class GridPoint:
    n: int
    m: int
    s: int
    sigma: float


def run_config(point: GridPoint, reps: int, seed: int,
               params: SearchParams = DEFAULT_PARAMS, warmup: bool = True) -> list[BenchRecord]:
    """All replications of one setting in one process, after a discarded warm-up run."""
    ws = ViterbiWorkspace(point.m, point.n)
    cfg = dict(n=point.n, m=point.m, s=point.s, sigma=point.sigma, seed=seed)
    if warmup:
        bench_pair(SimConfig(**cfg, replication_id=WARMUP_REPLICATION), params, ws)
    return [bench_pair(SimConfig(**cfg, replication_id=rep), params, ws) for rep in range(reps)]


def run_benchmark(points: Iterable[GridPoint], reps: int, seed: int,
                  params: SearchParams = DEFAULT_PARAMS, jobs: int | None = None,
                  warmup: bool = True) -> list[BenchRecord]:
    """Run every grid point; settings are farmed out to ``jobs`` worker processes."""
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    points = list(points)
    jobs = jobs or os.cpu_count() or 1
    if jobs == 1 or len(points) == 1:
        chunks = [run_config(p, reps, seed, params, warmup) for p in points]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_config, p, reps, seed, params, warmup) for p in points]
            chunks = [f.result() for f in futures]
    return [rec for chunk in chunks for rec in chunk]


def summarize(records: Sequence[BenchRecord], betas: Sequence[float] = BETAS) -> list[dict]:
    """One row per (setting, metric) with the requested sample quantiles."""
    groups: dict[tuple, list[BenchRecord]] = {}
    for rec in records:
        c = rec.config
        groups.setdefault((c.n, c.m, c.s, c.sigma), []).append(rec)
    rows = []
    for (n, m, s, sigma), recs in groups.items():
        values = {
            "t_qats_ms": [1e3 * r.t_qats for r in recs],
            "t_viterbi_ms": [1e3 * r.t_viterbi for r in recs],
            "ratio": [r.ratio for r in recs],
            "d0_q": [r.d0_qats for r in recs],
            "d0_v": [r.d0_viterbi for r in recs],
            "d0_diff": [r.d0_qats - r.d0_viterbi for r in recs],
            "d2_q": [r.d2_qats for r in recs],
            "d2_v": [r.d2_viterbi for r in recs],
            "d2_diff": [r.d2_qats - r.d2_viterbi for r in recs],
            "s_hat": [r.s_hat_qats for r in recs],
        }
        for metric in SUMMARY_METRICS:
            row = {"n": n, "m": m, "s": s, "sigma": sigma, "reps": len(recs), "metric": metric}
            for b, v in zip(betas, quantiles(values[metric], betas)):
                row[f"q{b:g}"] = v
            rows.append(row)
    return rows


def write_records(records: Sequence[BenchRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_HEADER)
        for rec in records:
            w.writerow(rec.row())


def write_summary(rows: Sequence[dict], path) -> None:
    if not rows:
        raise ValueError("nothing to summarise")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
