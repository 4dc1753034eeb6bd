"""Command-line front end: ``qats {simulate,decode,bench,cache}``.

Exit codes: 0 success, 2 invalid input, 3 runtime failure (e.g. an
infeasible model/data combination).  ``QATS_SEED`` overrides ``--seed``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .io import (DataFormatError, read_observations, write_json, write_path,
                 write_segmentation, write_simulation)
from .metrics import GridPoint, distance, run_benchmark, summarize, write_records, write_summary
from .model import ModelError, load_model
from .scores import (ScoreError, build_cum_scores, load_cum_scores, read_cum_matrix,
                     save_cum_scores)
from .search import SearchError, SearchParams
from .simulate import SimConfig, simulate_hmm
from .ternary import InfeasibleError, qats_decode
from .viterbi import LogDensityMatrix, complete_log_lik, viterbi_decode

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3

PRESETS = {
    "paper-small": dict(n=[10**4 + 1], m=[2, 3], s=[2, 6, 11], sigma=[0.1, 1.0], reps=50),
    "paper-headline": dict(n=[10**6 + 1], m=[2], s=[11], sigma=[1.0], reps=20),
}


class UsageError(ValueError):
    pass


def _seed(flag: int | None, default: int = 0) -> int:
    env = os.environ.get("QATS_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"QATS_SEED={env!r} is not an integer") from None
    return default if flag is None else flag


def _search_params(args) -> SearchParams:
    return SearchParams(nu=args.nu, d_o=args.d_o, v_o=args.v_o, n_seeds=args.n_seeds,
                        rotated=args.rotated)


def _add_search_flags(p):
    g = p.add_argument_group("search parameters")
    g.add_argument("--nu", type=float, default=0.5)
    g.add_argument("--d-o", dest="d_o", type=int, default=3)
    g.add_argument("--v-o", dest="v_o", type=int, default=20)
    g.add_argument("--n-seeds", dest="n_seeds", type=int, default=3)
    g.add_argument("--rotated", action="store_true", help="search on chord-tilted scores")


# --- simulate --------------------------------------------------------------------

def run_simulate(args) -> int:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: invalid JSON ({exc})") from None
    for key in ("n", "m", "s", "sigma"):
        if getattr(args, key) is not None:
            cfg[key] = getattr(args, key)
    missing = [k for k in ("n", "m", "s", "sigma") if k not in cfg]
    if missing:
        raise UsageError(f"missing simulation parameters: {', '.join(missing)}")
    cfg["seed"] = _seed(args.seed, cfg.get("seed", 0))
    if args.rep is not None:
        cfg["replication_id"] = args.rep
    config = SimConfig(**cfg)
    sim = simulate_hmm(config)
    write_simulation(args.out, sim.x_true, sim.y)
    if args.out != "-":
        print(f"wrote {config.n} rows ({sim.true_segments} segments) to {args.out}", file=sys.stderr)
    return EXIT_OK


# --- decode ----------------------------------------------------------------------

def run_decode(args) -> int:
    model = load_model(args.model)
    data = read_observations(args.data) if args.data else None
    if args.cache:
        scores = load_cum_scores(args.cache, model)
        if data is not None and data.y.size != scores.n:
            raise UsageError(f"cache has n={scores.n} but data has {data.y.size} rows")
    elif data is not None:
        scores = build_cum_scores(model, data.y)
    else:
        raise UsageError("decode needs --data or --cache")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    x_true = data.x_true if data is not None else None
    paths = {}

    if args.algo in ("qats", "both"):
        res = qats_decode(model, scores, _search_params(args))
        write_path(out / "qats_path.csv", res.path)
        write_segmentation(out / "qats_segments.csv", res.segmentation)
        write_json(out / "qats_diagnostics.json", res.diagnostics())
        paths["qats"] = res.path
    if args.algo in ("viterbi", "both"):
        if data is not None:
            g = LogDensityMatrix(model.log_densities(data.y))
        else:
            g = LogDensityMatrix(np.diff(scores.G, axis=1, prepend=0.0))
        g.columns
        t0 = time.perf_counter()
        x_v = viterbi_decode(model, g)
        wall = time.perf_counter() - t0
        write_path(out / "viterbi_path.csv", x_v)
        write_json(out / "viterbi_diagnostics.json",
                   {"log_lik": complete_log_lik(model, g, x_v), "wall_ms": 1e3 * wall})
        paths["viterbi"] = x_v

    if x_true is not None:
        write_json(out / "distances.json", {
            name: {"d0": distance(p, x_true, 0), "d1": distance(p, x_true, 1), "d2": distance(p, x_true, 2)}
            for name, p in paths.items()
        })
    for name, p in paths.items():
        print(f"{name}: {1 + int(np.count_nonzero(p[1:] != p[:-1]))} segments -> {out}")
    return EXIT_OK


# --- bench -----------------------------------------------------------------------

def run_bench(args) -> int:
    grid = dict(PRESETS[args.preset]) if args.preset else {}
    for key in ("n", "m", "s", "sigma"):
        if getattr(args, key):
            grid[key] = getattr(args, key)
    missing = [k for k in ("n", "m", "s", "sigma") if k not in grid]
    if missing:
        raise UsageError(f"missing grid values: {', '.join(missing)} (or use --preset)")
    reps = args.reps if args.reps is not None else grid.get("reps", 10)
    if reps < 1:
        raise UsageError(f"--reps must be >= 1, got {reps}")
    points = [GridPoint(n, m, s, sigma) for n in grid["n"] for m in grid["m"]
              for s in grid["s"] for sigma in grid["sigma"]]
    for p in points:
        SimConfig(p.n, p.m, p.s, p.sigma)
    params = _search_params(args)
    records = run_benchmark(points, reps, _seed(args.seed), params, jobs=args.jobs,
                            warmup=not args.no_warmup)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_records(records, out / "bench.csv")
    rows = summarize(records)
    write_summary(rows, out / "summary.csv")
    for row in rows:
        if row["metric"] in ("ratio", "d0_diff"):
            print(f"n={row['n']} m={row['m']} s={row['s']} sigma={row['sigma']} "
                  f"{row['metric']}: median {row['q0.5']:.4g} (q10 {row['q0.1']:.4g}, q90 {row['q0.9']:.4g})")
    print(f"{len(records)} records -> {out}")
    return EXIT_OK


# --- cache -----------------------------------------------------------------------

def run_cache(args) -> int:
    if args.info:
        G = read_cum_matrix(args.info)
        print(f"m={G.shape[0]} n={G.shape[1]}")
        return EXIT_OK
    if not (args.model and args.data and args.out):
        raise UsageError("cache needs --model, --data and --out (or --info FILE)")
    model = load_model(args.model)
    scores = build_cum_scores(model, read_observations(args.data).y)
    save_cum_scores(scores, args.out)
    print(f"wrote G (m={scores.m}, n={scores.n}) to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qats", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate (k, x_true, y) from the uniform-chain Gaussian HMM")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--s", type=int, help="expected number of segments")
    p.add_argument("--sigma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--rep", type=int, help="replication id (independent stream)")
    p.add_argument("--config", help="JSON file with SimConfig fields")
    p.add_argument("--out", default="-", help="output CSV (default: stdout)")
    p.set_defaults(func=run_simulate)

    p = sub.add_parser("decode", help="decode a data CSV with QATS and/or Viterbi")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--data", help="CSV with a y column (and optionally x_true)")
    p.add_argument("--cache", help="binary G cache to use instead of recomputing from --data")
    p.add_argument("--algo", choices=("qats", "viterbi", "both"), default="qats")
    p.add_argument("--out", default=".", help="output directory")
    _add_search_flags(p)
    p.set_defaults(func=run_decode)

    p = sub.add_parser("bench", help="timed QATS-vs-Viterbi Monte-Carlo study")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--m", type=int, nargs="+")
    p.add_argument("--s", type=int, nargs="+")
    p.add_argument("--sigma", type=float, nargs="+")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--no-warmup", action="store_true")
    p.add_argument("--out", default="bench_out", help="output directory")
    _add_search_flags(p)
    p.set_defaults(func=run_bench)

    p = sub.add_parser("cache", help="write or inspect a binary cumulative-score cache")
    p.add_argument("--model")
    p.add_argument("--data")
    p.add_argument("--out")
    p.add_argument("--info", metavar="FILE", help="print the header of an existing cache")
    p.set_defaults(func=run_cache)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (UsageError, ModelError, ScoreError, SearchError, DataFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
