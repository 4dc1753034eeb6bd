"""Timed QATS-vs-Viterbi comparison at n = 10^6 + 1, m = 2, s = 11, sigma = 1.

Usage: python3 scripts/headline_benchmark.py [--reps 20] [--seed 0] [--out bench_headline]
"""
import argparse
from pathlib import Path

from qats.metrics import GridPoint, run_benchmark, summarize, write_records, write_summary


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="bench_headline")
    args = ap.parse_args()

    records = run_benchmark([GridPoint(10**6 + 1, 2, 11, 1.0)], args.reps, args.seed, jobs=1)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_records(records, out / "bench.csv")
    rows = summarize(records)
    write_summary(rows, out / "summary.csv")
    print(f"{'metric':>14} {'q0.1':>10} {'q0.5':>10} {'q0.9':>10}")
    for row in rows:
        print(f"{row['metric']:>14} {row['q0.1']:10.4g} {row['q0.5']:10.4g} {row['q0.9']:10.4g}")


if __name__ == "__main__":
    main()
