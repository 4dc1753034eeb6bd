"""Median Viterbi/QATS time ratio as the expected number of segments grows.

QATS cost scales with the number of segments while Viterbi cost does not,
so the ratio should fall as s increases at fixed n.

Usage: python3 scripts/speedup_vs_s.py [--n 100001] [--m 2] [--reps 10] [--s 2 11 101 1001]
"""
import argparse
import statistics

from qats.metrics import GridPoint, run_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10**5 + 1)
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--s", type=int, nargs="+", default=[2, 11, 101, 1001])
    args = ap.parse_args()

    print(f"n={args.n} m={args.m} sigma={args.sigma} reps={args.reps}")
    print(f"{'s':>6} {'T_Q ms':>9} {'T_V ms':>9} {'ratio':>8} {'d0_Q-d0_V':>10}")
    for s in args.s:
        recs = run_config(GridPoint(args.n, args.m, s, args.sigma), args.reps, args.seed)
        print(f"{s:>6} {1e3 * statistics.median(r.t_qats for r in recs):9.1f} "
              f"{1e3 * statistics.median(r.t_viterbi for r in recs):9.1f} "
              f"{statistics.median(r.ratio for r in recs):8.2f} "
              f"{statistics.median(r.d0_qats - r.d0_viterbi for r in recs):10.5f}")


if __name__ == "__main__":
    main()
