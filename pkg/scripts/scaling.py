"""Mean parallel silence time from the all-Unsettled start across population sizes."""

import argparse
import csv
import sys

import numpy as np

from popmaj.harness import derive_seed, linear_fit, run_trial
from popmaj.model import Params


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", default="16,32,64,128")
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--w-extra", type=int, default=None,
                    help="override w_max as r_max + W_EXTRA * n (default: the package default)")
    ap.add_argument("--csv", help="write per-trial rows here")
    args = ap.parse_args()
    ns = [int(x) for x in args.n.split(",")]
    rows, means = [], {}
    for n in ns:
        base = Params(n=n)
        w = None if args.w_extra is None else base.r_max + args.w_extra * n
        p = Params(n=n, w_max=w)
        times, resets = [], []
        for t in range(args.trials):
            seed = derive_seed(args.seed, n, "all_unsettled", n // 2, t)
            m = run_trial("all_unsettled", n, n // 2, seed, p, trial=t)
            rows.append((n, t, seed, m.parallel_time, m.resets, m.correct))
            times.append(np.inf if m.overflow else m.parallel_time)
            resets.append(m.resets)
        means[n] = float(np.mean(times))
        print(f"n={n:4d} mean={means[n]:9.1f} mean/n={means[n] / n:6.1f} p99={np.percentile(times, 99):9.1f} "
              f"resets={np.mean(resets):.2f}", flush=True)
    for a, b in zip(ns, ns[1:]):
        print(f"ratio mean({b})/mean({a}) = {means[b] / means[a]:.3f}")
    if len(ns) > 1:
        slope, icpt = linear_fit(ns, [means[n] for n in ns])
        print(f"linear fit: {slope:.2f} n + {icpt:.1f}")
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["n", "trial", "seed", "parallel_time", "resets", "correct"])
            w.writerows(rows)


if __name__ == "__main__":
    sys.exit(main())
