"""Latency of the flipped agent in the lower-bound construction.

The flipped agent copies the silent state of an A-agent, so only a meeting
with that twin can change it; the expected wait is n(n-1)/2 interactions.
"""

import argparse

import numpy as np

from popmaj.harness import derive_seed, run_trial
from popmaj.model import Params


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", default="33,65")
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()
    for n in (int(x) for x in args.n.split(",")):
        p = Params(n=n)
        flips, total = [], []
        for t in range(args.trials):
            m = run_trial("lb_flip", n, n // 2, derive_seed(args.seed, n, "lb_flip", n // 2, t), p)
            flips.append(m.flip_change)
            total.append(m.parallel_time)
        expect = n * (n - 1) / 2
        print(f"n={n}: first change of flipped agent mean={np.mean(flips):.0f} interactions "
              f"(n(n-1)/2={expect:.0f}, ratio {np.mean(flips) / expect:.3f}); "
              f"p99={np.percentile(flips, 99):.0f} vs n(n-1)/2 ln n={expect * np.log(n):.0f}; "
              f"mean silence {np.mean(total):.0f} parallel time")


if __name__ == "__main__":
    main()
