"""Distinct agent states visited across a full sweep, per population size."""

import argparse

from popmaj.harness import SweepSpec, sweep
from popmaj.model import Params
from popmaj.statespace import state_count


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", default="16,32,64,128")
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()
    ns = tuple(int(x) for x in args.n.split(","))
    counts = {}
    for n in ns:
        res = sweep(SweepSpec(n_values=(n,), trials=args.trials, base_seed=args.seed))
        counts[n] = len(res.census[n])
        print(f"n={n}: distinct={counts[n]} of {state_count(Params(n=n))} ({counts[n] / n:.2f} per agent)", flush=True)
    c = counts[ns[0]] / ns[0]
    for n in ns[1:]:
        print(f"n={n}: {counts[n]} <= {c:.2f}*{n}={c * n:.0f}: {counts[n] <= c * n}")


if __name__ == "__main__":
    main()
