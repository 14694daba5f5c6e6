"""Full correctness sweep: every generator, the input-count policy, 20 trials each."""

import argparse
import sys
import time
from pathlib import Path

from popmaj.harness import SweepSpec, summarize, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", default="4,5,8,9,16,17,32,33,64")
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--csv", default="results/sweep.csv")
    args = ap.parse_args()
    t = time.time()
    spec = SweepSpec(n_values=tuple(int(x) for x in args.n.split(",")), trials=args.trials, base_seed=args.seed)
    res = sweep(spec, workers=args.workers)
    Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
    Path(args.csv).write_text(res.to_csv())
    s = summarize(res.rows, res.census)
    for g in s.groups:
        print(f"n={g.n:3d} {g.init_kind:22s} trials={g.trials:4d} mean={g.mean:8.1f} max={g.max:8.1f} "
              f"correct={g.correct_fraction:.3f} overflows={g.overflows}")
    print(f"fit: {s.slope:.2f} n + {s.intercept:.1f}; census {s.census}; {time.time() - t:.0f}s")
    bad = [m for m in res.rows if not m.correct or m.overflow]
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
