"""Exhaustive stabilization check and silent-set audit at n = 2 and 3.

Writes one key=value report per input vector into --out.
"""

import argparse
import time
from pathlib import Path

from popmaj.verifier import VerifierCaps, audit_silent_set, check_stabilization

INPUTS = ("AA", "AB", "BB", "AAA", "AAB", "ABB", "BBB")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--caps", default="1,1,1", help="reset,wait,timer caps")
    ap.add_argument("--out", default="results/verify")
    args = ap.parse_args()
    caps = VerifierCaps(*(int(x) for x in args.caps.split(",")))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    all_ok = True
    for inputs in INPUTS:
        t = time.time()
        report = check_stabilization(len(inputs), inputs, caps)
        audit = audit_silent_set(len(inputs), inputs, caps)
        ok = report.all_terminal_silent_correct and not audit
        all_ok &= ok
        (out / f"{inputs}.txt").write_text(report.to_text() + "".join(f"audit {v}\n" for v in audit))
        print(f"{inputs}: configs={report.reachable_count} terminal={report.terminal_scc_count} "
              f"ok={ok} ({time.time() - t:.1f}s)")
    raise SystemExit(0 if all_ok else 1)


if __name__ == "__main__":
    main()
