"""Command-line entry point: ``popmaj run | sweep | verify | census``.

Every flag may also be given in a ``key=value`` file passed with ``--config``
(keys use underscores, e.g. ``num_a=3``); flags on the command line win.

Exit codes: 0 success, 1 incorrect stabilization, 2 overflow, 3 bad arguments.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

EXIT_OK, EXIT_INCORRECT, EXIT_OVERFLOW, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in str(text).split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def read_config_file(path: str | Path) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="popmaj", description="Self-stabilizing exact majority simulator and checker.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="key=value file with defaults for any flag")

    r = sub.add_parser("run", help="simulate one trial")
    common(r)
    r.add_argument("--n", type=int)
    r.add_argument("--num-a", type=int)
    r.add_argument("--init", help="init kind, or file:PATH for a snapshot")
    r.add_argument("--seed", type=int)
    r.add_argument("--t-rank", type=int)
    r.add_argument("--max-interactions", type=int)
    r.add_argument("--out", choices=["csv", "json"])
    r.add_argument("--save-final", help="write the final configuration snapshot here")

    s = sub.add_parser("sweep", help="many trials over n, kinds and input counts")
    common(s)
    s.add_argument("--n", type=_int_list, help="comma-separated population sizes")
    s.add_argument("--num-a", type=_int_list, help="comma-separated A counts (default: policy per n)")
    s.add_argument("--kinds", help="comma-separated init kinds (default: all)")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int, help="base seed")
    s.add_argument("--t-rank", type=int)
    s.add_argument("--max-interactions", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--out", choices=["csv", "json"])
    s.add_argument("--output", help="write the table here instead of stdout")

    v = sub.add_parser("verify", help="exhaustive check with capped counters")
    common(v)
    v.add_argument("--n", type=int)
    v.add_argument("--inputs", help="input string such as AAB")
    v.add_argument("--cap-reset", type=int)
    v.add_argument("--cap-wait", type=int)
    v.add_argument("--cap-timer", type=int)
    v.add_argument("--report", help="write the key=value report here")
    v.add_argument("--audit", action="store_true", default=None, help="also audit every fixpoint")

    c = sub.add_parser("census", help="distinct states visited per n versus the state-space size")
    common(c)
    c.add_argument("--n", type=_int_list)
    c.add_argument("--trials", type=int)
    c.add_argument("--seed", type=int)
    c.add_argument("--kinds")
    return p


DEFAULTS = {
    "run": dict(num_a=None, init="all_unsettled", seed=0, t_rank=16, max_interactions=None, out="csv", save_final=None),
    "sweep": dict(num_a=None, kinds=None, trials=20, seed=0, t_rank=16, max_interactions=None, workers=1,
                  out="csv", output=None),
    "verify": dict(cap_reset=1, cap_wait=1, cap_timer=1, report=None, audit=False),
    "census": dict(n=(16, 32, 64, 128), trials=2, seed=0, kinds=None),
}
_CONVERT = {
    "n": None, "num_a": None, "seed": int, "t_rank": int, "max_interactions": int, "trials": int,
    "workers": int, "cap_reset": int, "cap_wait": int, "cap_timer": int,
    "audit": lambda v: v.lower() in ("1", "true", "yes"),
}


def _merge(ns: argparse.Namespace) -> argparse.Namespace:
    file_vals = read_config_file(ns.config) if ns.config else {}
    listy = ns.command in ("sweep", "census")
    merged = {k: None for k in vars(ns)}
    merged.update(DEFAULTS[ns.command])
    for k, v in file_vals.items():
        if not hasattr(ns, k) or k in ("command", "config"):
            raise UsageError(f"unknown config key {k!r} for {ns.command}")
        if k in ("n", "num_a"):
            merged[k] = _int_list(v) if listy else int(v)
        elif k in _CONVERT and _CONVERT[k] is not None:
            merged[k] = _CONVERT[k](v)
        else:
            merged[k] = v
    for k, v in vars(ns).items():
        if v is not None:
            merged[k] = v
    return argparse.Namespace(**merged)


def _kinds(text):
    from .harness import SWEEP_KINDS, InitKind

    if not text:
        return SWEEP_KINDS
    return tuple(InitKind(k.strip()) for k in text.split(","))


def cmd_run(a) -> int:
    from .engine import save_config
    from .harness import InitKind, build, rows_to_csv, rows_to_json, run_trial
    from .model import Params

    if a.n is None:
        raise UsageError("--n is required")
    path = None
    kind = a.init
    if kind.startswith("file:"):
        path, kind = kind[5:], InitKind.FROM_FILE
    num_a = a.num_a if a.num_a is not None else a.n // 2
    params = Params(n=a.n, t_rank=a.t_rank)
    m = run_trial(kind, a.n, num_a, a.seed, params, a.max_interactions, path=path)
    sys.stdout.write(rows_to_json([m]) + "\n" if a.out == "json" else rows_to_csv([m]))
    if a.save_final:
        from .engine import UniformScheduler, run

        cfg, _ = build(kind, a.n, num_a, a.seed, params, path)
        budget = a.max_interactions or (m.interactions or 1)
        save_config(run(cfg, params, UniformScheduler(a.n, a.seed), budget, backend="fast").config, a.save_final)
    if m.overflow:
        return EXIT_OVERFLOW
    return EXIT_OK if m.correct else EXIT_INCORRECT


def cmd_sweep(a) -> int:
    from .harness import SweepSpec, rows_to_json, summarize, sweep

    if not a.n:
        raise UsageError("--n is required")
    spec = SweepSpec(
        n_values=tuple(a.n), kinds=_kinds(a.kinds), trials=a.trials, base_seed=a.seed,
        num_a=tuple(a.num_a) if a.num_a else None, t_rank=a.t_rank, max_interactions=a.max_interactions,
    )
    res = sweep(spec, workers=a.workers)
    text = rows_to_json(res.rows) + "\n" if a.out == "json" else res.to_csv()
    if a.output:
        Path(a.output).write_text(text)
    else:
        sys.stdout.write(text)
    summary = summarize(res.rows, res.census)
    for g in summary.groups:
        print(
            f"n={g.n} kind={g.init_kind} trials={g.trials} mean={g.mean:.1f} "
            f"ci95=({g.ci95[0]:.1f},{g.ci95[1]:.1f}) max={g.max:.1f} "
            f"correct={g.correct_fraction:.3f} overflows={g.overflows}",
            file=sys.stderr,
        )
    if summary.slope is not None:
        print(f"fit mean_time = {summary.slope:.2f} n + {summary.intercept:.1f}", file=sys.stderr)
    if any(m.overflow for m in res.rows):
        return EXIT_OVERFLOW
    return EXIT_OK if all(m.correct for m in res.rows) else EXIT_INCORRECT


def cmd_verify(a) -> int:
    from .verifier import StateSpaceOverflow, VerifierCaps, audit_silent_set, check_stabilization

    if a.n is None or not a.inputs:
        raise UsageError("--n and --inputs are required")
    caps = VerifierCaps(a.cap_reset, a.cap_wait, a.cap_timer)
    try:
        report = check_stabilization(a.n, a.inputs, caps)
        violations = audit_silent_set(a.n, a.inputs, caps) if a.audit else []
    except StateSpaceOverflow as e:
        print(f"overflow: {e}", file=sys.stderr)
        return EXIT_OVERFLOW
    text = report.to_text() + "".join(f"audit {v}\n" for v in violations)
    if a.report:
        Path(a.report).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if report.all_terminal_silent_correct and not violations else EXIT_INCORRECT


def cmd_census(a) -> int:
    from .harness import SweepSpec, sweep
    from .model import Params
    from .statespace import state_count

    spec = SweepSpec(n_values=tuple(a.n), kinds=_kinds(a.kinds), trials=a.trials, base_seed=a.seed)
    res = sweep(spec)
    print("n,distinct_states,state_space,distinct_per_n")
    for n, ids in res.census.items():
        print(f"{n},{len(ids)},{state_count(Params(n=n))},{len(ids) / n:.3f}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        a = _merge(ns)
        handler = {"run": cmd_run, "sweep": cmd_sweep, "verify": cmd_verify, "census": cmd_census}[a.command]
        return handler(a)
    except (UsageError, ValueError, FileNotFoundError) as e:
        print(f"popmaj: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
