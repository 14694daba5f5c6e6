"""Initial-configuration generators, instrumented trials, sweeps and statistics."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .engine import UniformScheduler, load_config, majority_oracle, outputs
from .fast import PHASES, run_fast
from .majority import majority_answer
from .model import (
    LEFT,
    RIGHT,
    AgentState,
    Answer,
    Configuration,
    Input,
    Leader,
    Params,
    Role,
)
from .statespace import state_count, state_from_index


class InitKind(str, Enum):
    UNIFORM_RANDOM_STATE = "uniform_random_state"
    ALL_UNSETTLED = "all_unsettled"
    MID_RESET = "mid_reset"
    WRONG_ANSWERS = "wrong_answers"
    DUPLICATE_RANKS = "duplicate_ranks"
    LB_FLIP = "lb_flip"
    FROM_FILE = "from_file"


SWEEP_KINDS = tuple(k for k in InitKind if k is not InitKind.FROM_FILE)

CSV_COLUMNS = (
    "n,seed,trial,num_A,init_kind,interactions,parallel_time,resets,"
    "t_S_rank,t_T_swap,t_S_dec,t_S_tim,t_S_em,correct"
).split(",")


def default_max_interactions(n: int) -> int:
    return int(200 * n * n * math.log(n + 1))


def num_a_policy(n: int, small: int = 9) -> list[int]:
    """Every count for small ``n``; unanimous, near-tie and tie counts otherwise."""
    if n <= small:
        return list(range(n + 1))
    vals = {0, 1, n // 2 - 1, n // 2, (n + 1) // 2, n - 1, n}
    return sorted(v for v in vals if 0 <= v <= n)


# --- generators -----------------------------------------------------------

def _inputs(n: int, num_a: int, rng: np.random.Generator) -> tuple[Input, ...]:
    xs = np.array([Input.A] * num_a + [Input.B] * (n - num_a))
    rng.shuffle(xs)
    return tuple(Input(int(x)) for x in xs)


def _tree_mask(rank: int, n: int) -> int:
    return (LEFT if 2 * rank <= n else 0) | (RIGHT if 2 * rank + 1 <= n else 0)


def _sorted_ranks(inputs: Sequence[Input], rng: np.random.Generator) -> list[int]:
    """Ranks that put every A-agent below every B-agent, random within each group."""
    a = [i for i, x in enumerate(inputs) if x is Input.A]
    b = [i for i, x in enumerate(inputs) if x is Input.B]
    rng.shuffle(a)
    rng.shuffle(b)
    ranks = [0] * len(inputs)
    for r, i in enumerate(a + b, start=1):
        ranks[i] = r
    return ranks


def silent_config(inputs: Sequence[Input], params: Params, rng: np.random.Generator) -> Configuration:
    """A silent configuration for ``inputs``: sorted ranks, full child masks, correct answers."""
    n = len(inputs)
    want = majority_answer(inputs)
    ranks = _sorted_ranks(inputs, rng)
    states = tuple(AgentState.settled(r, _tree_mask(r, n), want) for r in ranks)
    return Configuration(tuple(inputs), states)


def ranked_config(n: int, num_a: int, params: Params, rng: np.random.Generator) -> Configuration:
    """Random configuration in S_rank: a random rank permutation and arbitrary
    answers and child masks, with the median timer full."""
    inputs = _inputs(n, num_a, rng)
    perm = rng.permutation(n) + 1
    states = []
    for r in perm:
        r = int(r)
        timer = params.timer_max if r == params.mid else 0
        states.append(AgentState.settled(r, int(rng.integers(4)), Answer(int(rng.integers(4))), timer))
    return Configuration(inputs, tuple(states))


def _lb_flip(n: int, num_a: int, params: Params, rng: np.random.Generator) -> tuple[Configuration, int]:
    if n < 5 or n % 2 == 0:
        raise ValueError(f"lb_flip needs odd n >= 5, got {n}")
    if not 1 <= num_a <= n - 1:
        raise ValueError("lb_flip needs at least one A-agent and one B-agent")
    base = silent_config(_inputs(n, num_a, rng), params, rng)
    a_agents = [i for i, x in enumerate(base.inputs) if x is Input.A]
    b_agents = [i for i, x in enumerate(base.inputs) if x is Input.B]
    u = int(rng.choice(b_agents))
    w = int(rng.choice(a_agents))
    inputs = list(base.inputs)
    inputs[u] = Input.A
    states = list(base.states)
    states[u] = base.states[w]
    return Configuration(tuple(inputs), tuple(states)), u


def build(
    kind: InitKind | str,
    n: int,
    num_a: int,
    seed: int,
    params: Params,
    path: Optional[str | Path] = None,
) -> tuple[Configuration, Optional[int]]:
    """Like :func:`generate`, also returning the marked agent of an lb_flip start."""
    kind = InitKind(kind)
    if kind is InitKind.FROM_FILE:
        if path is None:
            raise ValueError("from_file needs a path")
        cfg = load_config(path)
        if cfg.n != n:
            raise ValueError(f"snapshot has n={cfg.n}, expected {n}")
        return cfg, None
    if not 0 <= num_a <= n:
        raise ValueError(f"num_A must be in [0, {n}], got {num_a}")
    if params.n != n:
        raise ValueError("params.n does not match n")
    rng = np.random.default_rng([seed, 0x5EED])

    if kind is InitKind.LB_FLIP:
        return _lb_flip(n, num_a, params, rng)

    inputs = _inputs(n, num_a, rng)
    if kind is InitKind.ALL_UNSETTLED:
        states = [AgentState.unsettled(params.w_max)] * n
    elif kind is InitKind.UNIFORM_RANDOM_STATE:
        ids = rng.integers(0, state_count(params), size=n)
        states = [state_from_index(int(i), params) for i in ids]
    elif kind is InitKind.DUPLICATE_RANKS:
        states = [AgentState.settled(1)] * n
    elif kind is InitKind.WRONG_ANSWERS:
        want = majority_answer(inputs)
        wrong = {Answer.A: Answer.B, Answer.B: Answer.A, Answer.T: Answer.A}[want]
        states = [
            AgentState.settled(r, _tree_mask(r, n), wrong)
            for r in _sorted_ranks(inputs, rng)
        ]
    elif kind is InitKind.MID_RESET:
        # a correct silent configuration caught half-way through a reset
        states = list(silent_config(inputs, params, rng).states)
        hit = rng.choice(n, size=(n + 1) // 2, replace=False)
        for i in hit:
            leader = Leader(int(rng.integers(2)))
            states[int(i)] = AgentState.resetting(leader, int(rng.integers(1, params.r_max + 1)))
    else:  # pragma: no cover
        raise ValueError(kind)
    return Configuration(inputs, tuple(states)), None


def generate(kind: InitKind | str, n: int, num_a: int, seed: int, params: Params,
             path: Optional[str | Path] = None) -> Configuration:
    return build(kind, n, num_a, seed, params, path)[0]


# --- trials ---------------------------------------------------------------

@dataclass(frozen=True)
class TraceMetrics:
    n: int
    seed: int
    trial: int
    num_A: int
    init_kind: str
    interactions: Optional[int]  # None marks an overflow
    parallel_time: Optional[float]
    resets: int
    phase_times: dict = field(default_factory=dict)
    correct: bool = False
    flip_change: Optional[int] = None

    @property
    def overflow(self) -> bool:
        return self.interactions is None

    def row(self) -> dict:
        out = {
            "n": self.n,
            "seed": self.seed,
            "trial": self.trial,
            "num_A": self.num_A,
            "init_kind": self.init_kind,
            "interactions": "" if self.interactions is None else self.interactions,
            "parallel_time": "" if self.parallel_time is None else repr(self.parallel_time),
            "resets": self.resets,
        }
        for name in PHASES:
            t = self.phase_times.get(name)
            out[f"t_{name}"] = "" if t is None else t
        out["correct"] = str(self.correct).lower()
        return out


def run_trial(
    kind: InitKind | str,
    n: int,
    num_a: int,
    seed: int,
    params: Optional[Params] = None,
    max_interactions: Optional[int] = None,
    trial: int = 0,
    path: Optional[str | Path] = None,
    census: bool = False,
):
    """One instrumented run. Returns :class:`TraceMetrics`, plus the visited
    state ids when ``census`` is set.

    Phase times are interaction counts at the first hit of each predicate.
    For lb_flip starts ``flip_change`` is the index of the first interaction
    that changes the flipped agent.
    """
    kind = InitKind(kind)
    params = params or Params(n=n)
    if max_interactions is None:
        max_interactions = default_max_interactions(n)
    cfg, marked = build(kind, n, num_a, seed, params, path)
    num_a = sum(1 for x in cfg.inputs if x is Input.A) if kind is InitKind.FROM_FILE else num_a
    res = run_fast(
        cfg, params, UniformScheduler(n, seed), max_interactions,
        watch=marked, census=census,
    )
    want = majority_oracle(cfg.inputs)
    correct = all(o is want for o in outputs(res.config))
    metrics = TraceMetrics(
        n=n,
        seed=seed,
        trial=trial,
        num_A=num_a,
        init_kind=kind.value,
        interactions=res.silence_index,
        parallel_time=None if res.silence_index is None else res.silence_index / n,
        resets=res.resets,
        phase_times=res.phase_times,
        correct=correct,
        flip_change=res.watch_index,
    )
    if census:
        return metrics, res.census
    return metrics


# --- sweeps ---------------------------------------------------------------

def derive_seed(base_seed: int, n: int, kind: InitKind | str, num_a: int, trial: int) -> int:
    """Stable 63-bit seed from the run coordinates (independent of Python's hash salt)."""
    kind_id = list(InitKind).index(InitKind(kind))
    ss = np.random.SeedSequence([base_seed, n, kind_id, num_a, trial])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class SweepSpec:
    n_values: tuple[int, ...]
    kinds: tuple[InitKind, ...] = SWEEP_KINDS
    trials: int = 20
    base_seed: int = 0
    num_a: Optional[tuple[int, ...]] = None  # None: policy per n
    t_rank: int = 16
    max_interactions: Optional[int] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        object.__setattr__(self, "kinds", tuple(InitKind(k) for k in self.kinds))
        if InitKind.FROM_FILE in self.kinds:
            raise ValueError("from_file is not a sweepable kind")

    def jobs(self) -> list[tuple]:
        out = []
        for n in sorted(self.n_values):
            for kind in sorted(self.kinds, key=lambda k: k.value):
                if kind is InitKind.LB_FLIP and (n % 2 == 0 or n < 5):
                    continue
                counts = self.num_a if self.num_a is not None else num_a_policy(n)
                for a in sorted(counts):
                    if kind is InitKind.LB_FLIP and not 1 <= a <= n - 1:
                        continue
                    for t in range(self.trials):
                        out.append((n, kind.value, a, t))
        return out


@dataclass
class SweepResult:
    rows: list[TraceMetrics]
    census: dict[int, np.ndarray]

    def to_csv(self) -> str:
        return rows_to_csv(self.rows)


def _job(args):
    n, kind, a, t, base_seed, t_rank, max_inter = args
    seed = derive_seed(base_seed, n, kind, a, t)
    params = Params(n=n, t_rank=t_rank)
    m, visited = run_trial(kind, n, a, seed, params, max_inter, trial=t, census=True)
    return m, visited


def sweep(spec: SweepSpec, workers: int = 1, progress=None) -> SweepResult:
    jobs = [(n, k, a, t, spec.base_seed, spec.t_rank, spec.max_interactions) for n, k, a, t in spec.jobs()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_job, jobs, chunksize=8))
    else:
        results = []
        for j in jobs:
            results.append(_job(j))
            if progress is not None:
                progress(len(results), len(jobs))
    census: dict[int, set] = {}
    for m, visited in results:
        census.setdefault(m.n, set()).update(int(i) for i in visited)
    rows = [m for m, _ in results]
    rows.sort(key=lambda m: (m.n, m.init_kind, m.num_A, m.trial))
    return SweepResult(rows, {n: np.array(sorted(s), dtype=np.int64) for n, s in sorted(census.items())})


def rows_to_csv(rows: Iterable[TraceMetrics]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for m in rows:
        w.writerow(m.row())
    return buf.getvalue()


def rows_to_json(rows: Iterable[TraceMetrics]) -> str:
    return json.dumps([asdict(m) for m in rows], indent=2, sort_keys=True)


# --- statistics -----------------------------------------------------------

@dataclass(frozen=True)
class GroupStats:
    n: int
    init_kind: str
    trials: int
    mean: float
    ci95: tuple[float, float]
    max: float
    correct_fraction: float
    overflows: int


@dataclass
class Summary:
    groups: list[GroupStats]
    slope: Optional[float]
    intercept: Optional[float]
    census: dict[int, int]


def _mean_ci(xs: np.ndarray) -> tuple[float, tuple[float, float]]:
    mean = float(xs.mean())
    if len(xs) < 2:
        return mean, (mean, mean)
    half = 1.96 * float(xs.std(ddof=1)) / math.sqrt(len(xs))
    return mean, (mean - half, mean + half)


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    slope, intercept = np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)
    return float(slope), float(intercept)


def summarize(rows: Sequence[TraceMetrics], census: Optional[dict[int, np.ndarray]] = None) -> Summary:
    if not rows:
        raise ValueError("cannot summarize an empty table")
    groups = []
    keys = sorted({(m.n, m.init_kind) for m in rows})
    for n, kind in keys:
        sel = [m for m in rows if m.n == n and m.init_kind == kind]
        times = np.array([m.parallel_time for m in sel if m.parallel_time is not None])
        mean, ci = _mean_ci(times) if len(times) else (math.nan, (math.nan, math.nan))
        groups.append(GroupStats(
            n=n,
            init_kind=kind,
            trials=len(sel),
            mean=mean,
            ci95=ci,
            max=float(times.max()) if len(times) else math.nan,
            correct_fraction=sum(m.correct for m in sel) / len(sel),
            overflows=sum(m.overflow for m in sel),
        ))
    per_n = {}
    for m in rows:
        if m.parallel_time is not None:
            per_n.setdefault(m.n, []).append(m.parallel_time)
    slope = intercept = None
    if len(per_n) >= 2:
        ns = sorted(per_n)
        slope, intercept = linear_fit(ns, [float(np.mean(per_n[n])) for n in ns])
    counts = {n: int(len(v)) for n, v in (census or {}).items()}
    return Summary(groups, slope, intercept, counts)
