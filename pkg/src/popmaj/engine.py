"""Population-protocol machinery: the joint transition function, schedulers,
the execution loop and silence detection.

This module is the readable reference implementation. :mod:`popmaj.fast`
re-implements the same transition function over integer arrays for long
simulations; the two are cross-checked pair-for-pair in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .majority import apply_majority_layer, is_silent_shape
from .model import (
    AgentState,
    Answer,
    Configuration,
    Input,
    InteractionPair,
    Leader,
    Opinion,
    Params,
    Role,
    canonical,
    check_state,
)
from .ranking import ResetCause, delta_ranking

_OPINION_OF_ANSWER = {Answer.PHI: Opinion.T, Answer.T: Opinion.T, Answer.A: Opinion.A, Answer.B: Opinion.B}


def delta_traced(
    p0: tuple[AgentState, Input], p1: tuple[AgentState, Input], params: Params
) -> tuple[AgentState, AgentState, ResetCause]:
    """Like :func:`delta` but also reports which layer (if any) started a reset."""
    (s0, x0), (s1, x1) = p0, p1
    check_state(s0, params)
    check_state(s1, params)
    r0, r1, outcome = delta_ranking((s0, s1), params)
    a0, a1 = apply_majority_layer(p0, p1, (r0, r1), params)
    cause = outcome.by
    if not outcome.triggered and r0.role is not Role.RESETTING and r1.role is not Role.RESETTING:
        if a0.role is Role.RESETTING and a1.role is Role.RESETTING:
            cause = ResetCause.MAJORITY_LAYER
    return canonical(a0, params), canonical(a1, params), cause


def delta(
    p0: tuple[AgentState, Input], p1: tuple[AgentState, Input], params: Params
) -> tuple[AgentState, AgentState]:
    """Joint transition for initiator ``p0`` and responder ``p1``."""
    a0, a1, _ = delta_traced(p0, p1, params)
    return a0, a1


def output(state: AgentState, input: Input | None = None) -> Opinion:
    return _OPINION_OF_ANSWER[state.answer]


def majority_oracle(inputs: Sequence[Input]) -> Opinion:
    if len(inputs) == 0:
        raise ValueError("majority of an empty population is undefined")
    na = sum(1 for x in inputs if Input(x) is Input.A)
    nb = len(inputs) - na
    if na > nb:
        return Opinion.A
    if nb > na:
        return Opinion.B
    return Opinion.T


def outputs(config: Configuration) -> tuple[Opinion, ...]:
    return tuple(output(s, x) for s, x in config.pairs())


def pair_from_index(k: int, n: int) -> InteractionPair:
    u, v = divmod(k, n - 1)
    return InteractionPair(u, v + (v >= u))


class UniformScheduler:
    """Uniform random ordered pairs of distinct agents.

    Draws ``k`` uniformly from ``[0, n(n-1))`` with numpy's PCG64 generator
    (``numpy.random.default_rng(seed)``, blocks of ``block`` integers via
    ``Generator.integers``) and maps ``k`` to ``(k // (n-1), k % (n-1))`` with
    the responder index shifted past the initiator. The pair sequence is a
    function of ``(n, seed, block)`` only.
    """

    def __init__(self, n: int, seed: int, block: int = 1 << 14):
        if n < 2:
            raise ValueError("the uniform scheduler needs n >= 2")
        self.n = n
        self.seed = seed
        self.block = block
        self._rng = np.random.default_rng(seed)
        self._u = np.empty(0, dtype=np.int64)
        self._v = np.empty(0, dtype=np.int64)
        self._pos = 0

    def _refill(self):
        n = self.n
        k = self._rng.integers(0, n * (n - 1), size=self.block, dtype=np.int64)
        u, v = np.divmod(k, n - 1)
        self._u = u
        self._v = v + (v >= u)
        self._pos = 0

    def peek_block(self) -> tuple[np.ndarray, np.ndarray]:
        """Pending pairs as two index arrays; call :meth:`advance` with how many were used."""
        if self._pos >= len(self._u):
            self._refill()
        return self._u[self._pos:], self._v[self._pos:]

    def advance(self, k: int) -> None:
        self._pos += k

    def next(self) -> InteractionPair:
        u, v = self.peek_block()
        pair = InteractionPair(int(u[0]), int(v[0]))
        self.advance(1)
        return pair

    __next__ = next

    def __iter__(self) -> Iterator[InteractionPair]:
        return self


class ScriptedScheduler:
    """Replays a fixed list of pairs (a deterministic scheduler)."""

    def __init__(self, pairs: Iterable[tuple[int, int]]):
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        self._u = arr[:, 0].copy()
        self._v = arr[:, 1].copy()
        self._pos = 0

    def peek_block(self) -> tuple[np.ndarray, np.ndarray]:
        return self._u[self._pos:], self._v[self._pos:]

    def advance(self, k: int) -> None:
        self._pos += k

    def next(self) -> InteractionPair:
        if self._pos >= len(self._u):
            raise StopIteration
        pair = InteractionPair(int(self._u[self._pos]), int(self._v[self._pos]))
        self._pos += 1
        return pair

    __next__ = next

    def __iter__(self) -> Iterator[InteractionPair]:
        return self


def _check_pair(pair: tuple[int, int], n: int) -> InteractionPair:
    u, v = pair
    if u == v or not (0 <= u < n and 0 <= v < n):
        raise ValueError(f"invalid interaction pair {pair} for n={n}")
    return InteractionPair(u, v)


def step(config: Configuration, pair: tuple[int, int], params: Params) -> Configuration:
    u, v = _check_pair(pair, config.n)
    a, b = delta(
        (config.states[u], config.inputs[u]), (config.states[v], config.inputs[v]), params
    )
    if a == config.states[u] and b == config.states[v]:
        return config
    return config.replace_states({u: a, v: b})


def is_silent(config: Configuration, params: Params) -> bool:
    """Exact check: no ordered pair changes any state. O(n^2) transitions."""
    cache = {}
    items = list(config.pairs())
    for u, pu in enumerate(items):
        for v, pv in enumerate(items):
            if u == v:
                continue
            key = (pu, pv)
            if key not in cache:
                cache[key] = delta(pu, pv, params) == (pu[0], pv[0])
            if not cache[key]:
                return False
    return True


@dataclass(frozen=True)
class RunResult:
    config: Configuration
    interactions: int
    silence_index: Optional[int]
    resets: int

    @property
    def silenced(self) -> bool:
        return self.silence_index is not None

    def parallel_time(self, n: int) -> Optional[float]:
        return None if self.silence_index is None else self.silence_index / n


def run(
    config: Configuration,
    params: Params,
    scheduler,
    max_interactions: int,
    backend: str = "python",
) -> RunResult:
    """Run until silent or ``max_interactions`` pairs were applied.

    A configuration is silent exactly when it has the terminal shape tested by
    :func:`popmaj.majority.is_silent_shape` (cross-checked against
    :func:`is_silent` in the tests), so the check is exact at every step.
    ``silence_index`` is None when the budget ran out (or a scripted scheduler
    ran dry) first.
    """
    if max_interactions <= 0:
        raise ValueError("max_interactions must be positive")
    if backend == "fast":
        from .fast import run_fast

        res = run_fast(config, params, scheduler, max_interactions)
        return RunResult(res.config, res.interactions, res.silence_index, res.resets)
    if backend != "python":
        raise ValueError(f"unknown backend {backend!r}")

    if is_silent_shape(config, params):
        return RunResult(config, 0, 0, 0)
    resets = 0
    t = 0
    while t < max_interactions:
        try:
            u, v = _check_pair(scheduler.next(), config.n)
        except StopIteration:
            break
        t += 1
        su, sv = config.states[u], config.states[v]
        a, b, cause = delta_traced((su, config.inputs[u]), (sv, config.inputs[v]), params)
        if cause is not ResetCause.NONE:
            resets += 1
        if a == su and b == sv:
            continue
        config = config.replace_states({u: a, v: b})
        if is_silent_shape(config, params):
            return RunResult(config, t, t, resets)
    return RunResult(config, t, None, resets)


# --- snapshot files -------------------------------------------------------

SNAPSHOT_FIELDS = "input,role,leader,resetcount,waitcount,rank,childmask,answer,timer"
_ROLE_NAMES = {Role.RESETTING: "Resetting", Role.SETTLED: "Settled", Role.UNSETTLED: "Unsettled"}
_ANSWER_NAMES = {Answer.PHI: "Phi", Answer.T: "T", Answer.A: "A", Answer.B: "B"}


def dumps_config(config: Configuration) -> str:
    lines = [f"popmaj-config v1 n={config.n}"]
    for s, x in config.pairs():
        lines.append(
            ",".join(
                [
                    x.name,
                    _ROLE_NAMES[s.role],
                    s.leader.name,
                    str(s.resetcount),
                    str(s.waitcount),
                    str(s.rank),
                    str(s.childmask),
                    _ANSWER_NAMES[s.answer],
                    str(s.timer),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def loads_config(text: str) -> Configuration:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise ValueError("empty snapshot")
    header = rows[0].split()
    if header[:2] != ["popmaj-config", "v1"] or len(header) != 3 or not header[2].startswith("n="):
        raise ValueError(f"bad snapshot header: {rows[0]!r}")
    n = int(header[2][2:])
    roles = {v: k for k, v in _ROLE_NAMES.items()}
    answers = {v: k for k, v in _ANSWER_NAMES.items()}
    inputs, states = [], []
    for ln in rows[1:]:
        f = ln.split(",")
        if len(f) != 9:
            raise ValueError(f"expected 9 fields ({SNAPSHOT_FIELDS}), got {ln!r}")
        inputs.append(Input[f[0]])
        states.append(
            AgentState(
                roles[f[1]],
                leader=Leader[f[2]],
                resetcount=int(f[3]),
                waitcount=int(f[4]),
                rank=int(f[5]),
                childmask=int(f[6]),
                answer=answers[f[7]],
                timer=int(f[8]),
            )
        )
    if len(inputs) != n:
        raise ValueError(f"header says n={n} but {len(inputs)} agents listed")
    return Configuration(tuple(inputs), tuple(states))


def save_config(config: Configuration, path: str | Path) -> None:
    Path(path).write_text(dumps_config(config))


def load_config(path: str | Path) -> Configuration:
    return loads_config(Path(path).read_text())
