"""Exhaustive model checking for tiny populations with capped counters.

Configurations are identified up to permutations of agents that share an
input: a configuration is a tuple of state ids holding the A-agents (sorted)
followed by the B-agents (sorted). Every configuration is a legal start, so
the graph covers the whole quotient space. Under the uniform scheduler an
execution ends up in a terminal strongly connected component with
probability 1, so the protocol self-stabilizes exactly when every terminal
component is one silent configuration with correct outputs.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .engine import delta, majority_oracle, output
from .majority import is_silent_shape
from .model import AgentState, Configuration, Input, Opinion, Params, parse_inputs
from .statespace import all_states, state_index

CONFIG_LIMIT = 50_000_000


class StateSpaceOverflow(RuntimeError):
    """The capped configuration space is too large to enumerate."""


@dataclass(frozen=True)
class VerifierCaps:
    r_max: int = 1
    w_max: int = 1
    timer_max: int = 1

    def __post_init__(self):
        for name in ("r_max", "w_max", "timer_max"):
            if getattr(self, name) < 1:
                raise ValueError(f"cap {name} must be >= 1")

    def params(self, n: int) -> Params:
        return Params.capped(n, self.r_max, self.w_max, self.timer_max)


@dataclass
class VerifierReport:
    n: int
    inputs: tuple[Input, ...]
    caps: VerifierCaps
    reachable_count: int
    terminal_scc_count: int
    bad_silent_configs: list[Configuration] = field(default_factory=list)
    counterexample: Optional[tuple[Configuration, list[tuple[int, int]]]] = None
    terminal_outputs: set[tuple[Opinion, ...]] = field(default_factory=set)

    @property
    def all_terminal_silent_correct(self) -> bool:
        return not self.bad_silent_configs and self.counterexample is None

    def to_text(self) -> str:
        c = self.caps
        lines = [
            f"n={self.n}",
            f"inputs={''.join(x.name for x in self.inputs)}",
            f"cap_reset={c.r_max}",
            f"cap_wait={c.w_max}",
            f"cap_timer={c.timer_max}",
            f"reachable_count={self.reachable_count}",
            f"terminal_scc_count={self.terminal_scc_count}",
            f"all_terminal_silent_correct={str(self.all_terminal_silent_correct).lower()}",
            f"terminal_outputs={';'.join(sorted(''.join(o.value for o in t) for t in self.terminal_outputs))}",
            f"violations={len(self.bad_silent_configs)}",
        ]
        if self.counterexample is not None:
            start, path = self.counterexample
            lines.append("counterexample_path=" + " ".join(f"({u},{v})" for u, v in path))
        lines.append("")
        for cfg in self.bad_silent_configs:
            lines.append("bad " + " | ".join(_fmt_state(s) for s in cfg.states))
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())


def _fmt_state(s: AgentState) -> str:
    return (
        f"{s.role.name}/{s.leader.name}/rc{s.resetcount}/w{s.waitcount}"
        f"/r{s.rank}/m{s.childmask}/{s.answer.name}/t{s.timer}"
    )


def enumerate_states(n: int, caps: VerifierCaps) -> list[AgentState]:
    """All canonical agent states of the capped protocol at population size ``n``."""
    return all_states(caps.params(n))


class _QuotientSpace:
    """Configurations up to within-input-group permutation, with memoized delta."""

    def __init__(self, n: int, inputs: Sequence[Input], caps: VerifierCaps):
        self.params = caps.params(n)
        self.inputs = tuple(inputs)
        self.states = all_states(self.params)
        k = len(self.states)
        if k**n > CONFIG_LIMIT:
            raise StateSpaceOverflow(f"{k}^{n} configurations exceed the limit of {CONFIG_LIMIT}")
        self.num_a = sum(1 for x in inputs if x is Input.A)
        self.group_input = (Input.A,) * self.num_a + (Input.B,) * (n - self.num_a)
        self._delta: dict[tuple[int, int, int, int], tuple[int, int]] = {}

    def step_ids(self, i: int, xi: Input, j: int, xj: Input) -> tuple[int, int]:
        key = (i, int(xi), j, int(xj))
        hit = self._delta.get(key)
        if hit is None:
            a, b = delta((self.states[i], xi), (self.states[j], xj), self.params)
            hit = (state_index(a, self.params), state_index(b, self.params))
            self._delta[key] = hit
        return hit

    def canon(self, ids: Sequence[int]) -> tuple[int, ...]:
        m = self.num_a
        return tuple(sorted(ids[:m])) + tuple(sorted(ids[m:]))

    def nodes(self) -> list[tuple[int, ...]]:
        k = len(self.states)
        a = itertools.combinations_with_replacement(range(k), self.num_a)
        b = list(itertools.combinations_with_replacement(range(k), len(self.group_input) - self.num_a))
        return [x + y for x in a for y in b]

    def successors(self, node: tuple[int, ...]):
        """Yield ``(u, v, successor)`` for every ordered pair of positions."""
        x = self.group_input
        n = len(node)
        for u in range(n):
            for v in range(n):
                if u == v:
                    continue
                a, b = self.step_ids(node[u], x[u], node[v], x[v])
                if a == node[u] and b == node[v]:
                    yield u, v, node
                    continue
                nxt = list(node)
                nxt[u], nxt[v] = a, b
                yield u, v, self.canon(nxt)

    def config(self, node: Sequence[int]) -> Configuration:
        return Configuration(self.group_input, tuple(self.states[i] for i in node))


def _correct(cfg: Configuration) -> bool:
    want = majority_oracle(cfg.inputs)
    return all(output(s) is want for s in cfg.states)


def check_stabilization(n: int, inputs: Sequence[Input] | str, caps: VerifierCaps = VerifierCaps()) -> VerifierReport:
    inputs = parse_inputs(inputs)
    if len(inputs) != n:
        raise ValueError(f"expected {n} inputs, got {len(inputs)}")
    space = _QuotientSpace(n, inputs, caps)
    nodes = space.nodes()
    index = {node: i for i, node in enumerate(nodes)}

    rows, cols = [], []
    for i, node in enumerate(nodes):
        for _, _, nxt in space.successors(node):
            j = index[nxt]
            if j != i:
                rows.append(i)
                cols.append(j)
    N = len(nodes)
    graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(N, N))
    ncomp, labels = connected_components(graph, directed=True, connection="strong")

    leaves = np.ones(ncomp, dtype=bool)
    r = np.asarray(rows, dtype=np.int64)
    c = np.asarray(cols, dtype=np.int64)
    leaves[np.unique(labels[r][labels[r] != labels[c]])] = False
    sizes = np.bincount(labels, minlength=ncomp)

    report = VerifierReport(n, space.group_input, caps, N, int(leaves.sum()))
    bad_nodes = []
    for comp in np.flatnonzero(leaves):
        members = np.flatnonzero(labels == comp)
        rep = nodes[members[0]]
        cfg = space.config(rep)
        # a singleton leaf component without out-edges is a delta fixpoint
        if sizes[comp] != 1 or not _correct(cfg):
            report.bad_silent_configs.append(cfg)
            bad_nodes.append(members[0])
        else:
            report.terminal_outputs.add(tuple(output(s) for s in cfg.states))
    if bad_nodes:
        report.counterexample = _counterexample(space, nodes, index, set(bad_nodes), labels)
    return report


def _counterexample(space, nodes, index, bad, labels):
    """Shortest path from the all-Unsettled start into a bad terminal component.

    Falls back to the bad configuration itself (empty path) when the start
    cannot reach one.
    """
    p = space.params
    start_state = state_index(AgentState.unsettled(p.w_max), p)
    start = space.canon([start_state] * len(space.group_input))
    bad_comps = {labels[b] for b in bad}
    prev = {start: None}
    queue = deque([start])
    hit = None
    while queue:
        node = queue.popleft()
        if labels[index[node]] in bad_comps:
            hit = node
            break
        for u, v, nxt in space.successors(node):
            if nxt not in prev:
                prev[nxt] = (node, u, v)
                queue.append(nxt)
    if hit is None:
        node = nodes[min(bad)]
        return space.config(node), []
    steps = []
    node = hit
    while prev[node] is not None:
        node, u, v = prev[node]
        steps.append((node, u, v))
    steps.reverse()
    return space.config(start), _lift(space, start, steps)


def _lift(space, start, steps):
    """Translate quotient-space position pairs into pairs of concrete agents."""
    real = list(start)
    m = space.num_a
    path = []
    for node, u, v in steps:
        # canonical position -> concrete agent: stable sort within each group
        perm = sorted(range(m), key=lambda i: real[i]) + sorted(range(m, len(real)), key=lambda i: real[i])
        assert tuple(real[i] for i in perm) == node
        a, b = perm[u], perm[v]
        real[a], real[b] = space.step_ids(real[a], space.group_input[a], real[b], space.group_input[b])
        path.append((a, b))
    return path


@dataclass(frozen=True)
class Violation:
    kind: str  # "incorrect_output" | "duplicate_a_state" | "shape_mismatch"
    config: Configuration

    def __str__(self) -> str:
        return f"{self.kind}: " + " | ".join(_fmt_state(s) for s in self.config.states)


def is_fixpoint(cfg: Configuration, params: Params) -> bool:
    items = list(cfg.pairs())
    for u, pu in enumerate(items):
        for v, pv in enumerate(items):
            if u != v and delta(pu, pv, params) != (pu[0], pv[0]):
                return False
    return True


def audit_silent_set(n: int, inputs: Sequence[Input] | str, caps: VerifierCaps = VerifierCaps()) -> list[Violation]:
    """Every delta fixpoint must be output-correct and, when A is not the strict
    majority, keep all A-agents in pairwise distinct states. Also reports any
    disagreement between the fixpoint set and :func:`is_silent_shape`."""
    inputs = parse_inputs(inputs)
    if len(inputs) != n:
        raise ValueError(f"expected {n} inputs, got {len(inputs)}")
    space = _QuotientSpace(n, inputs, caps)
    num_b = n - space.num_a
    out = []
    for node in space.nodes():
        fix = all(nxt == node for _, _, nxt in space.successors(node))
        cfg = space.config(node)
        if fix != is_silent_shape(cfg, space.params):
            out.append(Violation("shape_mismatch", cfg))
        if not fix:
            continue
        if not _correct(cfg):
            out.append(Violation("incorrect_output", cfg))
        a_ids = node[: space.num_a]
        if space.num_a <= num_b and len(set(a_ids)) < len(a_ids):
            out.append(Violation("duplicate_a_state", cfg))
    return out
