"""Exact-majority layer that runs on top of the ranking.

After the ranking step of an interaction this layer clears answers of agents
that just entered a reset, arms the timer of a freshly ranked median agent,
spreads answers between resetting agents, sorts inputs by rank through state
swaps, lets the median agent(s) decide, and finally lets the median agent
trigger a reset when it sees a disagreeing answer after its timer ran out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import (
    AgentState,
    Answer,
    Configuration,
    Input,
    Params,
    Role,
    input_answer,
)
from .ranking import detect_all_settled, trigger_reset

TSWAP_TIMER = 28


def decide(
    pair: tuple[tuple[int, Input], tuple[int, Input]], n: int
) -> Optional[tuple[Optional[Answer], Optional[Answer]]]:
    """Answers set by the median agents when they meet, or None.

    ``pair`` holds ``(rank, input)`` for two Settled agents. A ``None`` entry in
    the returned tuple leaves that agent's answer untouched.
    """
    (r0, x0), (r1, x1) = pair
    if n % 2 == 0:
        half = n // 2
        if (r0, r1) in ((half, half + 1), (half + 1, half)):
            if x0 == x1:
                a = input_answer(x0)
                return a, a
            return Answer.T, Answer.T
        return None
    mid = (n + 1) // 2
    if r0 == mid:
        return input_answer(x0), None
    if r1 == mid:
        return None, input_answer(x1)
    return None


def apply_majority_layer(
    p0: tuple[AgentState, Input],
    p1: tuple[AgentState, Input],
    post_ranking: tuple[AgentState, AgentState],
    params: Params,
) -> tuple[AgentState, AgentState]:
    (s0, x0), (s1, x1) = p0, p1
    pre = (s0, s1)
    a = list(post_ranking)
    x = [x0, x1]
    mid = params.mid

    for i in (0, 1):
        if a[i].role is Role.RESETTING and pre[i].role is not Role.RESETTING:
            a[i] = a[i].with_(answer=Answer.PHI)
        if a[i].role is Role.SETTLED and pre[i].role is not Role.SETTLED and a[i].rank == mid:
            a[i] = a[i].with_(timer=params.timer_max)

    if a[0].role is Role.RESETTING and a[1].role is Role.RESETTING:
        for i in (0, 1):
            if a[i].answer is Answer.PHI and a[1 - i].answer is not Answer.PHI:
                a[i] = a[i].with_(answer=a[1 - i].answer)
                break

    if a[0].role is Role.SETTLED and a[1].role is Role.SETTLED:
        if a[0].rank < a[1].rank and x[0] is Input.B and x[1] is Input.A:
            a[0], a[1] = a[1], a[0]

        decision = decide(((a[0].rank, x[0]), (a[1].rank, x[1])), params.n)
        if decision is not None:
            for i in (0, 1):
                if decision[i] is not None:
                    a[i] = a[i].with_(answer=decision[i])

        for i in (0, 1):
            if a[i].rank != mid:
                continue
            j = 1 - i
            if a[j].rank == params.n:
                a[i] = a[i].with_(timer=max(0, a[i].timer - 1))
            if a[i].timer == 0 and a[i].answer != a[j].answer:
                a[j] = a[j].with_(answer=a[i].answer)
                a[0] = trigger_reset(a[0], params)
                a[1] = trigger_reset(a[1], params)
            break

    return a[0], a[1]


def majority_answer(inputs) -> Answer:
    na = sum(1 for x in inputs if x is Input.A)
    nb = len(inputs) - na
    if na > nb:
        return Answer.A
    if nb > na:
        return Answer.B
    return Answer.T


def _median_state(config: Configuration, params: Params) -> Optional[AgentState]:
    for s in config.states:
        if s.role is Role.SETTLED and s.rank == params.mid:
            return s
    return None


def _sorted_by_input(config: Configuration) -> bool:
    max_a = max((s.rank for s, x in config.pairs() if x is Input.A), default=0)
    min_b = min((s.rank for s, x in config.pairs() if x is Input.B), default=config.n + 1)
    return max_a < min_b


def misordered_pairs(config: Configuration) -> int:
    """Number of (A-agent, B-agent) Settled pairs where the B-agent ranks lower."""
    a_ranks = [s.rank for s, x in config.pairs() if x is Input.A and s.role is Role.SETTLED]
    b_ranks = [s.rank for s, x in config.pairs() if x is Input.B and s.role is Role.SETTLED]
    return sum(1 for ra in a_ranks for rb in b_ranks if rb < ra)


def is_silent_shape(config: Configuration, params: Params) -> bool:
    """Fast O(n) test for the terminal shape: ranked, sorted, all answers correct, median timer 0."""
    if not detect_all_settled(config) or not _sorted_by_input(config):
        return False
    want = majority_answer(config.inputs)
    if any(s.answer is not want for s in config.states):
        return False
    return _median_state(config, params).timer == 0


@dataclass(frozen=True)
class PhasePredicates:
    in_S_rank: bool
    in_S_swap: bool
    in_T_swap: bool
    in_S_dec: bool
    in_S_out: bool
    in_S_tim: bool
    in_S_em: bool


def phase(config: Configuration, params: Params) -> PhasePredicates:
    ranked = detect_all_settled(config)
    if not ranked:
        return PhasePredicates(False, False, False, False, False, False, False)
    want = majority_answer(config.inputs)
    median = _median_state(config, params)
    swapped = _sorted_by_input(config)
    out = all(s.answer is want for s in config.states)
    tswap = median.timer >= TSWAP_TIMER
    dec = swapped and median.answer is want
    tim = swapped and out
    em = tim and median.timer == 0
    return PhasePredicates(ranked, swapped, tswap, dec, out, tim, em)
