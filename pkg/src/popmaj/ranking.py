"""Self-stabilizing ranking: propagate-reset with leader election, then
binary-tree rank assignment.

Rule groups, evaluated in order for one interaction (first group that
matches wins):

1. two Settled agents with the same rank both restart the reset;
2. a Resetting agent infects its partner, and resetting counters are coupled
   as ``max(c0, c1) - 1``; two leaders meeting demote the responder;
3. a Resetting agent whose counter reached 0 leaves the reset: the leader
   becomes Settled with rank 1, followers become Unsettled;
4. a Settled agent of rank ``i`` hands the smallest free child rank in
   ``{2i, 2i+1}`` (capped at ``n``) to an Unsettled partner;
5. an Unsettled agent that was not ranked counts its wait budget down and
   restarts the reset when the budget is spent.
"""

from __future__ import annotations

from enum import Enum
from typing import NamedTuple, Optional

from .model import LEFT, RIGHT, AgentState, Configuration, Leader, Params, Role


class ResetCause(str, Enum):
    RANK_CONFLICT = "RankConflict"
    WAIT_TIMEOUT = "WaitTimeout"
    MAJORITY_LAYER = "MajorityLayer"
    NONE = "None"


class ResetOutcome(NamedTuple):
    triggered: bool
    by: ResetCause

    @classmethod
    def none(cls) -> "ResetOutcome":
        return cls(False, ResetCause.NONE)


def trigger_reset(state: AgentState, params: Params) -> AgentState:
    """Enter the reset as a leader with a full counter; keep answer and timer handling to callers."""
    return AgentState(Role.RESETTING, leader=Leader.L, resetcount=params.r_max, answer=state.answer)


def free_child(state: AgentState, n: int) -> Optional[int]:
    """Smallest child rank this Settled agent may still hand out, or None."""
    for bit, child in ((LEFT, 2 * state.rank), (RIGHT, 2 * state.rank + 1)):
        if child <= n and not state.childmask & bit:
            return child
    return None


def _exit_reset(s: AgentState, params: Params) -> AgentState:
    if s.leader is Leader.L:
        return AgentState(Role.SETTLED, rank=1, answer=s.answer)
    return AgentState(Role.UNSETTLED, waitcount=params.w_max, answer=s.answer)


def _propagate(s0: AgentState, s1: AgentState, params: Params) -> tuple[AgentState, AgentState]:
    r0 = s0.role is Role.RESETTING
    r1 = s1.role is Role.RESETTING
    if r0 and r1:
        c = max(max(s0.resetcount, s1.resetcount) - 1, 0)
        leader1 = s1.leader
        if s0.leader is Leader.L and s1.leader is Leader.L:
            leader1 = Leader.F
        s0 = s0.with_(resetcount=c)
        s1 = s1.with_(resetcount=c, leader=leader1)
    elif r0:
        if s0.resetcount > params.dormant:
            s1 = AgentState(Role.RESETTING, leader=Leader.F, resetcount=max(s0.resetcount - 1, 0), answer=s1.answer)
        s0 = s0.with_(resetcount=max(s0.resetcount - 1, 0))
    else:
        if s1.resetcount > params.dormant:
            s0 = AgentState(Role.RESETTING, leader=Leader.F, resetcount=max(s1.resetcount - 1, 0), answer=s0.answer)
        s1 = s1.with_(resetcount=max(s1.resetcount - 1, 0))
    if s0.role is Role.RESETTING and s0.resetcount == 0:
        s0 = _exit_reset(s0, params)
    if s1.role is Role.RESETTING and s1.resetcount == 0:
        s1 = _exit_reset(s1, params)
    return s0, s1


def delta_ranking(
    pair: tuple[AgentState, AgentState], params: Params
) -> tuple[AgentState, AgentState, ResetOutcome]:
    s0, s1 = pair
    if s0.role is Role.SETTLED and s1.role is Role.SETTLED:
        if s0.rank == s1.rank:
            return (
                trigger_reset(s0, params),
                trigger_reset(s1, params),
                ResetOutcome(True, ResetCause.RANK_CONFLICT),
            )
        return s0, s1, ResetOutcome.none()

    if s0.role is Role.RESETTING or s1.role is Role.RESETTING:
        s0, s1 = _propagate(s0, s1, params)
        return s0, s1, ResetOutcome.none()

    out = [s0, s1]
    ranked = [False, False]
    for parent, child in ((0, 1), (1, 0)):
        p, c = out[parent], out[child]
        if p.role is Role.SETTLED and c.role is Role.UNSETTLED:
            rank = free_child(p, params.n)
            if rank is not None:
                bit = LEFT if rank == 2 * p.rank else RIGHT
                out[parent] = p.with_(childmask=p.childmask | bit)
                out[child] = AgentState(Role.SETTLED, rank=rank, answer=c.answer)
                ranked[child] = True

    outcome = ResetOutcome.none()
    for i in (0, 1):
        s = out[i]
        if s.role is Role.UNSETTLED and not ranked[i]:
            w = max(s.waitcount - 1, 0)
            if w == 0:
                out[i] = trigger_reset(s, params)
                outcome = ResetOutcome(True, ResetCause.WAIT_TIMEOUT)
            else:
                out[i] = s.with_(waitcount=w)
    return out[0], out[1], outcome


def detect_all_settled(config: Configuration) -> bool:
    """Every agent Settled with pairwise-distinct ranks."""
    ranks = []
    for s in config.states:
        if s.role is not Role.SETTLED:
            return False
        ranks.append(s.rank)
    return len(set(ranks)) == len(ranks)
