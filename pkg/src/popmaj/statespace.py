"""Dense indexing of the canonical agent-state set.

Layout (R = r_max, W = w_max, T = timer_max, m = ceil(n/2))::

    Resetting   leader x resetcount x answer            2 (R+1) 4
    Unsettled   waitcount x answer                      (W+1) 4
    Settled     rank != m: rank x childmask x answer    (n-1) 4 4
    Settled     rank == m: childmask x answer x timer   4 4 (T+1)
"""

from __future__ import annotations

from .model import AgentState, Answer, Leader, Params, Role


def state_count(params: Params) -> int:
    R, W, T, n = params.r_max, params.w_max, params.timer_max, params.n
    return 8 * (R + 1) + 4 * (W + 1) + 16 * (n - 1) + 16 * (T + 1)


def _bases(params: Params):
    b_uns = 8 * (params.r_max + 1)
    b_set = b_uns + 4 * (params.w_max + 1)
    b_mid = b_set + 16 * (params.n - 1)
    return b_uns, b_set, b_mid


def state_index(s: AgentState, params: Params) -> int:
    b_uns, b_set, b_mid = _bases(params)
    if s.role is Role.RESETTING:
        return (int(s.leader) * (params.r_max + 1) + s.resetcount) * 4 + int(s.answer)
    if s.role is Role.UNSETTLED:
        return b_uns + s.waitcount * 4 + int(s.answer)
    mid = params.mid
    if s.rank == mid:
        return b_mid + (s.childmask * 4 + int(s.answer)) * (params.timer_max + 1) + s.timer
    r = s.rank - 1 if s.rank < mid else s.rank - 2
    return b_set + (r * 4 + s.childmask) * 4 + int(s.answer)


def state_from_index(i: int, params: Params) -> AgentState:
    if not 0 <= i < state_count(params):
        raise IndexError(i)
    b_uns, b_set, b_mid = _bases(params)
    if i < b_uns:
        head, ans = divmod(i, 4)
        leader, rc = divmod(head, params.r_max + 1)
        return AgentState.resetting(Leader(leader), rc, Answer(ans))
    if i < b_set:
        w, ans = divmod(i - b_uns, 4)
        return AgentState.unsettled(w, Answer(ans))
    if i < b_mid:
        head, ans = divmod(i - b_set, 4)
        r, mask = divmod(head, 4)
        rank = r + 1 if r + 1 < params.mid else r + 2
        return AgentState.settled(rank, mask, Answer(ans))
    head, timer = divmod(i - b_mid, params.timer_max + 1)
    mask, ans = divmod(head, 4)
    return AgentState.settled(params.mid, mask, Answer(ans), timer)


def all_states(params: Params) -> list[AgentState]:
    return [state_from_index(i, params) for i in range(state_count(params))]
