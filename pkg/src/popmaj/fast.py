"""Compiled simulation kernel.

Agent states live in an ``(n, 8)`` int64 array with columns
``role, leader, resetcount, waitcount, rank, childmask, answer, timer`` using
the integer codes of :mod:`popmaj.model`; inputs are a separate int64 vector
(0 = A, 1 = B). The transition is a line-for-line port of
:func:`popmaj.engine.delta`.

Phase predicates are kept exact in O(1) per interaction from running
counters (settled agents, ranks held exactly once, A-agents placed in the low
ranks, correct answers), so the silence index is exact for every ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .majority import TSWAP_TIMER, majority_answer
from .model import AgentState, Answer, Configuration, Input, Leader, Params, Role

ROLE, LEADER, RC, WAIT, RANK, MASK, ANS, TIMER = range(8)
RES, SET, UNS = int(Role.RESETTING), int(Role.SETTLED), int(Role.UNSETTLED)
LDR = int(Leader.L)
PHI, TIE = int(Answer.PHI), int(Answer.T)

# counter slots
C_SETTLED, C_SINGLE, C_ALOW, C_CORRECT, C_RESETS, C_WATCH = range(6)
# phase slots
PHASES = ("S_rank", "T_swap", "S_dec", "S_tim", "S_em")
P_RANK, P_TSWAP, P_DEC, P_TIM, P_EM = range(5)


@numba.njit(cache=True)
def _trigger(S, i, R):
    S[i, ROLE] = RES
    S[i, LEADER] = LDR
    S[i, RC] = R
    S[i, WAIT] = 0
    S[i, RANK] = 1
    S[i, MASK] = 0
    S[i, TIMER] = 0


@numba.njit(cache=True)
def _exit(S, i, W):
    if S[i, LEADER] == LDR:
        S[i, ROLE] = SET
        S[i, RANK] = 1
    else:
        S[i, ROLE] = UNS
        S[i, WAIT] = W
    S[i, LEADER] = 0
    S[i, RC] = 0
    S[i, MASK] = 0
    S[i, TIMER] = 0


@numba.njit(cache=True)
def _infect(S, i, c):
    S[i, ROLE] = RES
    S[i, LEADER] = 0
    S[i, RC] = c
    S[i, WAIT] = 0
    S[i, RANK] = 1
    S[i, MASK] = 0
    S[i, TIMER] = 0


@numba.njit(cache=True)
def _try_assign(S, p, c, n):
    """Settled ``p`` hands its smallest free child rank to Unsettled ``c``."""
    k = S[p, RANK]
    m = S[p, MASK]
    child = 0
    bit = 0
    if 2 * k <= n and (m & 1) == 0:
        child = 2 * k
        bit = 1
    elif 2 * k + 1 <= n and (m & 2) == 0:
        child = 2 * k + 1
        bit = 2
    if child == 0:
        return False
    S[p, MASK] = m | bit
    S[c, ROLE] = SET
    S[c, RANK] = child
    S[c, MASK] = 0
    S[c, WAIT] = 0
    S[c, TIMER] = 0
    return True


@numba.njit(cache=True)
def _timeout(S, i, R):
    w = S[i, WAIT] - 1
    if w < 0:
        w = 0
    if w == 0:
        _trigger(S, i, R)
        return True
    S[i, WAIT] = w
    return False


@numba.njit(cache=True)
def interact(S, X, u, v, n, R, W, T, mid, old):
    """Apply one interaction in place. ``old`` is a (2, 8) scratch array.

    Returns bit flags: 1 = a reset was triggered, 2 = ``u`` changed,
    4 = ``v`` changed.
    """
    for c in range(8):
        old[0, c] = S[u, c]
        old[1, c] = S[v, c]
    pr0 = S[u, ROLE]
    pr1 = S[v, ROLE]
    trig = 0

    # ranking layer
    if pr0 == SET and pr1 == SET:
        if S[u, RANK] == S[v, RANK]:
            _trigger(S, u, R)
            _trigger(S, v, R)
            trig = 1
    elif pr0 == RES or pr1 == RES:
        if pr0 == RES and pr1 == RES:
            c = max(S[u, RC], S[v, RC]) - 1
            if c < 0:
                c = 0
            S[u, RC] = c
            S[v, RC] = c
            if S[u, LEADER] == LDR and S[v, LEADER] == LDR:
                S[v, LEADER] = 0
        elif pr0 == RES:
            c = S[u, RC] - 1
            if c < 0:
                c = 0
            if S[u, RC] > R // 2:
                _infect(S, v, c)
            S[u, RC] = c
        else:
            c = S[v, RC] - 1
            if c < 0:
                c = 0
            if S[v, RC] > R // 2:
                _infect(S, u, c)
            S[v, RC] = c
        if S[u, ROLE] == RES and S[u, RC] == 0:
            _exit(S, u, W)
        if S[v, ROLE] == RES and S[v, RC] == 0:
            _exit(S, v, W)
    else:
        ranked0 = False
        ranked1 = False
        if pr0 == SET and pr1 == UNS:
            ranked1 = _try_assign(S, u, v, n)
        elif pr1 == SET and pr0 == UNS:
            ranked0 = _try_assign(S, v, u, n)
        if S[u, ROLE] == UNS and not ranked0:
            if _timeout(S, u, R):
                trig = 1
        if S[v, ROLE] == UNS and not ranked1:
            if _timeout(S, v, R):
                trig = 1

    # majority layer
    r0 = S[u, ROLE]
    r1 = S[v, ROLE]
    if r0 == RES and pr0 != RES:
        S[u, ANS] = PHI
    if r1 == RES and pr1 != RES:
        S[v, ANS] = PHI
    if r0 == SET and pr0 != SET and S[u, RANK] == mid:
        S[u, TIMER] = T
    if r1 == SET and pr1 != SET and S[v, RANK] == mid:
        S[v, TIMER] = T

    if r0 == RES and r1 == RES:
        if S[u, ANS] == PHI and S[v, ANS] != PHI:
            S[u, ANS] = S[v, ANS]
        elif S[v, ANS] == PHI and S[u, ANS] != PHI:
            S[v, ANS] = S[u, ANS]

    if r0 == SET and r1 == SET:
        x0 = X[u]
        x1 = X[v]
        if S[u, RANK] < S[v, RANK] and x0 == 1 and x1 == 0:
            for c in range(8):
                tmp = S[u, c]
                S[u, c] = S[v, c]
                S[v, c] = tmp
        k0 = S[u, RANK]
        k1 = S[v, RANK]
        if n % 2 == 0:
            h = n // 2
            if (k0 == h and k1 == h + 1) or (k0 == h + 1 and k1 == h):
                if x0 == x1:
                    S[u, ANS] = x0 + 2
                    S[v, ANS] = x0 + 2
                else:
                    S[u, ANS] = TIE
                    S[v, ANS] = TIE
        else:
            if k0 == mid:
                S[u, ANS] = x0 + 2
            elif k1 == mid:
                S[v, ANS] = x1 + 2
        i = -1
        j = -1
        if k0 == mid:
            i = u
            j = v
        elif k1 == mid:
            i = v
            j = u
        if i >= 0:
            if S[j, RANK] == n and S[i, TIMER] > 0:
                S[i, TIMER] -= 1
            if S[i, TIMER] == 0 and S[i, ANS] != S[j, ANS]:
                S[j, ANS] = S[i, ANS]
                _trigger(S, u, R)
                _trigger(S, v, R)
                trig = 1

    flags = trig
    for c in range(8):
        if S[u, c] != old[0, c]:
            flags |= 2
            break
    for c in range(8):
        if S[v, c] != old[1, c]:
            flags |= 4
            break
    return flags


@numba.njit(cache=True)
def state_index(S, i, n, R, W, T, mid):
    role = S[i, ROLE]
    ans = S[i, ANS]
    if role == RES:
        return (S[i, LEADER] * (R + 1) + S[i, RC]) * 4 + ans
    b_uns = 8 * (R + 1)
    if role == UNS:
        return b_uns + S[i, WAIT] * 4 + ans
    b_set = b_uns + 4 * (W + 1)
    rank = S[i, RANK]
    if rank == mid:
        return b_set + 16 * (n - 1) + (S[i, MASK] * 4 + ans) * (T + 1) + S[i, TIMER]
    r = rank - 1 if rank < mid else rank - 2
    return b_set + (r * 4 + S[i, MASK]) * 4 + ans


@numba.njit(cache=True)
def _account(role, rank, ans, x, i, sign, ctr, rank_cnt, rank_idx, want, num_a):
    if role == SET:
        ctr[C_SETTLED] += sign
        before = rank_cnt[rank]
        after = before + sign
        if before == 1:
            ctr[C_SINGLE] -= 1
        if after == 1:
            ctr[C_SINGLE] += 1
        rank_cnt[rank] = after
        rank_idx[rank] += sign * i
        if x == 0 and rank <= num_a:
            ctr[C_ALOW] += sign
    if ans == want:
        ctr[C_CORRECT] += sign


@numba.njit(cache=True)
def init_counters(S, X, n, want, num_a, ctr, rank_cnt, rank_idx):
    for i in range(n):
        _account(S[i, ROLE], S[i, RANK], S[i, ANS], X[i], i, 1, ctr, rank_cnt, rank_idx, want, num_a)


@numba.njit(cache=True)
def check_phases(S, t, n, mid, want, num_a, ctr, rank_idx, phase_t):
    """Record first hits of the phase predicates at step ``t``; True when silent."""
    if ctr[C_SETTLED] != n or ctr[C_SINGLE] != n:
        return False
    if phase_t[P_RANK] < 0:
        phase_t[P_RANK] = t
    m = rank_idx[mid]
    timer = S[m, TIMER]
    if timer >= TSWAP_TIMER and phase_t[P_TSWAP] < 0:
        phase_t[P_TSWAP] = t
    if ctr[C_ALOW] != num_a:
        return False
    if S[m, ANS] == want and phase_t[P_DEC] < 0:
        phase_t[P_DEC] = t
    if ctr[C_CORRECT] != n:
        return False
    if phase_t[P_TIM] < 0:
        phase_t[P_TIM] = t
    if timer != 0:
        return False
    if phase_t[P_EM] < 0:
        phase_t[P_EM] = t
    return True


@numba.njit(cache=True)
def run_block(S, X, us, vs, t0, budget, n, R, W, T, mid, want, num_a,
              ctr, rank_cnt, rank_idx, phase_t, watch, stop_on_watch, census):
    """Apply up to ``budget`` pairs from ``us``/``vs``.

    Returns ``(consumed, status)`` with status 0 = budget/block exhausted,
    1 = silent, 2 = watched agent changed and ``stop_on_watch`` is set.
    """
    old = np.empty((2, 8), dtype=np.int64)
    use_census = census.shape[0] > 0
    m = min(budget, us.shape[0])
    for j in range(m):
        u = us[j]
        v = vs[j]
        t = t0 + j + 1
        flags = interact(S, X, u, v, n, R, W, T, mid, old)
        if flags & 1:
            ctr[C_RESETS] += 1
        if flags & 6:
            # counters follow the pre/post rows of both agents
            _account(old[0, ROLE], old[0, RANK], old[0, ANS], X[u], u, -1, ctr, rank_cnt, rank_idx, want, num_a)
            _account(old[1, ROLE], old[1, RANK], old[1, ANS], X[v], v, -1, ctr, rank_cnt, rank_idx, want, num_a)
            _account(S[u, ROLE], S[u, RANK], S[u, ANS], X[u], u, 1, ctr, rank_cnt, rank_idx, want, num_a)
            _account(S[v, ROLE], S[v, RANK], S[v, ANS], X[v], v, 1, ctr, rank_cnt, rank_idx, want, num_a)
            if use_census:
                census[state_index(S, u, n, R, W, T, mid)] = 1
                census[state_index(S, v, n, R, W, T, mid)] = 1
            if watch >= 0 and ctr[C_WATCH] < 0:
                if (u == watch and flags & 2) or (v == watch and flags & 4):
                    ctr[C_WATCH] = t
                    if stop_on_watch:
                        check_phases(S, t, n, mid, want, num_a, ctr, rank_idx, phase_t)
                        return j + 1, 2
            if check_phases(S, t, n, mid, want, num_a, ctr, rank_idx, phase_t):
                return j + 1, 1
    return m, 0


# --- conversions ----------------------------------------------------------

def to_arrays(config: Configuration) -> tuple[np.ndarray, np.ndarray]:
    S = np.array(
        [
            (int(s.role), int(s.leader), s.resetcount, s.waitcount, s.rank, s.childmask, int(s.answer), s.timer)
            for s in config.states
        ],
        dtype=np.int64,
    ).reshape(-1, 8)
    X = np.array([int(x) for x in config.inputs], dtype=np.int64)
    return S, X


def from_arrays(S: np.ndarray, X: np.ndarray) -> Configuration:
    states = tuple(
        AgentState(
            Role(int(r[ROLE])),
            leader=Leader(int(r[LEADER])),
            resetcount=int(r[RC]),
            waitcount=int(r[WAIT]),
            rank=int(r[RANK]),
            childmask=int(r[MASK]),
            answer=Answer(int(r[ANS])),
            timer=int(r[TIMER]),
        )
        for r in S
    )
    return Configuration(tuple(Input(int(x)) for x in X), states)


@dataclass
class FastResult:
    config: Configuration
    interactions: int
    silence_index: Optional[int]
    resets: int
    phase_times: dict = field(default_factory=dict)
    watch_index: Optional[int] = None
    census: Optional[np.ndarray] = None


def run_arrays(S, X, params: Params, scheduler, max_interactions: int, watch: int = -1,
               stop_on_watch: bool = False, census: bool = False):
    """Drive :func:`run_block` over scheduler blocks; mutates ``S`` in place."""
    n = params.n
    want = int(majority_answer([Input(int(x)) for x in X]))
    num_a = int(np.sum(X == 0))
    ctr = np.zeros(6, dtype=np.int64)
    ctr[C_WATCH] = -1
    rank_cnt = np.zeros(n + 2, dtype=np.int64)
    rank_idx = np.zeros(n + 2, dtype=np.int64)
    phase_t = np.full(len(PHASES), -1, dtype=np.int64)
    init_counters(S, X, n, want, num_a, ctr, rank_cnt, rank_idx)
    if census:
        from .statespace import state_count

        bitmap = np.zeros(state_count(params), dtype=np.uint8)
        for i in range(n):
            bitmap[state_index(S, i, n, params.r_max, params.w_max, params.timer_max, params.mid)] = 1
    else:
        bitmap = np.zeros(0, dtype=np.uint8)

    t = 0
    status = 1 if check_phases(S, 0, n, params.mid, want, num_a, ctr, rank_idx, phase_t) else 0
    while status == 0 and t < max_interactions:
        us, vs = scheduler.peek_block()
        if len(us) == 0:
            break
        used, status = run_block(
            S, X, us, vs, t, max_interactions - t, n, params.r_max, params.w_max,
            params.timer_max, params.mid, want, num_a, ctr, rank_cnt, rank_idx, phase_t,
            watch, stop_on_watch, bitmap,
        )
        scheduler.advance(used)
        t += used
    silence = t if status == 1 else None
    phases = {name: (int(v) if v >= 0 else None) for name, v in zip(PHASES, phase_t)}
    watch_t = int(ctr[C_WATCH]) if ctr[C_WATCH] >= 0 else None
    visited = np.flatnonzero(bitmap) if census else None
    return t, silence, int(ctr[C_RESETS]), phases, watch_t, visited


def run_fast(config: Configuration, params: Params, scheduler, max_interactions: int,
             watch: Optional[int] = None, stop_on_watch: bool = False,
             census: bool = False) -> FastResult:
    if config.n != params.n:
        raise ValueError("configuration size does not match params.n")
    S, X = to_arrays(config)
    t, silence, resets, phases, watch_t, visited = run_arrays(
        S, X, params, scheduler, max_interactions,
        watch=-1 if watch is None else watch, stop_on_watch=stop_on_watch, census=census,
    )
    return FastResult(from_arrays(S, X), t, silence, resets, phases, watch_t, visited)
