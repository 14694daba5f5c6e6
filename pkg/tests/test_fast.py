"""The compiled kernel must reproduce the reference transition exactly."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from popmaj.engine import ScriptedScheduler, delta, step
from popmaj.fast import PHASES, from_arrays, interact, run_fast, to_arrays
from popmaj.majority import is_silent_shape, phase
from popmaj.model import AgentState, Configuration, Input, Params
from popmaj.statespace import state_count, state_from_index, state_index

from .conftest import configurations, pair_streams, small_params, states

PHASE_FIELDS = {"S_rank": "in_S_rank", "T_swap": "in_T_swap", "S_dec": "in_S_dec", "S_tim": "in_S_tim", "S_em": "in_S_em"}


@settings(max_examples=3000)
@given(data=st.data())
def test_single_interaction_matches_reference(data):
    p = data.draw(small_params(n_min=2, n_max=9))
    s0, s1 = data.draw(states(p)), data.draw(states(p))
    x0, x1 = data.draw(st.sampled_from(list(Input))), data.draw(st.sampled_from(list(Input)))
    cfg = Configuration((x0, x1) + (Input.A,) * (p.n - 2), (s0, s1) + (s0,) * (p.n - 2))
    S, X = to_arrays(cfg)
    interact(S, X, 0, 1, p.n, p.r_max, p.w_max, p.timer_max, p.mid, np.empty((2, 8), np.int64))
    got = from_arrays(S, X).states[:2]
    assert got == delta((s0, x0), (s1, x1), p)


def _reference_trace(cfg, pairs, p):
    first = {k: None for k in PHASES}
    seen = {state_index(s, p) for s in cfg.states}

    def note(c, t):
        ph = phase(c, p)
        for k, f in PHASE_FIELDS.items():
            if first[k] is None and getattr(ph, f):
                first[k] = t

    note(cfg, 0)
    if is_silent_shape(cfg, p):
        return cfg, 0, first, seen
    for t, pair in enumerate(pairs, start=1):
        cfg = step(cfg, pair, p)
        seen.update(state_index(s, p) for s in cfg.states)
        note(cfg, t)
        if is_silent_shape(cfg, p):
            return cfg, t, first, seen
    return cfg, None, first, seen


@settings(max_examples=300)
@given(data=st.data())
def test_runs_phase_hits_and_census_match_reference(data):
    p = data.draw(small_params(n_min=2, n_max=6))
    cfg = data.draw(configurations(p))
    pairs = data.draw(pair_streams(p.n, 300))
    ref_cfg, ref_silence, ref_first, ref_seen = _reference_trace(cfg, pairs, p)
    res = run_fast(cfg, p, ScriptedScheduler(pairs), len(pairs), census=True)
    assert res.config == ref_cfg
    assert res.silence_index == ref_silence
    assert res.phase_times == ref_first
    assert set(res.census.tolist()) == ref_seen


@settings(max_examples=50)
@given(n=st.integers(4, 12), seed=st.integers(0, 10**6))
def test_default_params_long_runs_match(n, seed):
    p = Params(n=n)
    rng = np.random.default_rng(seed)
    cfg = Configuration(
        tuple(Input(int(x)) for x in rng.integers(0, 2, n)),
        tuple(state_from_index(int(i), p) for i in rng.integers(0, state_count(p), n)),
    )
    k = rng.integers(0, n * (n - 1), 4000)
    u, v = np.divmod(k, n - 1)
    pairs = list(zip(u.tolist(), (v + (v >= u)).tolist()))
    ref_cfg, ref_silence, ref_first, _ = _reference_trace(cfg, pairs, p)
    res = run_fast(cfg, p, ScriptedScheduler(pairs), len(pairs))
    assert (res.config, res.silence_index, res.phase_times) == (ref_cfg, ref_silence, ref_first)


def test_watch_stops_at_first_change():
    p = Params(n=6)
    cfg = Configuration((Input.A,) * 6, (AgentState.unsettled(p.w_max),) * 6)
    pairs = [(1, 2), (3, 4), (0, 5), (0, 1)]
    res = run_fast(cfg, p, ScriptedScheduler(pairs), 10, watch=0, stop_on_watch=True)
    assert res.watch_index == 3 and res.interactions == 3
