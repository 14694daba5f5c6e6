import math

import pytest

from popmaj.model import (
    AgentState,
    Answer,
    Configuration,
    Input,
    Leader,
    Params,
    Role,
    canonical,
    check_state,
    parse_inputs,
)


def test_default_counters():
    p = Params(n=100)
    assert p.r_max == math.ceil(60 * math.log(100))
    assert p.w_max == p.r_max + 400
    assert p.timer_max == 7 * (16 + 4) == 140
    assert p.mid == 50
    assert Params(n=7).mid == 4


def test_overrides_and_validation():
    p = Params(n=5, r_max=3, w_max=2, timer_max=4)
    assert (p.r_max, p.w_max, p.timer_max) == (3, 2, 4)
    with pytest.raises(ValueError):
        Params(n=1)
    with pytest.raises(ValueError):
        Params(n=4, r_max=0)
    with pytest.raises(ValueError):
        Params(n=4, t_rank=0)
    with pytest.raises(ValueError):
        Params(n=4, seed=2**64)


def test_canonical_zeroes_unused_fields():
    p = Params.capped(4, 3, 3, 3)
    s = AgentState(Role.SETTLED, leader=Leader.L, resetcount=2, waitcount=1, rank=3, childmask=1, answer=Answer.A, timer=2)
    assert canonical(s, p) == AgentState.settled(3, 1, Answer.A)
    mid = s.with_(rank=2)
    assert canonical(mid, p).timer == 2
    r = AgentState(Role.RESETTING, leader=Leader.L, resetcount=2, rank=4, childmask=3, timer=1)
    assert canonical(r, p) == AgentState.resetting(Leader.L, 2)


def test_check_state_rejects_corrupt_values():
    p = Params.capped(4, 3, 3, 3)
    check_state(AgentState.settled(4, 3, Answer.B), p)
    for bad in (
        AgentState.resetting(Leader.L, 4),
        AgentState.unsettled(5),
        AgentState.settled(5),
        AgentState.settled(2, timer=9),
        AgentState.settled(1, childmask=4),
        AgentState.settled(1, timer=1),  # timer off the median rank
    ):
        with pytest.raises(ValueError):
            check_state(bad, p)


def test_configuration_and_inputs():
    c = Configuration(parse_inputs("AB"), (AgentState.unsettled(1),) * 2)
    assert c.n == 2 and c.inputs == (Input.A, Input.B)
    c2 = c.replace_states({1: AgentState.settled(1)})
    assert c.states[1].role is Role.UNSETTLED and c2.states[1].role is Role.SETTLED
    with pytest.raises(ValueError):
        Configuration((Input.A,), ())
    assert parse_inputs(["a", "B"]) == (Input.A, Input.B)
