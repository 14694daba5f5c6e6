import itertools

import pytest

from popmaj.model import AgentState, Answer, Leader, Params, Role, canonical
from popmaj.statespace import all_states, state_count, state_from_index, state_index
from popmaj.verifier import VerifierCaps, enumerate_states

# Canonical-state counts from brute force over the raw field product
# (every role x leader x counters x rank x mask x answer x timer, then canonicalized).
BRUTE_COUNTS = {
    (2, 1, 1, 1): 72,
    (3, 1, 1, 1): 88,
    (4, 1, 1, 1): 104,
    (2, 2, 2, 2): 100,
    (5, 3, 2, 4): 188,
}


def brute_force(n, r, w, t):
    p = Params.capped(n, r, w, t)
    raw = itertools.product(Role, Leader, range(r + 1), range(w + 1), range(1, n + 1), range(4), Answer, range(t + 1))
    return {canonical(AgentState(*fields), p) for fields in raw}


@pytest.mark.parametrize("key,count", BRUTE_COUNTS.items())
def test_enumeration_matches_frozen_counts(key, count):
    n, r, w, t = key
    states = enumerate_states(n, VerifierCaps(r, w, t))
    assert len(states) == len(set(states)) == count
    assert state_count(Params.capped(n, r, w, t)) == count


def test_enumeration_equals_brute_force_set():
    assert set(enumerate_states(3, VerifierCaps(2, 1, 2))) == brute_force(3, 2, 1, 2)


def test_index_roundtrip():
    p = Params.capped(7, 3, 4, 5)
    for i, s in enumerate(all_states(p)):
        assert state_index(s, p) == i
        assert state_from_index(i, p) == s
    with pytest.raises(IndexError):
        state_from_index(state_count(p), p)


def test_doubling_n_grows_only_settled_block():
    caps = VerifierCaps(2, 2, 2)
    a, b = len(enumerate_states(8, caps)), len(enumerate_states(16, caps))
    assert b - a == 16 * 8


def test_cap_increase_is_monotone():
    small = set(enumerate_states(3, VerifierCaps(1, 1, 1)))
    big = set(enumerate_states(3, VerifierCaps(2, 2, 2)))
    assert small < big
