import os

import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from popmaj.model import Configuration, Input, Params
from popmaj.statespace import state_count, state_from_index

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", parent=settings.get_profile("default"), max_examples=1000)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def small_params(draw, n_min=2, n_max=8):
    """Params with small counters so every branch is reachable in a few steps."""
    n = draw(st.integers(n_min, n_max))
    return Params.capped(
        n,
        r_max=draw(st.integers(1, 6)),
        w_max=draw(st.integers(1, 6)),
        timer_max=draw(st.integers(1, 6)),
    )


@st.composite
def states(draw, params):
    return state_from_index(draw(st.integers(0, state_count(params) - 1)), params)


@st.composite
def configurations(draw, params):
    n = params.n
    inputs = draw(st.lists(st.sampled_from(list(Input)), min_size=n, max_size=n))
    sts = draw(st.lists(states(params), min_size=n, max_size=n))
    return Configuration(tuple(inputs), tuple(sts))


@st.composite
def pair_streams(draw, n, max_len=200):
    k = draw(st.integers(1, max_len))
    seq = []
    for _ in range(k):
        u = draw(st.integers(0, n - 1))
        v = draw(st.integers(0, n - 2))
        seq.append((u, v + (v >= u)))
    return seq


def rng(seed=0):
    return np.random.default_rng(seed)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
