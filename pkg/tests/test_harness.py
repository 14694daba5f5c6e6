import math

import numpy as np
import pytest

from popmaj.engine import is_silent, majority_oracle, outputs, save_config
from popmaj.harness import (
    CSV_COLUMNS,
    InitKind,
    SweepSpec,
    TraceMetrics,
    build,
    default_max_interactions,
    derive_seed,
    generate,
    num_a_policy,
    rows_to_csv,
    run_trial,
    silent_config,
    summarize,
    sweep,
)
from popmaj.majority import is_silent_shape
from popmaj.model import AgentState, Input, Opinion, Params, Role
from popmaj.statespace import state_count


def test_policies_and_budget():
    assert num_a_policy(5) == [0, 1, 2, 3, 4, 5]
    assert num_a_policy(16) == [0, 1, 7, 8, 15, 16]
    assert num_a_policy(17) == [0, 1, 7, 8, 9, 16, 17]
    assert default_max_interactions(10) == int(200 * 100 * math.log(11))


def test_all_unsettled_and_duplicate_ranks():
    p = Params(n=8)
    c = generate("all_unsettled", 8, 3, 0, p)
    assert all(s == AgentState.unsettled(p.w_max) for s in c.states)
    assert sum(x is Input.A for x in c.inputs) == 3
    d = generate(InitKind.DUPLICATE_RANKS, 4, 2, 0, Params(n=4))
    assert [s.rank for s in d.states] == [1] * 4 and all(s.role is Role.SETTLED for s in d.states)


def test_lb_flip_construction():
    p = Params(n=5)
    c, u = build("lb_flip", 5, 2, 7, p)
    assert sum(x is Input.A for x in c.inputs) == 3
    assert majority_oracle(c.inputs) is Opinion.A
    assert set(outputs(c)) == {Opinion.B}
    assert c.inputs[u] is Input.A
    twins = [i for i in range(5) if i != u and c.states[i] == c.states[u]]
    assert len(twins) == 1 and c.inputs[twins[0]] is Input.A
    with pytest.raises(ValueError):
        generate("lb_flip", 6, 3, 0, Params(n=6))
    with pytest.raises(ValueError):
        generate("lb_flip", 5, 0, 0, p)


def test_wrong_answers_and_mid_reset_shapes():
    p = Params(n=9)
    c = generate("wrong_answers", 9, 6, 1, p)
    assert all(s.role is Role.SETTLED for s in c.states)
    assert all(s.answer.name == "B" for s in c.states)
    m = generate("mid_reset", 9, 6, 1, p)
    assert sum(s.role is Role.RESETTING for s in m.states) == 5


def test_uniform_states_are_canonical_and_spread():
    p = Params(n=64)
    c = generate("uniform_random_state", 64, 30, 3, p)
    assert len({s.role for s in c.states}) == 3


def test_invalid_arguments():
    p = Params(n=4)
    with pytest.raises(ValueError):
        generate("all_unsettled", 4, 5, 0, p)
    with pytest.raises(ValueError):
        generate("from_file", 4, 0, 0, p)
    with pytest.raises(ValueError):
        generate("nonsense", 4, 0, 0, p)


def test_from_file(tmp_path):
    p = Params(n=6)
    c = silent_config((Input.A, Input.B) * 3, p, np.random.default_rng(0))
    save_config(c, tmp_path / "s.txt")
    m = run_trial("from_file", 6, 0, 0, p, path=tmp_path / "s.txt")
    assert m.interactions == 0 and m.parallel_time == 0 and m.correct and m.num_A == 3


def test_wrong_answers_needs_a_reset():
    m = run_trial("wrong_answers", 16, 5, 4)
    assert m.resets >= 1 and m.correct and m.interactions is not None


def test_trial_determinism_and_phase_order():
    a = run_trial("all_unsettled", 12, 5, 99)
    assert a == run_trial("all_unsettled", 12, 5, 99)
    t = a.phase_times
    assert t["S_rank"] <= t["S_dec"] <= t["S_tim"] <= t["S_em"] == a.interactions


def test_overflow_marker():
    m = run_trial("all_unsettled", 10, 5, 1, max_interactions=100)
    assert m.overflow and m.parallel_time is None and m.row()["interactions"] == ""


def test_sweep_rows_are_canonical_and_reproducible():
    spec = SweepSpec(n_values=(16, 8), kinds=("all_unsettled",), trials=3, num_a=(4,), base_seed=5)
    r1 = sweep(spec)
    assert [(m.n, m.trial) for m in r1.rows] == [(8, 0), (8, 1), (8, 2), (16, 0), (16, 1), (16, 2)]
    assert r1.to_csv() == sweep(spec).to_csv()
    assert r1.to_csv().splitlines()[0] == ",".join(CSV_COLUMNS)


def test_sweep_worker_count_does_not_change_output():
    spec = SweepSpec(n_values=(5, 6), kinds=("duplicate_ranks", "lb_flip"), trials=2, base_seed=1)
    assert sweep(spec, workers=1).to_csv() == sweep(spec, workers=2).to_csv()


def test_derived_seeds_differ_by_coordinate():
    seeds = {derive_seed(0, n, k, 1, t) for n in (8, 9) for k in ("all_unsettled", "lb_flip") for t in range(3)}
    assert len(seeds) == 12
    assert derive_seed(0, 8, "lb_flip", 1, 0) == derive_seed(0, 8, InitKind.LB_FLIP, 1, 0)


def _row(n, t, correct=True):
    return TraceMetrics(n, 0, 0, 0, "all_unsettled", int(t * n), t, 0, {}, correct)


def test_summarize():
    rows = [_row(n, 7.5 * n) for n in (10, 20, 40) for _ in range(3)]
    s = summarize(rows)
    assert s.slope == pytest.approx(7.5) and s.intercept == pytest.approx(0, abs=1e-9)
    assert all(g.correct_fraction == 1.0 and g.ci95[0] == g.ci95[1] == g.mean for g in s.groups)
    s2 = summarize([_row(10, 1.0), _row(10, 3.0, correct=False)])
    g = s2.groups[0]
    assert g.correct_fraction == 0.5 and g.mean == 2.0 and g.max == 3.0
    assert g.ci95 == pytest.approx((2 - 1.96 * math.sqrt(2) / math.sqrt(2), 2 + 1.96))
    with pytest.raises(ValueError):
        summarize([])


def test_census_is_within_state_space():
    spec = SweepSpec(n_values=(8,), trials=1, base_seed=3)
    res = sweep(spec)
    ids = res.census[8]
    assert len(ids) <= state_count(Params(n=8))
    assert ids.min() >= 0 and ids.max() < state_count(Params(n=8))
    assert summarize(res.rows, res.census).census == {8: len(ids)}
