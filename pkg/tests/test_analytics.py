from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings

from oppsched import Schedule, evaluate, expected_finish_time, expected_reward, success_coefficients, time_curves
from oppsched.analytics import curves_to_csv
from oppsched.errors import InvalidSchedule, NegativeEta, NegativeTime, UnsupportedDistribution

from .conftest import SIGMA0_ONE_BASED, SIGMA05_ONE_BASED, instance_and_schedule, make_instance, outcome_oracle


def test_coefficients_single_certain():
    inst = make_instance([(5, 1.0, 3)])
    c = success_coefficients(inst, Schedule.identity(1))
    assert c.c == (1.0, 0.0)


def test_coefficients_hand(hand2):
    c = success_coefficients(hand2, Schedule.identity(2))
    assert c.c == (0.5, 0.25, 0.25)


def test_coefficients_table1_normalized(table1):
    c = success_coefficients(table1, Schedule.identity(5))
    assert abs(sum(c.c) - 1.0) <= 1e-12


def test_schedule_length_mismatch(table1):
    with pytest.raises(InvalidSchedule):
        success_coefficients(table1, Schedule.identity(4))
    with pytest.raises(InvalidSchedule):
        expected_reward(table1, Schedule.identity(6))


def test_reward_and_time_single():
    inst = make_instance([(5, 1.0, 3)])
    assert expected_reward(inst, Schedule.identity(1)) == 5.0
    assert expected_finish_time(inst, Schedule.identity(1)) == 3.0
    inst = make_instance([(5, 0.3, 3)])
    assert expected_finish_time(inst, Schedule.identity(1)) == pytest.approx(3.0, abs=1e-12)


def test_reward_and_time_hand(hand2):
    # 0.5*1 + 0.25*2 and 0.25*3 + 0.5*1 + 0.25*3
    s = Schedule.identity(2)
    assert expected_reward(hand2, s) == 1.0
    assert expected_finish_time(hand2, s) == 2.0


def test_evaluate(hand2):
    ev = evaluate(hand2, Schedule.identity(2), 0.5)
    assert ev.objective == 0.0
    ev0 = evaluate(hand2, Schedule.identity(2), 0.0)
    assert ev0.objective == ev0.expected_reward
    with pytest.raises(NegativeEta):
        evaluate(hand2, Schedule.identity(2), -0.1)
    with pytest.raises(NegativeEta):
        evaluate(hand2, Schedule.identity(2), float("nan"))


def test_random20_reward_descending(random20):
    sched = Schedule.from_one_based(SIGMA0_ONE_BASED)
    assert expected_reward(random20, sched) == pytest.approx(27.928, abs=5e-3)


def test_random20_sigma0_time_against_independent_route(random20):
    # T as sum over positions of mean time times probability the position is reached
    sched = Schedule.from_one_based(SIGMA0_ONE_BASED)
    reach, alt = 1.0, 0.0
    for k in sched.order:
        alt += reach * random20[k].mean_response_time
        reach *= 1 - random20[k].success_prob
    assert expected_finish_time(random20, sched) == pytest.approx(alt, rel=1e-12)
    assert expected_finish_time(random20, sched) == pytest.approx(62.9291355, abs=1e-6)


def test_random20_published_time_matches_other_tie_order(random20):
    # 63.91 is reproduced by the same reward order with opportunity 1 before 12 and 13 before 11
    seq = list(SIGMA0_ONE_BASED)
    for a, b in ((12, 1), (11, 13)):
        i, j = seq.index(a), seq.index(b)
        seq[i], seq[j] = seq[j], seq[i]
    sched = Schedule.from_one_based(seq)
    assert expected_reward(random20, sched) == pytest.approx(27.928, abs=5e-3)
    assert expected_finish_time(random20, sched) == pytest.approx(63.91, abs=5e-2)


def test_random20_sigma05(random20):
    ev = evaluate(random20, Schedule.from_one_based(SIGMA05_ONE_BASED), 0.5)
    assert ev.expected_reward == pytest.approx(24.08, abs=5e-2)
    assert ev.expected_finish_time == pytest.approx(11.84, abs=5e-2)


@settings(max_examples=200)
@given(instance_and_schedule(max_n=7))
def test_matches_outcome_enumeration(pair):
    inst, sched = pair
    r_bar, t_bar, _ = outcome_oracle(inst, sched)
    assert expected_reward(inst, sched) == pytest.approx(r_bar, rel=1e-10, abs=1e-10)
    assert expected_finish_time(inst, sched) == pytest.approx(t_bar, rel=1e-10)


@settings(max_examples=300)
@given(instance_and_schedule(max_n=10))
def test_normalization_and_bounds(pair):
    inst, sched = pair
    c = success_coefficients(inst, sched)
    assert all(0.0 <= x <= 1.0 for x in c.c)
    assert abs(sum(c.c) - 1.0) <= 1e-12
    r_bar = expected_reward(inst, sched)
    t_bar = expected_finish_time(inst, sched)
    assert 0.0 <= r_bar <= max(inst.rewards) * (1 + 1e-12)
    prefix = np.cumsum([inst[k].mean_response_time for k in sched.order])
    assert sum(ci * s for ci, s in zip(c.first_success, prefix)) <= t_bar * (1 + 1e-12)
    assert inst[sched.order[0]].mean_response_time <= t_bar * (1 + 1e-12)
    assert t_bar <= sum(inst.mean_times) * (1 + 1e-12)


@given(instance_and_schedule(max_n=8))
def test_distribution_independence(pair):
    inst, sched = pair
    det, exp = inst.with_distribution("det"), inst.with_distribution("exp")
    assert expected_reward(det, sched) == expected_reward(exp, sched)
    assert expected_finish_time(det, sched) == expected_finish_time(exp, sched)


def test_time_curves_hand(hand2):
    pts = time_curves(hand2, Schedule.identity(2), [0.0, 0.5, 1.0, 2.0, 3.0, 10.0])
    got = [(p.expected_reward, p.finish_cdf) for p in pts]
    assert got == [(0, 0), (0, 0), (0.5, 0.5), (0.5, 0.5), (1.0, 1.0), (1.0, 1.0)]
    assert pts[2].absorb_probs == (0.5, 0.0)
    assert pts[2].zero_reward_prob == 0.5
    assert pts[4].zero_reward_prob == 0.25


def test_time_curves_errors(hand2, table1):
    with pytest.raises(UnsupportedDistribution):
        time_curves(table1, Schedule.identity(5), [1.0])
    with pytest.raises(NegativeTime):
        time_curves(hand2, Schedule.identity(2), [-1.0])


@settings(max_examples=100)
@given(instance_and_schedule(max_n=6, dist=__import__("hypothesis").strategies.just("det")))
def test_time_curves_properties(pair):
    inst, sched = pair
    total = sum(inst.mean_times)
    ts = sorted(set(np.linspace(0, total, 25).tolist()) | {total * 2})
    pts = time_curves(inst, sched, ts)
    _, _, atoms = outcome_oracle(inst, sched)
    prev_r, prev_f = -1.0, -1.0
    for p in pts:
        assert 0.0 <= p.finish_cdf <= 1.0
        assert p.expected_reward >= prev_r - 1e-12 and p.finish_cdf >= prev_f - 1e-12
        prev_r, prev_f = p.expected_reward, p.finish_cdf
        rewards = [inst[k].reward for k in sched.order]
        assert p.expected_reward == pytest.approx(sum(r * a for r, a in zip(rewards, p.absorb_probs)), abs=1e-12)
        assert p.zero_reward_prob == pytest.approx(1 - sum(p.absorb_probs), abs=1e-12)
        # oracle: the finish time is a prefix sum of mean times; tolerance covers summation-order ulps
        oracle_cdf = sum(prob for finish, _, prob in atoms if finish <= p.t * (1 + 1e-12))
        if all(abs(finish - p.t) > 1e-9 * max(1.0, p.t) for finish, _, _ in atoms):
            assert p.finish_cdf == pytest.approx(oracle_cdf, abs=1e-12)
    # total mean time accumulated along the schedule, as the prefix sums are
    along = 0.0
    for k in sched.order:
        along += inst[k].mean_response_time
    last = time_curves(inst, sched, [along])[0]
    assert last.expected_reward == expected_reward(inst, sched)
    assert abs(last.finish_cdf - 1.0) <= 1e-12


def test_curves_csv(hand2):
    text = curves_to_csv(time_curves(hand2, Schedule.identity(2), [0.0, 3.0]))
    lines = text.splitlines()
    assert lines[0] == "t,expected_reward,finish_cdf,zero_reward_prob"
    assert lines[2] == "3.0,1.0,1.0,0.25"
