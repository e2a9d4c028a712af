from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete, make_instance
from reference import exhaustive_opt, replay
from roldarp.adversary import Fig1Params, gen_fig1
from roldarp.core import RoldarpError, validate_schedule
from roldarp.generate import random_instance
from roldarp.oracle import DEFAULT_CAP, optimal_offline, search_cap
from roldarp.sbp import run_sbp


def test_single_request_reachable_and_unreachable():
    inst = make_instance({("o", "a"): 2}, [("o", "a", 3, 5)], T=12, f=4)
    assert optimal_offline(inst).revenue == 5
    assert optimal_offline(inst, horizon=4).revenue == 0
    assert optimal_offline(inst, horizon=5).revenue == 5


def test_two_far_requests_only_time_for_one():
    edges = complete(["o", "a", "b", "x", "y"], 3)
    inst = make_instance(edges, [("a", "b", 0, 2), ("x", "y", 0, 7)], T=9, f=3)
    # reaching a source takes 3 and serving takes 3; the second request would end at 12
    res = optimal_offline(inst)
    assert res.revenue == 7 and res.order == (1,)


def test_fig1_small_beats_its_witness():
    params = Fig1Params(4, 2, 1, Fraction(1, 16))
    inst, witness = gen_fig1(params)
    assert len(inst.requests) == 5 and params.m == 2
    res = optimal_offline(inst)
    assert res.revenue >= 2 * params.B
    assert res.revenue >= validate_schedule(inst, witness).revenue


def test_guard_raises_too_large(monkeypatch):
    inst = make_instance(complete("oab", 1), [("a", "b", 0, 1)] * 3)
    with pytest.raises(RoldarpError) as e:
        optimal_offline(inst, cap=2)
    assert e.value.code == "TOO_LARGE"
    monkeypatch.setenv("ROLDARP_SEARCH_CAP", "2")
    assert search_cap() == 2
    with pytest.raises(RoldarpError):
        optimal_offline(inst)
    monkeypatch.delenv("ROLDARP_SEARCH_CAP")
    assert search_cap() == DEFAULT_CAP


def test_invalid_instance_rejected():
    inst = make_instance({("o", "a"): 9}, [("o", "a", 0, 1)], T=12, f=4)
    with pytest.raises(RoldarpError) as e:
        optimal_offline(inst)
    assert e.value.code == "INVALID_INSTANCE"


def test_waiting_for_a_release_is_used():
    inst = make_instance({("o", "a"): 1}, [("o", "a", 5, 2), ("a", "o", 0, 1)], T=8, f=4)
    res = optimal_offline(inst)
    # serving 1 first means returning and waiting until 5 for request 0
    assert res.revenue == 3
    assert replay(inst, res.schedule) == (True, 3)


@st.composite
def small_instances(draw):
    seed = draw(st.integers(0, 10_000))
    return random_instance(seed, vertices=draw(st.integers(2, 5)), requests=draw(st.integers(0, 7)),
                           f=draw(st.sampled_from([2, 3, 4, 6])), uniform=draw(st.booleans()))


@given(small_instances())
@settings(max_examples=80, deadline=None)
def test_matches_exhaustive_search(inst):
    res = optimal_offline(inst)
    assert res.revenue == exhaustive_opt(inst)
    ok, rev = replay(inst, res.schedule)
    assert ok and rev == res.revenue
    assert res.revenue >= run_sbp(inst).revenue


@given(small_instances(), st.fractions(0, 1))
@settings(max_examples=60, deadline=None)
def test_monotone_in_horizon(inst, frac):
    short = inst.T * frac
    a = optimal_offline(inst, horizon=short)
    b = optimal_offline(inst)
    assert a.revenue <= b.revenue
    assert validate_schedule(inst, a.schedule, short).feasible
    assert a.revenue == exhaustive_opt(inst, short)
