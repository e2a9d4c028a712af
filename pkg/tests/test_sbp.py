from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete, make_instance
from reference import best_chain, distances
from roldarp.adversary import Fig1Params, gen_fig1
from roldarp.core import Idle, MetricGraph, Request, Serve, validate_schedule
from roldarp.generate import random_instance
from roldarp.sbp import AuxiliaryGraph, max_revenue_request_set, planning_indices, run_sbp
from roldarp.serialize import dumps, schedule_to_json


def aux_of(graph, reqs):
    pending = dict(enumerate(reqs))
    return AuxiliaryGraph(pending, graph, {i: graph.w(r.s, r.d) for i, r in pending.items()})


def test_single_request_plan():
    g = MetricGraph(("a", "b"), {("a", "b"): 2})
    plan = max_revenue_request_set(aux_of(g, [Request("a", "b", 0, 3)]), Fraction(3))
    assert plan.requests == (0,) and plan.duration == 2 and plan.revenue == 3


def test_empty_plan_when_nothing_fits():
    g = MetricGraph(("a", "b"), {("a", "b"): 4})
    assert not max_revenue_request_set(aux_of(g, [Request("a", "b", 0, 3)]), Fraction(3))


def test_chain_beats_lone_richer_request():
    g = MetricGraph(("a", "b", "c", "x", "y"), complete("abcxy", 1) | {("x", "y"): 3})
    reqs = [Request("a", "b", 0, 3), Request("b", "c", 0, 4), Request("x", "y", 0, 6)]
    plan = max_revenue_request_set(aux_of(g, reqs), Fraction(3))
    assert plan.requests == (0, 1) and plan.revenue == 7 and plan.duration == 2


def test_connecting_moves_count_against_the_segment():
    g = MetricGraph(("a", "b", "c", "d"), complete("abcd", 2))
    reqs = [Request("a", "b", 0, 3), Request("c", "d", 0, 4)]
    # 2 + 2 (b->c) + 2 = 6 does not fit in 5
    assert max_revenue_request_set(aux_of(g, reqs), Fraction(5)).requests == (1,)
    assert max_revenue_request_set(aux_of(g, reqs), Fraction(6)).requests == (0, 1)


def test_tie_break_prefers_fewer_requests_then_smaller_ids():
    g = MetricGraph(tuple("abcxyzw"), complete("abcxyzw", 1))
    reqs = [Request("a", "b", 0, 2), Request("b", "c", 0, 2), Request("x", "y", 0, 4), Request("z", "w", 0, 4)]
    # revenue 4 three ways: the pair (0, 1) and the singletons 2 and 3
    plan = max_revenue_request_set(aux_of(g, reqs), Fraction(2))
    assert plan.requests == (2,)


@st.composite
def pending_sets(draw):
    names = ["a", "b", "c", "d"]
    weights = {(u, v): Fraction(draw(st.integers(1, 4))) for i, u in enumerate(names) for v in names[i + 1:]}
    g = MetricGraph(tuple(names), weights)
    reqs = []
    for _ in range(draw(st.integers(0, 5))):
        s, d = draw(st.permutations(names))[:2]
        reqs.append(Request(s, d, 0, draw(st.integers(1, 5))))
    return g, reqs, Fraction(draw(st.integers(1, 9)))


@given(pending_sets())
@settings(max_examples=200, deadline=None)
def test_plan_matches_brute_force_chain_enumeration(case):
    g, reqs, limit = case
    aux = aux_of(g, reqs)
    dist = {(u, v): g.dist(u, v) for u in g.vertices for v in g.vertices}
    expect = best_chain(aux.requests, aux.serve_times, dist, limit)
    assert max_revenue_request_set(aux, limit).requests == tuple(expect)


def test_planning_indices():
    assert planning_indices(4) == [1, 3]
    assert planning_indices(5) == [2, 4]
    assert planning_indices(6) == [1, 3, 5]


def test_no_requests_gives_zero():
    inst = make_instance(complete("oab", 1), [])
    res = run_sbp(inst)
    assert res.revenue == 0 and not res.schedule.served()


def test_fig1_plan_at_4h_is_a_single_request():
    inst, _ = gen_fig1(Fig1Params(6, 3, 1, Fraction(1, 8)))
    res = run_sbp(inst)
    at_4h = [plan for when, plan in res.plans if when == 12]
    assert len(at_4h) == 1
    (plan,) = at_4h
    assert len(plan.requests) == 1 and plan.revenue == 1 + Fraction(1, 8)
    assert res.revenue == 2 + Fraction(3, 8)


def test_odd_f_idles_through_first_segment():
    inst = make_instance(complete("oab", 2), [("a", "b", 0, 1)], T=15, f=5)
    res = run_sbp(inst)
    # only idling in t_1
    assert all(isinstance(a, Idle) for a in res.schedule.actions if a.start < 3)
    (serve,) = [a for a in res.schedule.actions if isinstance(a, Serve)]
    assert serve.start == 6  # planned at the start of t_2, served from the start of t_3


def test_mid_segment_release_waits_for_next_planning_instant():
    inst = make_instance(complete("oab", 2), [("a", "b", 1, 1)], T=12, f=4)
    (serve,) = [a for a in run_sbp(inst).schedule.actions if isinstance(a, Serve)]
    assert serve.start == 9  # not visible at time 0, planned at 6, served from 9


def _serve_segments_ok(inst, sched):
    L = inst.segment_length
    first = 1 if inst.f % 2 == 0 else 2
    for a in sched.actions:
        if isinstance(a, Serve):
            end = a.start + inst.serve_time(a.request)
            j = int(a.start // L) + 1
            if (j - first) % 2 != 1 or end > j * L:
                return False
    return True


@pytest.mark.parametrize("seed", range(40))
def test_sbp_schedule_is_feasible_and_serves_only_in_serve_segments(seed):
    inst = random_instance(seed, vertices=4 + seed % 3, requests=3 + seed % 6, f=(4, 5, 6, 7)[seed % 4])
    res = run_sbp(inst)
    assert validate_schedule(inst, res.schedule).feasible
    assert _serve_segments_ok(inst, res.schedule)
    # identical inputs give byte-identical output
    assert dumps(schedule_to_json(run_sbp(inst).schedule)) == dumps(schedule_to_json(res.schedule))


@pytest.mark.parametrize("seed", range(25))
def test_every_plan_is_the_brute_force_best(seed):
    inst = random_instance(100 + seed, vertices=4, requests=8, f=4 + seed % 3)
    res = run_sbp(inst)
    dist = distances(inst)
    served: set[int] = set()
    for when, plan in res.plans:
        pending = {i: r for i, r in enumerate(inst.requests) if r.t <= when and i not in served}
        serve_times = {i: inst.serve_time(i) for i in pending}
        assert plan.requests == tuple(best_chain(pending, serve_times, dist, inst.segment_length))
        served |= set(plan.requests)
