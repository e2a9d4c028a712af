from fractions import Fraction

import pytest

from roldarp.adversary import Fig1Params, adaptive_first_horizon, adaptive_last_window, gen_fig1
from roldarp.core import Idle, Move, RoldarpError, Serve, validate_instance, validate_schedule
from roldarp.online import IdlePolicy, View
from roldarp.sbp import SBPPolicy, run_sbp

EPS = Fraction(1, 100)


# -- static family -------------------------------------------------------------

@pytest.mark.parametrize("f, h", [(5, 3), (3, 3), (4, 1), (6, Fraction(1, 2))])
def test_bad_params(f, h):
    with pytest.raises(RoldarpError) as e:
        Fig1Params(f, h, 1, Fraction(1, 8))
    assert e.value.code == "BAD_PARAMS"


def test_fig1_f6_h3():
    p = Fig1Params(6, 3, 1, Fraction(1, 8))
    inst, witness = gen_fig1(p)
    assert p.m == 4 and p.T == 36
    top = [r for r in inst.requests if r.s.startswith("u")]
    bottom = [r for r in inst.requests if r.s.startswith("v")]
    assert len(top) == 5 and len(bottom) == 4
    v = validate_schedule(inst, witness)
    assert v.feasible and v.revenue == 6 + Fraction(1, 8) == p.witness_revenue()
    assert witness.completion(inst) <= 24


def test_fig1_distances():
    inst, _ = gen_fig1(Fig1Params(6, 3, 1, Fraction(1, 8)))
    g = inst.graph
    assert g.w("o", "u1") == g.w("o", "v1") == 1
    assert g.w("u1", "u2") == 1 and g.w("u2", "u3") == 3 and g.w("u3", "u4") == 1
    assert g.w("v1", "v2") == 4 and g.w("v4", "u2") == 4
    assert g.w("o", "u5") == 3


def test_fig1_f10_ratio():
    p = Fig1Params(10, 30, 1, Fraction(1, 1000))
    assert p.m == 12
    ratio = p.witness_revenue() / p.sbp_revenue()
    e = p.eps
    assert ratio == (18 + 3 * e) / (4 + 5 * e)
    assert Fraction(44, 10) <= ratio <= Fraction(45, 10)


@pytest.mark.parametrize("f", [4, 6, 8, 10])
@pytest.mark.parametrize("h", [2, 3, 5, 16, 50])
def test_fig1_sweep(f, h):
    p = Fig1Params(f, h, 1, Fraction(1, 1000))
    inst, witness = gen_fig1(p)
    assert validate_instance(inst) == []
    v = validate_schedule(inst, witness)
    assert v.feasible and v.revenue == p.witness_revenue()
    assert witness.completion(inst) <= (2 * f - 4) * h
    for k in range(1, f // 2 - 1):
        assert p.arrival(k) >= 4 * k * h + 1
    assert run_sbp(inst).revenue == p.eps + (Fraction(f, 2) - 1) * (p.B + p.eps)


# -- scripted policies ----------------------------------------------------------------

class Script:
    """Deterministic test policy: at given times head somewhere or serve something."""

    def __init__(self, *steps):
        self.steps = list(steps)  # (time, ("go", vertex) | ("serve", source vertex))

    def next_action(self, view: View):
        if not self.steps:
            return None
        if self.steps[0][0] > view.now:
            return Idle(view.now, self.steps[0][0] - view.now)
        when, (kind, arg) = self.steps.pop(0)
        if kind == "go":
            if arg not in view.instance.graph.vertices or arg == view.position:
                return None
            return Move(view.position, arg, view.now)
        for i, r in sorted(view.pending().items()):
            if r.s == view.position and (arg is None or r.s == arg):
                return Serve(i, view.now)
        return None


class Recorder:
    """Wraps a policy and remembers which requests existed at each decision."""

    def __init__(self, inner):
        self.inner = inner
        self.views = []

    def next_action(self, view):
        self.views.append((view.now, len(view.instance.requests), view.instance.requests))
        return self.inner.next_action(view)


def assert_causal(rec: Recorder):
    # a request first seen at a later decision must not be released at or before an earlier one
    for (t0, n0, _), (t1, n1, reqs) in zip(rec.views, rec.views[1:]):
        for r in reqs[n0:]:
            assert r.t > t0 or t0 == t1


# -- last-window adversary ------------------------------------------------------------

def test_last_window_vs_sbp_nonuniform():
    tr = adaptive_last_window(SBPPolicy(), k=100)
    assert tr.case == "committed"
    assert tr.policy_revenue == 1 and tr.opt_revenue >= 100
    assert validate_instance(tr.instance) == []


def test_last_window_vs_sbp_uniform():
    tr = adaptive_last_window(SBPPolicy(), uniform=True, k=5)
    assert tr.policy_revenue <= 1 and tr.opt_revenue == 5
    assert tr.instance.is_uniform


def test_last_window_vs_idle():
    tr = adaptive_last_window(IdlePolicy(), k=100)
    assert tr.case == "ignored" and tr.policy_revenue == 0 and tr.opt_revenue == 1


@pytest.mark.parametrize("T, f", [(20, 4), (30, 6), (12, 3)])
def test_last_window_schedules_recompute(T, f):
    tr = adaptive_last_window(SBPPolicy(), T=T, f=f, k=7)
    v = validate_schedule(tr.instance, tr.policy_schedule)
    assert v.feasible and v.revenue == tr.policy_revenue
    assert validate_schedule(tr.instance, tr.opt.schedule).revenue == tr.opt_revenue


# -- first-horizon adversary -----------------------------------------------------------

def test_first_horizon_never_moving():
    tr = adaptive_first_horizon(IdlePolicy(), X=6, eps=EPS)
    assert tr.case == "1" and tr.policy_revenue == 0 and tr.opt_revenue == EPS
    tr = adaptive_first_horizon(IdlePolicy(), uniform=True, X=6, k=4)
    assert tr.case == "1" and tr.opt_revenue == 1


def test_first_horizon_vs_sbp_nonuniform():
    tr = adaptive_first_horizon(SBPPolicy(), X=6, eps=EPS)
    assert tr.policy_revenue <= 1 + EPS and tr.opt_revenue == 2
    assert tr.opt_revenue / tr.policy_revenue >= 2 / (1 + EPS)


def test_first_horizon_vs_sbp_uniform():
    tr = adaptive_first_horizon(SBPPolicy(), uniform=True, X=6, k=4, delta=Fraction(1, 16))
    assert tr.policy_revenue <= 5 and tr.opt_revenue == 8


X = Fraction(6)
NONUNIFORM_SCRIPTS = {
    "2a": Script((9, ("go", "a1")), (15, ("serve", "a1"))),
    "2b": Script((12, ("go", "a2")), (18, ("serve", "a2"))),
    "2c": Script((15, ("go", "a1")), (21, ("serve", "a1"))),
    "3a": Script((6, ("go", "a1")), (12, ("serve", "a1"))),
    "3b-i": Script((6, ("go", "a1")), (12, ("go", "a3")), (18, ("serve", "a3"))),
    "3b-ii": Script((6, ("go", "a1")), (17, ("go", "c3")), (23, ("serve", None))),
}


@pytest.mark.parametrize("case", sorted(NONUNIFORM_SCRIPTS))
def test_first_horizon_cases_nonuniform(case):
    rec = Recorder(NONUNIFORM_SCRIPTS[case])
    tr = adaptive_first_horizon(rec, X=X, eps=EPS)
    assert tr.case == case
    assert validate_instance(tr.instance) == []
    assert validate_schedule(tr.instance, tr.opt.schedule, 3 * X).revenue == tr.opt_revenue
    if case.startswith("2"):
        assert tr.policy_revenue <= EPS and tr.opt_revenue == 2 * EPS
    else:
        assert tr.policy_revenue <= 1 + EPS and tr.opt_revenue == 2
    assert_causal(rec)


UNIFORM_SCRIPTS = {
    "2a": Script((9, ("go", "a1")), (15, ("serve", "a1"))),
    "2b": Script((12, ("go", "b1")), (18, ("serve", "b1"))),
    "2c": Script((15, ("go", "b1")), (21, ("serve", "b1"))),
    "3a": Script((6, ("go", "a1")), (12, ("serve", "a1"))),
    "3b-i": Script((6, ("go", "a1")), (13, ("go", "c0")), (19, ("serve", None)), (20, ("serve", None)),
                   (21, ("serve", None)), (22, ("serve", None))),
    "3b-ii": Script((6, ("go", "a1")), (18, ("go", "d0")), (24, ("serve", None))),
}


@pytest.mark.parametrize("case", sorted(UNIFORM_SCRIPTS))
def test_first_horizon_cases_uniform(case):
    k = 4
    rec = Recorder(UNIFORM_SCRIPTS[case])
    tr = adaptive_first_horizon(rec, uniform=True, X=X, k=k)
    assert tr.case == case
    assert validate_instance(tr.instance) == []
    if case.startswith("2"):
        assert tr.policy_revenue <= 1 and tr.opt_revenue == 2
    else:
        assert tr.policy_revenue <= 1 + k and tr.opt_revenue == 2 * k
    assert_causal(rec)


def test_first_horizon_zero_gap_merges_chains():
    # departing at exactly 2X makes the final chain start where the other chain ends
    script = Script((6, ("go", "a1")), (12, ("go", "c0")))
    tr = adaptive_first_horizon(script, uniform=True, X=X, k=4)
    assert tr.case == "3b-i"
    assert "e0" not in tr.instance.graph.vertices
    assert validate_instance(tr.instance) == [] and tr.opt_revenue == 8


def test_first_horizon_bad_params():
    with pytest.raises(RoldarpError):
        adaptive_first_horizon(IdlePolicy(), X=2)
    with pytest.raises(RoldarpError):
        adaptive_first_horizon(IdlePolicy(), uniform=True, X=6, k=4, delta=1)
