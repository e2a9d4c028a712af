"""Segmented Best Path: plan during one segment, serve the best chain during the next."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    Action,
    Idle,
    Instance,
    MetricGraph,
    Move,
    Request,
    RevenueProfile,
    Schedule,
    Serve,
    require_valid,
    revenue_profile,
)
from .online import View, run_static


@dataclass(frozen=True)
class ServePlan:
    """Ordered request chain; connecting empty moves are implied between consecutive requests."""

    requests: tuple[int, ...] = ()
    duration: Fraction = Fraction(0)
    revenue: Fraction = Fraction(0)

    def __bool__(self) -> bool:
        return bool(self.requests)


@dataclass(frozen=True)
class AuxiliaryGraph:
    """Released, unserved requests at a decision instant over the travel metric."""

    requests: dict[int, Request]
    graph: MetricGraph
    serve_times: dict[int, Fraction]

    @classmethod
    def from_view(cls, view: View) -> "AuxiliaryGraph":
        pending = view.pending()
        g = view.instance.graph
        return cls(pending, g, {i: g.w(r.s, r.d) for i, r in pending.items()})


def max_revenue_request_set(aux: AuxiliaryGraph, limit: Fraction) -> ServePlan:
    """Highest-revenue chain of distinct requests whose serve and connecting times fit in ``limit``.

    Exhaustive depth-first enumeration in ascending id order, so among equal
    revenues the shortest chain and then the lexicographically smallest id
    sequence wins.
    """
    ids = sorted(i for i in aux.requests if aux.serve_times[i] <= limit)
    reqs = aux.requests
    best = ServePlan()
    total = sum((reqs[i].p for i in ids), Fraction(0))

    def extend(chain: list[int], used: set[int], dur: Fraction, rev: Fraction, left: Fraction):
        nonlocal best
        if rev > best.revenue or (rev == best.revenue and best and len(chain) < len(best.requests)):
            best = ServePlan(tuple(chain), dur, rev)
        if rev + left <= best.revenue:
            return
        here = reqs[chain[-1]].d
        for j in ids:
            if j in used:
                continue
            step = aux.graph.dist(here, reqs[j].s) + aux.serve_times[j]
            if dur + step <= limit:
                chain.append(j)
                used.add(j)
                extend(chain, used, dur + step, rev + reqs[j].p, left - reqs[j].p)
                used.discard(j)
                chain.pop()

    for i in ids:
        extend([i], {i}, aux.serve_times[i], reqs[i].p, total - reqs[i].p)
    return best


def planning_indices(f: int) -> list[int]:
    """Segments at whose start a plan is computed; odd f skips t_1."""
    return list(range(1 if f % 2 == 0 else 2, f, 2))


class SBPPolicy:
    """Online policy replaying Segmented Best Path step by step."""

    def __init__(self):
        self._steps: list[tuple] = []
        self._done: set[int] = set()
        self.plans: list[tuple[Fraction, ServePlan]] = []

    def _next_instant(self, inst: Instance, now: Fraction) -> Fraction:
        L = inst.segment_length
        later = [(i - 1) * L for i in planning_indices(inst.f) if (i - 1) * L > now]
        return min(later) if later else inst.T

    def next_action(self, view: View) -> Action | None:
        inst, now = view.instance, view.now
        L = inst.segment_length
        if not self._steps:
            for i in planning_indices(inst.f):
                if (i - 1) * L == now and i not in self._done:
                    self._done.add(i)
                    self._plan(view, i)
                    break
        while self._steps:
            step = self._steps.pop(0)
            if step[0] == "idle_until":
                if step[1] > now:
                    return Idle(now, step[1] - now)
                continue
            if step[0] == "move":
                return Move(step[1], step[2], now)
            return Serve(step[1], now)
        until = self._next_instant(inst, now)
        return Idle(now, until - now) if until > now else None

    def _plan(self, view: View, i: int) -> None:
        inst = view.instance
        L = inst.segment_length
        plan = max_revenue_request_set(AuxiliaryGraph.from_view(view), L)
        self.plans.append((view.now, plan))
        if not plan:
            return
        g = inst.graph
        here = view.position
        for j, r in enumerate(plan.requests):
            req = inst.requests[r]
            path = g.route(here, req.s)
            self._steps += [("move", u, v) for u, v in zip(path, path[1:])]
            if j == 0:
                self._steps.append(("idle_until", i * L))
            self._steps.append(("serve", r))
            here = req.d


@dataclass
class SBPResult:
    schedule: Schedule
    profile: RevenueProfile
    plans: list[tuple[Fraction, ServePlan]] = field(default_factory=list)

    @property
    def revenue(self) -> Fraction:
        return self.profile.total


def run_sbp(inst: Instance) -> SBPResult:
    require_valid(inst)
    policy = SBPPolicy()
    run = run_static(policy, inst)
    return SBPResult(run.schedule, revenue_profile(inst, run.schedule), policy.plans)
