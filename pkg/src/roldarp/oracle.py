"""Exact offline optimum by depth-first branch and bound.

A schedule is determined by the order in which requests are served: the
server heads for the next source along a shortest route at once and waits
there for the release if it arrives early. Arriving earlier never hurts, so
searching over orders with earliest-start timing loses nothing.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    Idle,
    Instance,
    RoldarpError,
    Schedule,
    Serve,
    lcm_denominator,
    require_valid,
    scalar,
    schedule_along,
)

DEFAULT_CAP = 16


def search_cap() -> int:
    raw = os.environ.get("ROLDARP_SEARCH_CAP")
    return int(raw) if raw else DEFAULT_CAP


@dataclass(frozen=True)
class OptResult:
    schedule: Schedule
    revenue: Fraction
    order: tuple[int, ...]
    nodes: int


class _Scaled:
    """Integer copy of an instance's timing data (times multiplied by a common denominator)."""

    def __init__(self, inst: Instance, horizon: Fraction):
        g = inst.graph
        reqs = inst.requests
        verts = sorted({inst.origin} | {r.s for r in reqs} | {r.d for r in reqs})
        self.index = {v: i for i, v in enumerate(verts)}
        dist = [[g.dist(u, v) for v in verts] for u in verts]
        serve = [g.w(r.s, r.d) for r in reqs]
        times = [x for row in dist for x in row] + serve + [r.t for r in reqs] + [horizon]
        scale = lcm_denominator(times)
        rscale = lcm_denominator([r.p for r in reqs])
        self.rscale = rscale
        self.dist = [[int(x * scale) for x in row] for row in dist]
        self.serve = [int(x * scale) for x in serve]
        self.release = [int(r.t * scale) for r in reqs]
        self.src = [self.index[r.s] for r in reqs]
        self.dst = [self.index[r.d] for r in reqs]
        self.gain = [int(r.p * rscale) for r in reqs]
        self.horizon = int(horizon * scale)
        self.origin = self.index[inst.origin]


def optimal_offline(inst: Instance, horizon=None, cap: int | None = None) -> OptResult:
    """Maximum-revenue feasible schedule finishing by ``horizon`` (default T)."""
    require_valid(inst)
    horizon = inst.T if horizon is None else scalar(horizon)
    cap = search_cap() if cap is None else cap
    n = len(inst.requests)
    if n > cap:
        raise RoldarpError("TOO_LARGE", f"{n} requests exceeds the search cap of {cap}")
    sc = _Scaled(inst, horizon)
    dist, serve, release, src, dst, gain, H = (sc.dist, sc.serve, sc.release, sc.src,
                                               sc.dst, sc.gain, sc.horizon)
    best_gain = 0
    best_order: list[int] = []
    order: list[int] = []
    seen: dict[tuple[int, int], int] = {}
    nodes = 0

    def knapsack_bound(pos: int, now: int, options: list, acc: int) -> Fraction:
        # each remaining serve costs its own length plus the cheapest way to reach its source
        items = []
        for r, _ in options:
            reach = min([dist[pos][src[r]]] + [dist[dst[q]][src[r]] for q, _ in options if q != r])
            items.append((gain[r], serve[r] + reach))
        items.sort(key=lambda it: Fraction(it[0], it[1]), reverse=True)
        room, total = H - now, Fraction(acc)
        for g, c in items:
            if c <= room:
                room -= c
                total += g
            else:
                return total + Fraction(g * room, c)
        return total

    def dfs(pos: int, now: int, mask: int, acc: int) -> None:
        nonlocal best_gain, best_order, nodes
        nodes += 1
        if acc > best_gain:
            best_gain, best_order = acc, order.copy()
        key = (mask, pos)
        prev = seen.get(key)
        if prev is not None and prev <= now:
            return
        seen[key] = now
        options = []
        bound = acc
        for r in range(n):
            if mask >> r & 1:
                continue
            begin = max(now + dist[pos][src[r]], release[r])
            end = begin + serve[r]
            if end <= H:
                options.append((r, end))
                bound += gain[r]
        if bound <= best_gain or knapsack_bound(pos, now, options, acc) <= best_gain:
            return
        for r, end in options:
            order.append(r)
            dfs(dst[r], end, mask | 1 << r, acc + gain[r])
            order.pop()

    dfs(sc.origin, 0, 0, 0)
    schedule = build_schedule(inst, best_order)
    return OptResult(schedule, Fraction(best_gain, sc.rscale), tuple(best_order), nodes)


def build_schedule(inst: Instance, order) -> Schedule:
    """Earliest-start schedule serving ``order`` in sequence."""
    actions = []
    here, now = inst.origin, Fraction(0)
    for r in order:
        req = inst.requests[r]
        moves, now = schedule_along(inst, here, now, req.s)
        actions += moves
        if now < req.t:
            actions.append(Idle(now, req.t - now))
            now = req.t
        actions.append(Serve(r, now))
        now += inst.serve_time(r)
        here = req.d
    return Schedule(tuple(actions))
