"""Reduction from general instances to complete bipartite ones, and back.

Every vertex u splits into a source copy ``1:u`` and a destination copy
``2:u`` joined by an edge of weight eps. Travelling u -> v becomes a hop
between opposite sides with the original weight, so a route alternates
sides; when a serve would start on the wrong side the server takes the eps
edge first. The time limit grows by delta = T * eps to pay for those hops.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import (
    Action,
    Idle,
    Instance,
    MetricGraph,
    Move,
    Request,
    RoldarpError,
    Schedule,
    Serve,
    action_duration,
    ceil_fraction,
    lcm_denominator,
    scalar,
)


def src_copy(u: str) -> str:
    return f"1:{u}"


def dst_copy(u: str) -> str:
    return f"2:{u}"


def original(v: str) -> str:
    return v[2:]


def default_eps(inst: Instance) -> Fraction:
    """Half of min(smallest edge, time granularity), divided by T.

    Keeping delta below the granularity of the input data means a bipartite
    schedule finishing by T + delta projects to one finishing by T.
    """
    g = inst.graph
    data = list(g.weights.values()) + [r.t for r in inst.requests] + [inst.T]
    grain = Fraction(1, lcm_denominator(data))
    return min(g.min_weight(), grain) / (2 * inst.T)


@dataclass(frozen=True)
class Reduction:
    source: Instance
    target: Instance
    eps: Fraction

    @property
    def delta(self) -> Fraction:
        return self.source.T * self.eps


def to_bipartite(inst: Instance, eps=None) -> Reduction:
    g = inst.graph
    if not g.weights:
        raise RoldarpError("EPSILON_TOO_LARGE", "graph has no edges to compare eps against")
    eps = default_eps(inst) if eps is None else scalar(eps)
    if eps <= 0 or inst.T * eps >= g.min_weight():
        raise RoldarpError("EPSILON_TOO_LARGE",
                           f"need 0 < T*eps < smallest edge {g.min_weight()}, got eps={eps}")
    weights: dict[tuple[str, str], Fraction] = {}
    for u in g.vertices:
        weights[(src_copy(u), dst_copy(u))] = eps
    for (u, v), w in g.weights.items():
        weights[(src_copy(u), dst_copy(v))] = w
        weights[(dst_copy(u), src_copy(v))] = w
    v1 = frozenset(src_copy(u) for u in g.vertices)
    v2 = frozenset(dst_copy(u) for u in g.vertices)
    graph = MetricGraph(tuple(v1 | v2), weights, (v1, v2))
    reqs = tuple(Request(src_copy(r.s), dst_copy(r.d), r.t, r.p) for r in inst.requests)
    target = Instance(graph, dst_copy(inst.origin), inst.T + inst.T * eps, inst.f, reqs)
    return Reduction(inst, target, eps)


def lift_schedule(red: Reduction, sched: Schedule) -> Schedule:
    """Replay a general schedule on the bipartite side, inserting eps hops before serves as needed.

    Each hop delays the rest of the schedule by eps.
    """
    inst = red.source
    here = dst_copy(inst.origin)
    shift = Fraction(0)
    out: list[Action] = []
    for a in sched.actions:
        if isinstance(a, Move):
            if original(here) != a.u:
                raise RoldarpError("INFEASIBLE_INPUT", f"move {a} does not start at {original(here)}")
            nxt = dst_copy(a.v) if here.startswith("1:") else src_copy(a.v)
            out.append(Move(here, nxt, a.start + shift))
            here = nxt
        elif isinstance(a, Serve):
            req = inst.requests[a.request]
            if original(here) != req.s:
                raise RoldarpError("INFEASIBLE_INPUT", f"serve {a} does not start at {original(here)}")
            if here != src_copy(req.s):
                out.append(Move(here, src_copy(req.s), a.start + shift))
                shift += red.eps
            out.append(Serve(a.request, a.start + shift))
            here = dst_copy(req.d)
        else:
            out.append(Idle(a.start + shift, a.duration))
    return Schedule(tuple(out))


def project_schedule(red: Reduction, sched: Schedule) -> Schedule:
    """Drop eps hops and pull later actions earlier by the time they saved."""
    tgt = red.target
    src = red.source
    shift = Fraction(0)
    prev_end = Fraction(0)
    out: list[Action] = []
    for a in sched.actions:
        if isinstance(a, Move) and original(a.u) == original(a.v):
            shift += tgt.graph.w(a.u, a.v)
            continue
        begin = max(prev_end, a.start - shift)
        if isinstance(a, Move):
            act: Action = Move(original(a.u), original(a.v), begin)
        elif isinstance(a, Serve):
            begin = max(begin, src.requests[a.request].t)
            act = Serve(a.request, begin)
        else:
            end = a.start + a.duration - shift
            if end <= begin:
                continue
            act = Idle(begin, end - begin)
        shift = a.start - begin
        out.append(act)
        prev_end = begin + action_duration(src, act)
    return Schedule(tuple(out))


def per_window_capacity(k) -> int:
    """Most requests any schedule can complete in one window when every edge is at least kT/f."""
    k = scalar(k)
    if not (0 < k <= 1):
        raise RoldarpError("BAD_K", f"k must lie in (0, 1], got {k}")
    return ceil_fraction(1 / k)
