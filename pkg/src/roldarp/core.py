"""Exact-arithmetic domain model: graphs, instances, schedules and the segment clock.

Every time, distance and revenue is a :class:`fractions.Fraction`. Floats are
rejected at the boundary so tie-breaking downstream stays exact.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

import networkx as nx

Scalar = Fraction


class RoldarpError(Exception):
    """Failure with a machine-readable ``code`` (e.g. ``DISCONNECTED``)."""

    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail


def scalar(x) -> Fraction:
    """Coerce ints, Fractions and ``"a/b"`` strings to a Fraction. Floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool) or isinstance(x, float):
        raise TypeError(f"refusing inexact value {x!r}")
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def _pair(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class MetricGraph:
    """Undirected weighted graph over opaque string vertex ids.

    ``weights`` holds one entry per unordered pair. A graph may be built raw
    (incomplete) and completed with :func:`metric_closure`. When
    ``bipartition`` is set only V1 x V2 pairs are expected to carry weights.
    """

    vertices: tuple[str, ...]
    weights: dict[tuple[str, str], Fraction]
    bipartition: tuple[frozenset[str], frozenset[str]] | None = None

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted(set(self.vertices))))
        weights = {}
        for (u, v), w in self.weights.items():
            weights[_pair(u, v)] = scalar(w)
        object.__setattr__(self, "weights", dict(sorted(weights.items())))
        if self.bipartition is not None:
            v1, v2 = self.bipartition
            object.__setattr__(self, "bipartition", (frozenset(v1), frozenset(v2)))

    def w(self, u: str, v: str) -> Fraction:
        try:
            return self.weights[_pair(u, v)]
        except KeyError:
            raise RoldarpError("MISSING_EDGE", f"no edge {u}-{v}") from None

    def has_edge(self, u: str, v: str) -> bool:
        return u != v and _pair(u, v) in self.weights

    def side(self, v: str) -> int | None:
        if self.bipartition is None:
            return None
        return 1 if v in self.bipartition[0] else 2 if v in self.bipartition[1] else None

    def expected_pairs(self) -> list[tuple[str, str]]:
        """Pairs that must carry a weight for the graph to count as complete."""
        if self.bipartition is None:
            return list(itertools.combinations(self.vertices, 2))
        v1, v2 = self.bipartition
        return sorted(_pair(a, b) for a in v1 for b in v2 if a != b)

    def is_complete(self) -> bool:
        return all(p in self.weights for p in self.expected_pairs())

    @cached_property
    def _paths(self):
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        for (u, v), w in self.weights.items():
            g.add_edge(u, v, weight=w)
        dist, path = {}, {}
        for src, (d, p) in nx.all_pairs_dijkstra(g, weight="weight"):
            dist[src] = d
            path[src] = p
        return dist, path

    def dist(self, u: str, v: str) -> Fraction:
        """Shortest travel time from ``u`` to ``v`` (0 when equal)."""
        if u == v:
            return Fraction(0)
        try:
            return Fraction(self._paths[0][u][v])
        except KeyError:
            raise RoldarpError("DISCONNECTED", f"{v} unreachable from {u}") from None

    def route(self, u: str, v: str) -> list[str]:
        """Vertex sequence of a shortest ``u``-``v`` path, endpoints included."""
        if u == v:
            return [u]
        self.dist(u, v)
        return list(self._paths[1][u][v])

    def min_weight(self) -> Fraction:
        return min(self.weights.values())

    def max_weight(self) -> Fraction:
        return max(self.weights.values())


def metric_closure(graph: MetricGraph) -> MetricGraph:
    """Complete ``graph`` with shortest-path distances.

    Every returned weight equals the shortest-path distance in the input, so
    existing edges may shrink when a shorter detour exists. For bipartite
    graphs only V1 x V2 pairs are kept.
    """
    for (u, v), w in graph.weights.items():
        if w <= 0:
            raise RoldarpError("NONPOSITIVE_WEIGHT", f"w({u},{v}) = {w}")
    weights = {}
    for u, v in graph.expected_pairs():
        weights[(u, v)] = graph.dist(u, v)
    return MetricGraph(graph.vertices, weights, graph.bipartition)


def triangle_violations(graph: MetricGraph) -> list[tuple[str, str, str]]:
    """Triples (u, v, x) with w(u,v) > w(u,x) + w(x,v), over weighted pairs only."""
    out = []
    for (u, v), w in graph.weights.items():
        for x in graph.vertices:
            if x in (u, v) or not (graph.has_edge(u, x) and graph.has_edge(x, v)):
                continue
            if w > graph.w(u, x) + graph.w(x, v):
                out.append((u, v, x))
    return out


@dataclass(frozen=True)
class Request:
    """A ride ``(s, d, t, p)``: source, destination, release time, revenue."""

    s: str
    d: str
    t: Fraction
    p: Fraction

    def __post_init__(self):
        object.__setattr__(self, "t", scalar(self.t))
        object.__setattr__(self, "p", scalar(self.p))


@dataclass(frozen=True)
class SegmentClock:
    """Segments t_j = ((j-1)T/f, jT/f] for j = 1..f, paired into windows."""

    T: Fraction
    f: int

    @property
    def length(self) -> Fraction:
        return self.T / self.f

    @property
    def num_windows(self) -> int:
        return -(-self.f // 2)

    def start(self, j: int) -> Fraction:
        return (j - 1) * self.length

    def end(self, j: int) -> Fraction:
        return j * self.length

    def segment_of(self, time: Fraction) -> int:
        """Segment holding ``time``; a boundary instant j*T/f belongs to segment j."""
        if time <= 0 or time > self.T:
            raise RoldarpError("OUT_OF_RANGE", f"time {time} outside (0, {self.T}]")
        return math.ceil(Fraction(time) / self.length)

    @staticmethod
    def window_of(j: int) -> int:
        return (j + 1) // 2

    def window_segments(self, i: int) -> tuple[int, ...]:
        return tuple(j for j in (2 * i - 1, 2 * i) if j <= self.f)


@dataclass(frozen=True)
class Instance:
    graph: MetricGraph
    origin: str
    T: Fraction
    f: int
    requests: tuple[Request, ...] = ()
    k: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "T", scalar(self.T))
        object.__setattr__(self, "requests", tuple(self.requests))
        if self.k is not None:
            object.__setattr__(self, "k", scalar(self.k))

    @property
    def segment_length(self) -> Fraction:
        return self.T / self.f

    @property
    def clock(self) -> SegmentClock:
        return SegmentClock(self.T, self.f)

    def serve_time(self, r: int) -> Fraction:
        req = self.requests[r]
        return self.graph.w(req.s, req.d)

    @property
    def is_uniform(self) -> bool:
        return len({r.p for r in self.requests}) <= 1

    def replace(self, **changes) -> "Instance":
        fields = dict(graph=self.graph, origin=self.origin, T=self.T, f=self.f,
                      requests=self.requests, k=self.k)
        fields.update(changes)
        return Instance(**fields)


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str


def validate_instance(inst: Instance) -> list[Violation]:
    """Every broken instance/graph invariant, in a fixed order. Empty means valid.

    The triangle inequality is deliberately not checked: lower-bound families
    are specified with explicit non-metric distances and are consumed as-is
    (movement always follows shortest paths, see :meth:`MetricGraph.dist`).
    """
    out: list[Violation] = []
    g = inst.graph
    vs = set(g.vertices)
    L = inst.segment_length
    if not (1 < inst.f < inst.T):
        out.append(Violation("F_OUT_OF_RANGE", f"need 1 < f={inst.f} < T={inst.T}"))
    if inst.origin not in vs:
        out.append(Violation("UNKNOWN_VERTEX", f"origin {inst.origin}"))
    for (u, v), w in g.weights.items():
        if u not in vs or v not in vs:
            out.append(Violation("UNKNOWN_VERTEX", f"edge {u}-{v}"))
        if u == v:
            out.append(Violation("SELF_LOOP", f"edge {u}-{v}"))
        if w <= 0:
            out.append(Violation("NONPOSITIVE_WEIGHT", f"w({u},{v}) = {w}"))
        if w > L:
            out.append(Violation("MAX_EDGE_EXCEEDED", f"w({u},{v}) = {w} > T/f = {L}"))
        if inst.k is not None and w < inst.k * L:
            out.append(Violation("MIN_EDGE_VIOLATED", f"w({u},{v}) = {w} < kT/f = {inst.k * L}"))
    for u, v in g.expected_pairs():
        if (u, v) not in g.weights:
            out.append(Violation("MISSING_EDGE", f"{u}-{v}"))
    if inst.k is not None and not (0 < inst.k <= 1):
        out.append(Violation("K_OUT_OF_RANGE", f"k = {inst.k}"))
    if g.bipartition is not None:
        v1, v2 = g.bipartition
        for v in g.vertices:
            if (v in v1) == (v in v2):
                out.append(Violation("BIPARTITION_LABEL", f"{v} must be in exactly one side"))
        if inst.origin not in v2:
            out.append(Violation("ORIGIN_NOT_IN_V2", inst.origin))
        for (u, v) in g.weights:
            if g.side(u) == g.side(v):
                out.append(Violation("SAME_SIDE_EDGE", f"{u}-{v}"))
    for i, r in enumerate(inst.requests):
        if r.s not in vs or r.d not in vs:
            out.append(Violation("UNKNOWN_VERTEX", f"request {i}"))
            continue
        if r.s == r.d:
            out.append(Violation("SELF_LOOP_REQUEST", f"request {i}"))
        elif not g.has_edge(r.s, r.d):
            out.append(Violation("MISSING_EDGE", f"request {i} {r.s}-{r.d}"))
        if r.p <= 0:
            out.append(Violation("NONPOSITIVE_REVENUE", f"request {i} p = {r.p}"))
        if r.t < 0:
            out.append(Violation("NEGATIVE_RELEASE", f"request {i} t = {r.t}"))
        if r.t > inst.T:
            out.append(Violation("RELEASE_AFTER_T", f"request {i} t = {r.t} > T"))
        if g.bipartition is not None and (g.side(r.s) != 1 or g.side(r.d) != 2):
            out.append(Violation("REQUEST_SIDE", f"request {i} must go V1 -> V2"))
    return out


def require_valid(inst: Instance) -> None:
    problems = validate_instance(inst)
    if problems:
        raise RoldarpError("INVALID_INSTANCE", "; ".join(f"{p.code} {p.detail}" for p in problems))


# -- schedules ---------------------------------------------------------------

@dataclass(frozen=True)
class Move:
    u: str
    v: str
    start: Fraction


@dataclass(frozen=True)
class Serve:
    request: int
    start: Fraction


@dataclass(frozen=True)
class Idle:
    start: Fraction
    duration: Fraction


Action = Union[Move, Serve, Idle]


def action_duration(inst: Instance, a: Action) -> Fraction:
    if isinstance(a, Move):
        return inst.graph.w(a.u, a.v)
    if isinstance(a, Serve):
        return inst.serve_time(a.request)
    return a.duration


def action_end(inst: Instance, a: Action) -> Fraction:
    return a.start + action_duration(inst, a)


@dataclass(frozen=True)
class Schedule:
    actions: tuple[Action, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))

    def served(self) -> list[int]:
        return [a.request for a in self.actions if isinstance(a, Serve)]

    def revenue(self, inst: Instance) -> Fraction:
        return sum((inst.requests[r].p for r in self.served()), Fraction(0))

    def completion(self, inst: Instance) -> Fraction:
        if not self.actions:
            return Fraction(0)
        return action_end(inst, self.actions[-1])


@dataclass(frozen=True)
class Verdict:
    feasible: bool
    rule: str | None = None
    index: int | None = None
    revenue: Fraction = Fraction(0)


def validate_schedule(inst: Instance, sched: Schedule, horizon: Fraction | None = None) -> Verdict:
    """Replay ``sched`` and report the first broken feasibility rule.

    Raises ``UNKNOWN_VERTEX`` / ``UNKNOWN_REQUEST`` for dangling references.
    """
    limit = inst.T if horizon is None else scalar(horizon)
    vs = set(inst.graph.vertices)
    here, now = inst.origin, Fraction(0)
    seen: set[int] = set()
    revenue = Fraction(0)
    for i, a in enumerate(sched.actions):
        if isinstance(a, Move):
            for x in (a.u, a.v):
                if x not in vs:
                    raise RoldarpError("UNKNOWN_VERTEX", f"action {i}: {x}")
        elif isinstance(a, Serve):
            if not 0 <= a.request < len(inst.requests):
                raise RoldarpError("UNKNOWN_REQUEST", f"action {i}: {a.request}")
        if a.start < now:
            return Verdict(False, "OVERLAP" if i else "NEGATIVE_START", i)
        if isinstance(a, Move):
            if a.u != here:
                return Verdict(False, "WRONG_LOCATION", i)
            if a.u == a.v or not inst.graph.has_edge(a.u, a.v):
                return Verdict(False, "NO_EDGE", i)
            here = a.v
        elif isinstance(a, Serve):
            req = inst.requests[a.request]
            if req.s != here:
                return Verdict(False, "WRONG_LOCATION", i)
            if a.request in seen:
                return Verdict(False, "DUPLICATE_SERVE", i)
            if a.start < req.t:
                return Verdict(False, "REQUEST_NOT_RELEASED", i)
            seen.add(a.request)
            revenue += req.p
            here = req.d
        elif a.duration <= 0:
            return Verdict(False, "BAD_IDLE", i)
        now = action_end(inst, a)
        if now > limit:
            return Verdict(False, "TIME_LIMIT_EXCEEDED", i)
    return Verdict(True, revenue=revenue)


# -- revenue accounting ------------------------------------------------------

@dataclass(frozen=True)
class RevenueProfile:
    by_segment: tuple[Fraction, ...]
    by_window: tuple[Fraction, ...]
    total: Fraction


def segment_sets(inst: Instance, sched: Schedule) -> tuple[frozenset[int], ...]:
    """Request ids per segment, attributed to the segment of serve *completion*."""
    clock = inst.clock
    buckets: list[set[int]] = [set() for _ in range(inst.f)]
    for a in sched.actions:
        if isinstance(a, Serve):
            buckets[clock.segment_of(action_end(inst, a)) - 1].add(a.request)
    return tuple(frozenset(b) for b in buckets)


def window_sets(inst: Instance, sched: Schedule) -> tuple[frozenset[int], ...]:
    segs = segment_sets(inst, sched)
    clock = inst.clock
    return tuple(frozenset().union(*(segs[j - 1] for j in clock.window_segments(i)))
                 for i in range(1, clock.num_windows + 1))


def set_revenue(inst: Instance, ids: Iterable[int]) -> Fraction:
    return sum((inst.requests[r].p for r in ids), Fraction(0))


def revenue_profile(inst: Instance, sched: Schedule) -> RevenueProfile:
    verdict = validate_schedule(inst, sched)
    if not verdict.feasible:
        raise RoldarpError("INFEASIBLE_SCHEDULE", f"{verdict.rule} at action {verdict.index}")
    segs = tuple(set_revenue(inst, s) for s in segment_sets(inst, sched))
    clock = inst.clock
    wins = tuple(sum((segs[j - 1] for j in clock.window_segments(i)), Fraction(0))
                 for i in range(1, clock.num_windows + 1))
    return RevenueProfile(segs, wins, sum(segs, Fraction(0)))


def schedule_along(inst: Instance, start_at: str, now: Fraction, target: str) -> tuple[list[Action], Fraction]:
    """Moves following a shortest route from ``start_at`` to ``target`` beginning at ``now``."""
    actions: list[Action] = []
    path = inst.graph.route(start_at, target)
    for u, v in zip(path, path[1:]):
        actions.append(Move(u, v, now))
        now += inst.graph.w(u, v)
    return actions, now


def ceil_fraction(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def lcm_denominator(values: Sequence[Fraction]) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, Fraction(v).denominator)
    return out
