"""Event-driven simulator for online policies facing a (possibly adaptive) request source.

A policy is consulted whenever it is free: at time 0, after each committed
action ends, and at every event (request release, segment boundary, wake-up
of the request source) while it waits. Committed actions are binding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Protocol

from .core import (
    Action,
    Instance,
    MetricGraph,
    Move,
    Request,
    RoldarpError,
    Schedule,
    Serve,
    action_end,
)


class World:
    """Growing instance: vertices, explicit distances and announced requests.

    Unlisted distances between known vertices fall back to ``default``
    (when given); an ``Instance`` is materialized on demand.
    """

    def __init__(self, origin: str, T: Fraction, f: int, default: Fraction | None = None,
                 graph: MetricGraph | None = None, k: Fraction | None = None):
        self.origin, self.T, self.f, self.k = origin, Fraction(T), f, k
        self.default = default
        self.vertices: list[str] = [origin]
        self.explicit: dict[tuple[str, str], Fraction] = {}
        self.requests: list[Request] = []
        self._graph = graph
        self._cache: Instance | None = None
        if graph is not None:
            self.vertices = list(graph.vertices)

    def add_vertex(self, *names: str) -> None:
        for v in names:
            if v not in self.vertices:
                self.vertices.append(v)
                self._cache = None

    def set_distance(self, u: str, v: str, w: Fraction) -> None:
        self.add_vertex(u, v)
        self.explicit[(u, v) if u <= v else (v, u)] = Fraction(w)
        self._cache = None

    def announce(self, req: Request) -> int:
        """Register a request (visible from its release time on); returns its id."""
        self.add_vertex(req.s, req.d)
        self.requests.append(req)
        self._cache = None
        return len(self.requests) - 1

    def instance(self) -> Instance:
        if self._cache is None:
            if self._graph is not None:
                graph = self._graph
            else:
                weights = {}
                vs = sorted(self.vertices)
                for i, u in enumerate(vs):
                    for v in vs[i + 1:]:
                        w = self.explicit.get((u, v), self.default)
                        if w is not None:
                            weights[(u, v)] = w
                graph = MetricGraph(tuple(vs), weights)
            self._cache = Instance(graph, self.origin, self.T, self.f, tuple(self.requests), self.k)
        return self._cache


class RequestSource(Protocol):
    """Supplies requests to a :class:`World`, optionally reacting to commitments."""

    def start(self, world: World) -> None: ...

    def advance_to(self, world: World, now: Fraction) -> None:
        """Make every decision due at or before ``now``."""

    def next_wake(self, now: Fraction) -> Fraction | None:
        """Earliest time strictly after ``now`` at which the source acts."""

    def observe(self, world: World, action: Action, now: Fraction) -> None:
        """See a commitment the policy just made at time ``now``."""


@dataclass
class View:
    """Everything an online policy may look at when it decides."""

    now: Fraction
    position: str
    instance: Instance
    served: frozenset[int]

    @property
    def segment_length(self) -> Fraction:
        return self.instance.segment_length

    def released(self) -> dict[int, Request]:
        return {i: r for i, r in enumerate(self.instance.requests) if r.t <= self.now}

    def pending(self) -> dict[int, Request]:
        return {i: r for i, r in self.released().items() if i not in self.served}


class OnlinePolicy(Protocol):
    def next_action(self, view: View) -> Action | None:
        """Commit to an action starting at ``view.now``, or ``None`` to wait for the next event."""


class StaticSource:
    """Replays a fixed instance: every request is known up front, revealed at its release time."""

    def __init__(self, inst: Instance):
        self.inst = inst

    def start(self, world: World) -> None:
        for r in self.inst.requests:
            world.announce(r)

    def advance_to(self, world: World, now: Fraction) -> None:
        pass

    def next_wake(self, now: Fraction) -> Fraction | None:
        later = [r.t for r in self.inst.requests if r.t > now]
        return min(later) if later else None

    def observe(self, world: World, action: Action, now: Fraction) -> None:
        pass


@dataclass
class Run:
    schedule: Schedule
    world: World
    commitments: list[tuple[Fraction, Action]] = field(default_factory=list)


def simulate(policy: OnlinePolicy, source: RequestSource, world: World) -> Run:
    """Drive ``policy`` against ``source`` until the time limit."""
    source.start(world)
    now, here = Fraction(0), world.origin
    served: set[int] = set()
    actions: list[Action] = []
    log: list[tuple[Fraction, Action]] = []
    T = world.T
    while now < T:
        source.advance_to(world, now)
        inst = world.instance()
        act = policy.next_action(View(now, here, inst, frozenset(served)))
        if act is None:
            L = inst.segment_length
            candidates = [(now // L + 1) * L, T]
            wake = source.next_wake(now)
            if wake is not None:
                candidates.append(wake)
            candidates += [r.t for r in inst.requests if r.t > now]
            now = min(c for c in candidates if c > now)
            continue
        if act.start != now:
            raise RoldarpError("POLICY_ERROR", f"action {act} does not start at {now}")
        if isinstance(act, Move):
            if act.u != here or not inst.graph.has_edge(act.u, act.v):
                raise RoldarpError("POLICY_ERROR", f"illegal move {act} from {here}")
            here = act.v
        elif isinstance(act, Serve):
            req = inst.requests[act.request]
            if req.s != here or req.t > now or act.request in served:
                raise RoldarpError("POLICY_ERROR", f"illegal serve {act}")
            served.add(act.request)
            here = req.d
        elif act.duration <= 0:
            raise RoldarpError("POLICY_ERROR", f"empty idle {act}")
        end = action_end(inst, act)
        if end > T:
            raise RoldarpError("POLICY_ERROR", f"{act} ends after T")
        actions.append(act)
        log.append((now, act))
        source.observe(world, act, now)
        now = end
    source.advance_to(world, T)
    return Run(Schedule(tuple(actions)), world, log)


class IdlePolicy:
    """Never moves."""

    def next_action(self, view: View) -> Action | None:
        return None


def run_static(policy: OnlinePolicy, inst: Instance) -> Run:
    world = World(inst.origin, inst.T, inst.f, graph=inst.graph, k=inst.k)
    return simulate(policy, StaticSource(inst), world)
