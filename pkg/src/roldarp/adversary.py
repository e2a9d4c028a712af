"""Lower-bound instance families: the static SBP instance and adaptive adversaries.

The adaptive drivers only watch the actions a policy commits to. The one
exception is the first-horizon driver telling "never heads for a source"
apart from "heads there late": it answers that by running a private copy of
the (deterministic) policy forward, which a deterministic adversary may do.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    Action,
    Instance,
    MetricGraph,
    Move,
    Request,
    RoldarpError,
    Schedule,
    Serve,
    scalar,
    triangle_violations,
)
from .online import OnlinePolicy, Run, World, simulate
from .oracle import OptResult, optimal_offline


# -- static family -------------------------------------------------------------

@dataclass(frozen=True)
class Fig1Params:
    f: int
    h: Fraction
    B: Fraction
    eps: Fraction

    def __post_init__(self):
        for name in ("h", "B", "eps"):
            object.__setattr__(self, name, scalar(getattr(self, name)))
        if self.f <= 2 or self.f % 2:
            raise RoldarpError("BAD_PARAMS", f"f must be an even integer > 2, got {self.f}")
        if self.h <= 1:
            raise RoldarpError("BAD_PARAMS", f"h must exceed 1, got {self.h}")
        if self.B <= 0 or not (0 < self.eps < 1):
            raise RoldarpError("BAD_PARAMS", "need B > 0 and 0 < eps < 1")
        if self.m < 1:
            raise RoldarpError("BAD_PARAMS", f"bottom chain length m = {self.m} < 1")

    @property
    def m(self) -> int:
        f, h = self.f, self.h
        return math.floor((3 * h * f - 4 * h - f + 2) / (2 * (h + 1)))

    @property
    def T(self) -> Fraction:
        return 2 * self.h * self.f

    def arrival(self, k: int) -> Fraction:
        """Time the witness route reaches u_{2k}."""
        return 1 + self.m * (self.h + 1) + (1 + self.h) * (k - 1)

    def witness_revenue(self) -> Fraction:
        return self.m * self.B + (2 * self.B + self.eps) * Fraction(self.f - 4, 2)

    def sbp_revenue(self) -> Fraction:
        return self.eps + (Fraction(self.f, 2) - 1) * (self.B + self.eps)


def gen_fig1(params: Fig1Params) -> tuple[Instance, Schedule]:
    """Top row u_1..u_f that SBP walks, bottom chain v_1..v_m that the witness exploits.

    Returns the instance and the witness schedule o, v_1..v_m, u_2..u_{f-2}.
    """
    f, h, B, eps, m = params.f, params.h, params.B, params.eps, params.m
    u = [None] + [f"u{i}" for i in range(1, f + 1)]
    v = [None] + [f"v{i}" for i in range(1, m + 1)]
    vertices = ["o"] + u[1:] + v[1:]
    special: dict[tuple[str, str], Fraction] = {("o", "u1"): Fraction(1), ("o", "v1"): Fraction(1)}
    for i in range(1, f):
        special[(u[i], u[i + 1])] = Fraction(1) if i % 2 else h
    for i in range(1, m):
        special[(v[i], v[i + 1])] = h + 1
    special[(v[m], "u2")] = h + 1
    special = {(min(a, b), max(a, b)): w for (a, b), w in special.items()}
    weights = {}
    for i, a in enumerate(vertices):
        for b in vertices[i + 1:]:
            key = (min(a, b), max(a, b))
            weights[key] = special.get(key, h)
    graph = MetricGraph(tuple(vertices), weights)

    reqs = [Request("u1", "u2", 0, eps)]
    for i in range(1, f // 2):
        reqs.append(Request(u[2 * i + 1], u[2 * i + 2], 4 * i * h, B + eps))
    top_b = {}
    for i in range(1, f // 2):
        top_b[i] = len(reqs)
        reqs.append(Request(u[2 * i], u[2 * i + 1], 4 * i * h + 1, B))
    bottom = []
    for i in range(1, m):
        bottom.append(len(reqs))
        reqs.append(Request(v[i], v[i + 1], 1, B))
    bottom.append(len(reqs))
    reqs.append(Request(v[m], "u2", 1, B))
    inst = Instance(graph, "o", params.T, f, tuple(reqs))

    # witness: o -> v1, bottom chain into u2, then both top requests of each pair
    actions: list[Action] = [Move("o", "v1", Fraction(0))]
    now = Fraction(1)
    for r in bottom:
        actions.append(Serve(r, now))
        now += inst.serve_time(r)
    for k in range(1, f // 2 - 1):
        actions.append(Serve(top_b[k], now))
        now += inst.serve_time(top_b[k])
        actions.append(Serve(k, now))
        now += inst.serve_time(k)
    return inst, Schedule(tuple(actions))


# -- adaptive drivers ------------------------------------------------------------

@dataclass
class Transcript:
    adversary: str
    case: str
    instance: Instance
    policy_schedule: Schedule
    policy_revenue: Fraction
    opt: OptResult
    horizon: Fraction
    preclosed: bool = False
    params: dict = field(default_factory=dict)

    @property
    def opt_revenue(self) -> Fraction:
        return self.opt.revenue

    @property
    def ratio(self) -> Fraction | None:
        """OPT / policy revenue, or None when the policy earned nothing."""
        if self.policy_revenue == 0:
            return None
        return self.opt.revenue / self.policy_revenue


def _commit_target(action: Action, inst: Instance) -> str:
    if isinstance(action, Move):
        return action.v
    if isinstance(action, Serve):
        return inst.requests[action.request].s
    return ""


class _Adaptive:
    """Shared plumbing: timed releases scheduled in advance or decided on the fly."""

    def __init__(self):
        self.timed: list[tuple[Fraction, str]] = []
        self.log: list[tuple[Fraction, Action]] = []
        self.case = ""

    def at(self, when: Fraction, tag: str) -> None:
        self.timed.append((Fraction(when), tag))
        self.timed.sort()

    def advance_to(self, world: World, now: Fraction) -> None:
        while self.timed and self.timed[0][0] <= now:
            when, tag = self.timed.pop(0)
            self.fire(world, when, tag)

    def next_wake(self, now: Fraction) -> Fraction | None:
        later = [t for t, _ in self.timed if t > now]
        return min(later) if later else None

    def observe(self, world: World, action: Action, now: Fraction) -> None:
        self.log.append((now, action))
        self.react(world, action, now)

    def react(self, world: World, action: Action, now: Fraction) -> None:
        pass

    def fire(self, world: World, when: Fraction, tag: str) -> None:
        raise NotImplementedError


class LastWindowSource(_Adaptive):
    """Bait at T - 2T/f; punish a commitment to it with a payoff the policy cannot reach."""

    def __init__(self, uniform: bool, k: int, delta: Fraction, eps: Fraction):
        super().__init__()
        self.uniform, self.k, self.delta, self.eps = uniform, k, delta, eps
        self.bait: int | None = None
        self.case = "ignored"

    def start(self, world: World) -> None:
        L = world.T / world.f
        self.t0 = world.T - 2 * L
        self.at(self.t0, "bait")

    def fire(self, world: World, when: Fraction, tag: str) -> None:
        if tag == "bait":
            world.add_vertex("s", "d")
            world.set_distance("s", "d", world.T / world.f)
            self.bait = world.announce(Request("s", "d", when, 1))
        elif tag == "payoff":
            L = world.T / world.f
            a = world.origin  # the optimal server idles at the origin until then
            if self.uniform:
                chain = [a] + [f"c{i}" for i in range(1, self.k + 1)]
                for i, x in enumerate(chain):
                    for j in range(i + 1, len(chain)):
                        world.set_distance(x, chain[j], (j - i) * self.eps)
                for x, y in zip(chain, chain[1:]):
                    world.announce(Request(x, y, when, 1))
            else:
                world.set_distance(a, "b", L)
                world.announce(Request(a, "b", when, self.k))

    def react(self, world: World, action: Action, now: Fraction) -> None:
        if self.bait is None or self.case != "ignored" or now < self.t0:
            return
        if _commit_target(action, world.instance()) == "s":
            self.case = "committed"
            self.at(self.t0 + self.delta, "payoff")


def adaptive_last_window(policy: OnlinePolicy, T=20, f: int = 4, uniform: bool = False,
                         k: int = 100, delta=None, eps=None) -> Transcript:
    """Duel for the final two segments: whatever the policy does there, OPT out-earns it k-fold."""
    T = scalar(T)
    if f < 2 or k < 1:
        raise RoldarpError("BAD_PARAMS", "need f >= 2 and k >= 1")
    L = T / f
    delta = L / 2 if delta is None else scalar(delta)
    eps = L / (2 * k) if eps is None else scalar(eps)
    if not (0 < delta and delta + (k * eps if uniform else L) <= 2 * L and k * eps <= L):
        raise RoldarpError("BAD_PARAMS", "delta/eps leave OPT no time for the payoff")
    source = LastWindowSource(uniform, k, delta, eps)
    world = World("o", T, f, default=L)
    run = simulate(copy.deepcopy(policy), source, world)
    return _finish("last-window", source.case, run, T, dict(T=T, f=f, uniform=uniform, k=k,
                                                            delta=delta, eps=eps))


class FirstHorizonSource(_Adaptive):
    """Case analysis for the first T - 2T/f time units with f = 5 and segment length X."""

    def __init__(self, uniform: bool, X: Fraction, k: int, eps: Fraction, delta: Fraction,
                 eventual_departure: Fraction | None):
        super().__init__()
        self.uniform, self.X, self.k, self.eps, self.delta = uniform, X, k, eps, delta
        self.eventual = eventual_departure
        self.t1: Fraction | None = None
        self.first: int | None = None  # which initial request the policy went for
        self.t2: Fraction | None = None
        self.t2_side: str | None = None
        self.served_initial = False
        self.case = "1"

    # initial sources: a1/a2 (nonuniform) or a1/b1 (uniform)
    def sources(self) -> tuple[str, str]:
        return ("a1", "b1") if self.uniform else ("a1", "a2")

    def start(self, world: World) -> None:
        self.at(self.X, "initial")

    def fire(self, world: World, when: Fraction, tag: str) -> None:
        X, eps, delta = self.X, self.eps, self.delta
        if tag == "initial":
            if self.uniform:
                world.announce(Request("a1", "a2", X, 1))
                world.announce(Request("b1", "b2", X, 1))
            else:
                world.announce(Request("a1", "b1", X, eps))
                world.announce(Request("a2", "b2", X, eps))
            self.initial = (0, 1)
            if self.eventual is not None and self.eventual > 2 * X:
                self.at(2 * X + (delta if self.uniform else 1), "late")
        elif tag == "r3_2a":
            other = 1 - self.first
            if self.uniform:
                b = ("b2", "b3") if other == 1 else ("a2", "a3")
                world.announce(Request(b[0], b[1], 2 * X, 1))
            else:
                b = ("b2", "c2") if other == 1 else ("b1", "c1")
                world.announce(Request(b[0], b[1], 2 * X, eps))
        elif tag in ("r3_2b", "late"):
            if tag == "late":
                self.case = "2c"
                other = 1
            else:
                other = 1 - self.first
            if self.uniform:
                tail = "b2" if other == 1 else "a2"
                c, d = ("b3", "b4") if other == 1 else ("a3", "a4")
                world.set_distance(tail, c, delta)
                world.set_distance(c, d, X - delta)
                world.announce(Request(c, d, 2 * X + delta, 1))
            else:
                tail = "b2" if other == 1 else "b1"
                c, d = ("c2", "d2") if other == 1 else ("c1", "d1")
                world.set_distance(tail, c, Fraction(1))
                world.set_distance(c, d, X - 1)
                world.announce(Request(c, d, 2 * X + 1, eps))
        elif tag == "case3":
            self._release_case3(world)
        elif tag == "r5":
            self._release_final(world, when)

    def _release_case3(self, world: World) -> None:
        X, k = self.X, self.k
        if self.uniform:
            for name in ("c", "d"):
                chain = [f"{name}{i}" for i in range(k + 1)]
                for i in range(k + 1):
                    for j in range(i + 1, k + 1):
                        world.set_distance(chain[i], chain[j], (j - i) * X / k)
                for x, y in zip(chain, chain[1:]):
                    world.announce(Request(x, y, X + self.delta, 1))
            self.at(3 * X - self.delta, "r5")
        else:
            world.announce(Request("a3", "b3", X + 1, 1))
            world.announce(Request("a4", "b4", X + 1, 1))
            self.at(3 * X - 1, "r5")

    def _release_final(self, world: World, when: Fraction) -> None:
        X, k, delta = self.X, self.k, self.delta
        if self.served_initial:
            self.case = "3a"
        elif self.t2 is not None:
            self.case = "3b-i"
        else:
            self.case = "3b-ii"
        if self.uniform:
            # the e-chain hangs off the family the policy did not head for
            near = "c" if self.t2_side == "d" else "d"
            far = "d" if near == "c" else "c"
            w = 3 * X - when
            gap = X - delta - w
            # with a zero gap the chain starts right at the end of the other family
            es = [f"{near}{k}" if gap == 0 else "e0"] + [f"e{i}" for i in range(1, k + 1)]
            for i in range(k + 1):
                for j in range(i + 1, k + 1):
                    world.set_distance(es[i], es[j], (j - i) * w / k)
            if gap:
                world.set_distance("e0", f"{near}{k}", gap)
                world.set_distance("e0", f"{far}{k}", X)
            for x, y in zip(es, es[1:]):
                world.announce(Request(x, y, when, 1))
        else:
            side = "3" if self.t2_side == "4" else "4"
            world.set_distance(f"b{side}", f"c{side}", X - 2)
            world.set_distance(f"c{side}", f"d{side}", Fraction(1))
            world.announce(Request(f"c{side}", f"d{side}", 3 * X - 1, 1))

    def react(self, world: World, action: Action, now: Fraction) -> None:
        X = self.X
        inst = world.instance()
        target = _commit_target(action, inst)
        srcs = self.sources()
        if self.t1 is None:
            if now >= X and target in srcs:
                self.t1, self.first = now, srcs.index(target)
                if now == X:
                    self.case = "3"
                    if self.uniform:
                        self.at(X + self.delta, "case3")
                    else:
                        self.at(X + 1, "case3")
                elif now < 2 * X:
                    self.case = "2a"
                    self.at(2 * X, "r3_2a")
                elif now == 2 * X:
                    self.case = "2b"
                    self.at(2 * X + (self.delta if self.uniform else 1), "r3_2b")
            return
        if not self.case.startswith("3") or self.t2 is not None or self.served_initial:
            return
        if now < 2 * X:
            return
        deadline = 3 * X - (self.delta if self.uniform else 1)
        if now >= deadline:
            return
        if isinstance(action, Serve) and action.request in (0, 1):
            self.served_initial = True
            return
        if isinstance(action, Move):
            self.t2 = now
            dest = action.v
            if self.uniform:
                self.t2_side = "c" if dest.startswith("c") else "d" if dest.startswith("d") else None
                # release the e-chain delta after departure
                self.timed = [(t, tag) for t, tag in self.timed if tag != "r5"]
                self.at(now + self.delta, "r5")
            else:
                self.t2_side = "3" if dest.endswith("3") else "4" if dest.endswith("4") else None


def _first_departure(policy: OnlinePolicy, uniform: bool, X: Fraction, eps: Fraction) -> Fraction | None:
    """When a private copy of the policy first heads for an initial source, if ever."""
    probe = FirstHorizonSource(uniform, X, 1, eps, X / 4, None)
    run = simulate(copy.deepcopy(policy), probe, World("a0", 5 * X, 5, default=X))
    srcs = probe.sources()
    inst = run.world.instance()
    for now, action in run.commitments:
        if now >= X and _commit_target(action, inst) in srcs:
            return now
    return None


def adaptive_first_horizon(policy: OnlinePolicy, uniform: bool = False, X=6, k: int = 4,
                           eps=Fraction(1, 100), delta=None) -> Transcript:
    """Duel over the first 3X time units (f = 5, T = 5X); OPT there earns twice the policy."""
    X = scalar(X)
    eps = scalar(eps)
    if k < 1:
        raise RoldarpError("BAD_PARAMS", "k must be >= 1")
    delta = X / (4 * k) if delta is None else scalar(delta)
    if uniform and not (0 < delta < X / (2 * k)):
        raise RoldarpError("BAD_PARAMS", f"need 0 < delta < X/(2k) = {X / (2 * k)}")
    if not uniform and (X < 3 or not (0 < eps < 1)):
        raise RoldarpError("BAD_PARAMS", "need X >= 3 and 0 < eps < 1")
    departure = _first_departure(policy, uniform, X, eps)
    source = FirstHorizonSource(uniform, X, k, eps, delta, departure)
    run = simulate(copy.deepcopy(policy), source, World("a0", 5 * X, 5, default=X))
    return _finish("first-horizon", source.case, run, 3 * X,
                   dict(uniform=uniform, X=X, k=k, eps=eps, delta=delta))


def _finish(name: str, case: str, run: Run, horizon: Fraction, params: dict) -> Transcript:
    inst = run.world.instance()
    sched = run.schedule
    policy_revenue = sched.revenue(inst)
    opt = optimal_offline(inst, horizon)
    return Transcript(name, case, inst, sched, policy_revenue, opt, horizon,
                      preclosed=bool(triangle_violations(inst.graph)), params=params)
