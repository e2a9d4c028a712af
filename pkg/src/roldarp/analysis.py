"""Window bookkeeping, proof-device schedules and instance-wise bound checks.

The auxiliary schedules here are sequences of per-window request sets, not
replayable schedules: some of them (the one-window shift in particular) are
infeasible by construction, and every check is a set or revenue computation.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import (
    Instance,
    RoldarpError,
    Schedule,
    ceil_fraction,
    require_valid,
    segment_sets,
    set_revenue,
    window_sets,
)
from .oracle import OptResult, optimal_offline
from .sbp import SBPResult, run_sbp

WindowSets = tuple[frozenset[int], ...]
BOUNDS = ("THM4", "THM6", "THM7", "THM8", "LEM3", "LEM8", "LEM9")


def shift_one_window(windows: Sequence[frozenset[int]]) -> WindowSets:
    """Serve each window's set one window earlier; window 1 is dropped."""
    return tuple(windows[1:])


@dataclass(frozen=True)
class WindowCells:
    richer: frozenset[int]   # S*_i
    poorer: frozenset[int]   # J*_i
    shifted: frozenset[int]  # S'_i
    A: frozenset[int]
    X_star: frozenset[int]
    Y_star: frozenset[int]
    X: frozenset[int]
    Y: frozenset[int]


@dataclass(frozen=True)
class WindowDecomposition:
    windows: tuple[WindowCells, ...]

    def prefix_counts(self) -> list[tuple[int, int]]:
        """(|X*_1|+..+|X*_i|, |Y_1|+..+|Y_i|) for every i."""
        out, xs, ys = [], 0, 0
        for c in self.windows:
            xs += len(c.X_star)
            ys += len(c.Y)
            out.append((xs, ys))
        return out


def _check_disjoint(family: Sequence[frozenset[int]], what: str) -> None:
    seen: set[int] = set()
    for s in family:
        if seen & s:
            raise RoldarpError("INCONSISTENT_INPUTS", f"{what} repeats requests {sorted(seen & s)}")
        seen |= s


def decompose_windows(inst: Instance, opt_segments: Sequence[frozenset[int]],
                      shifted: Sequence[frozenset[int]]) -> WindowDecomposition:
    """Split OPT's richer segment and the shifted SBP set of each window into the five cells.

    Covers windows 1..ceil(f/2)-1; the richer segment goes to the earlier one on ties.
    """
    _check_disjoint(opt_segments, "OPT")
    _check_disjoint(shifted, "shifted SBP")
    m = inst.clock.num_windows - 1
    stars, poors = [], []
    for i in range(1, m + 1):
        a, b = opt_segments[2 * i - 2], opt_segments[2 * i - 1]
        if set_revenue(inst, a) >= set_revenue(inst, b):
            stars.append(a)
            poors.append(b)
        else:
            stars.append(b)
            poors.append(a)
    primes = [shifted[i] if i < len(shifted) else frozenset() for i in range(m)]
    cells = []
    for i in range(m):
        s, p = stars[i], primes[i]
        earlier_p = frozenset().union(*primes[:i])
        earlier_s = frozenset().union(*stars[:i])
        A = s & p
        cells.append(WindowCells(
            richer=s, poorer=poors[i], shifted=p, A=A,
            X_star=(s & earlier_p) - A, Y_star=s - earlier_p - p,
            X=(p & earlier_s) - A, Y=p - earlier_s - s,
        ))
    return WindowDecomposition(tuple(cells))


def opt_echo_schedule(inst: Instance, opt: Schedule) -> WindowSets:
    """Window 1 empty; window i holds the richest request OPT finished in window i-1."""
    wins = window_sets(inst, opt)
    out = [frozenset()]
    for prev in wins[:-1]:
        if prev:
            best = min(prev, key=lambda r: (-inst.requests[r].p, r))
            out.append(frozenset({best}))
        else:
            out.append(frozenset())
    return tuple(out)


def greedy_singleton_schedule(inst: Instance) -> WindowSets:
    """One richest released request per window: travel in the first segment, serve in the second."""
    require_valid(inst)
    clock = inst.clock
    L = clock.length
    g = inst.graph
    here = inst.origin
    done: set[int] = set()
    out = []
    for i in range(1, clock.num_windows + 1):
        segs = clock.window_segments(i)
        start = clock.start(segs[0])
        room = clock.end(segs[-1]) - start
        choice = None
        for r, req in enumerate(inst.requests):
            if r in done or req.t > start:
                continue
            reach = g.dist(here, req.s)
            # two-segment windows give a full segment to each leg
            fits = (reach <= L and inst.serve_time(r) <= L) if len(segs) == 2 \
                else reach + inst.serve_time(r) <= room
            if fits and (choice is None or req.p > inst.requests[choice].p):
                choice = r
        if choice is None:
            out.append(frozenset())
        else:
            done.add(choice)
            here = inst.requests[choice].d
            out.append(frozenset({choice}))
    return tuple(out)


def sorted_revenues(inst: Instance, windows: Sequence[frozenset[int]], length: int) -> list[Fraction]:
    vals = sorted((inst.requests[r].p for w in windows for r in w), reverse=True)
    return vals + [Fraction(0)] * (length - len(vals))


@dataclass
class BoundReport:
    bound: str
    lhs: Fraction
    rhs: Fraction
    terms: dict = field(default_factory=dict)
    instance_id: str = ""

    @property
    def slack(self) -> Fraction:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.slack >= 0

    def to_json(self) -> dict:
        from .serialize import enc
        return {
            "bound": self.bound,
            "instance": self.instance_id,
            "lhs": enc(self.lhs),
            "rhs": enc(self.rhs),
            "slack": enc(self.slack),
            "holds": self.holds,
            "terms": {k: enc(v) if isinstance(v, (Fraction, int)) and not isinstance(v, bool) else v
                      for k, v in self.terms.items()},
        }

    CSV_FIELDS = ("bound", "instance", "lhs", "rhs", "slack", "holds")

    def csv_row(self) -> list[str]:
        return [self.bound, self.instance_id, str(self.lhs), str(self.rhs), str(self.slack),
                str(self.holds).lower()]


def reports_to_csv(reports: Sequence[BoundReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BoundReport.CSV_FIELDS)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


@dataclass
class Evaluation:
    """OPT and SBP for one instance, computed once and shared by all checks."""

    inst: Instance
    opt: OptResult
    sbp: SBPResult

    @classmethod
    def of(cls, inst: Instance) -> "Evaluation":
        require_valid(inst)
        return cls(inst, optimal_offline(inst), run_sbp(inst))

    def opt_segments(self) -> WindowSets:
        return segment_sets(self.inst, self.opt.schedule)

    def opt_segment_revenue(self) -> list[Fraction]:
        return [set_revenue(self.inst, s) for s in self.opt_segments()]


def _uniform_value(inst: Instance) -> Fraction:
    if not inst.requests:
        return Fraction(0)
    if not inst.is_uniform:
        raise RoldarpError("HYPOTHESIS_VIOLATED", "bound needs equal revenues on every request")
    return inst.requests[0].p


def _bipartite_k(inst: Instance) -> Fraction:
    if inst.graph.bipartition is None or inst.k is None:
        raise RoldarpError("HYPOTHESIS_VIOLATED", "bound needs a bipartite instance with k")
    return inst.k


def check_bound(inst: Instance, bound: str, ev: Evaluation | None = None,
                instance_id: str = "") -> BoundReport:
    bound = bound.upper()
    if bound not in BOUNDS:
        raise RoldarpError("UNKNOWN_BOUND", bound)
    # hypotheses before the expensive part
    if bound in ("THM6", "THM7"):
        _uniform_value(inst)
    if bound in ("THM7", "THM8"):
        _bipartite_k(inst)
    ev = ev or Evaluation.of(inst)
    rep = _CHECKS[bound](ev)
    rep.instance_id = instance_id
    return rep


def _thm4(ev: Evaluation) -> BoundReport:
    segs = ev.opt_segment_revenue()
    c = sum(segs[-2:], Fraction(0))
    return BoundReport("THM4", ev.opt.revenue, 5 * ev.sbp.revenue + c,
                       {"opt": ev.opt.revenue, "sbp": ev.sbp.revenue, "c": c})


def _thm6(ev: Evaluation) -> BoundReport:
    p0 = _uniform_value(ev.inst)
    segs = ev.opt_segment_revenue()
    c = sum(segs[-2:], Fraction(0))
    mu = ev.inst.clock.num_windows
    # the additive term counts requests, so it scales with the common revenue
    extra = 2 * mu * p0
    return BoundReport("THM6", ev.opt.revenue, 4 * ev.sbp.revenue + extra + c,
                       {"opt": ev.opt.revenue, "sbp": ev.sbp.revenue, "c": c, "additive": extra})


def _thm7(ev: Evaluation) -> BoundReport:
    p0 = _uniform_value(ev.inst)
    r = ceil_fraction(1 / _bipartite_k(ev.inst))
    return BoundReport("THM7", ev.opt.revenue, r * ev.sbp.revenue + r * p0,
                       {"opt": ev.opt.revenue, "sbp": ev.sbp.revenue, "capacity": r, "p0": p0})


def _thm8(ev: Evaluation) -> BoundReport:
    r = ceil_fraction(1 / _bipartite_k(ev.inst))
    last = window_sets(ev.inst, ev.opt.schedule)[-1]
    c = set_revenue(ev.inst, last)
    return BoundReport("THM8", ev.opt.revenue, r * ev.sbp.revenue + c,
                       {"opt": ev.opt.revenue, "sbp": ev.sbp.revenue, "capacity": r, "c": c})


def _lem3(ev: Evaluation) -> BoundReport:
    shifted = shift_one_window(window_sets(ev.inst, ev.sbp.schedule))
    dec = decompose_windows(ev.inst, ev.opt_segments(), shifted)
    counts = dec.prefix_counts()
    if not counts:
        return BoundReport("LEM3", Fraction(0), Fraction(0), {"windows": 0})
    i, (xs, ys) = min(enumerate(counts, 1), key=lambda t: (t[1][1] - t[1][0], t[0]))
    return BoundReport("LEM3", Fraction(xs), Fraction(ys), {"window": i, "windows": len(counts)})


def _lem8(ev: Evaluation) -> BoundReport:
    mu = ev.inst.clock.num_windows
    echo = sorted_revenues(ev.inst, opt_echo_schedule(ev.inst, ev.opt.schedule), mu)
    greedy = sorted_revenues(ev.inst, greedy_singleton_schedule(ev.inst), mu)
    z = min(range(mu), key=lambda j: (greedy[j] - echo[j], j))
    return BoundReport("LEM8", echo[z], greedy[z], {"z": z + 1, "echo_total": sum(echo, Fraction(0)),
                                                     "greedy_total": sum(greedy, Fraction(0))})


def _lem9(ev: Evaluation) -> BoundReport:
    greedy = set_revenue(ev.inst, frozenset().union(*greedy_singleton_schedule(ev.inst)))
    return BoundReport("LEM9", greedy, ev.sbp.revenue, {"sbp": ev.sbp.revenue, "greedy": greedy})


_CHECKS = {"THM4": _thm4, "THM6": _thm6, "THM7": _thm7, "THM8": _thm8,
           "LEM3": _lem3, "LEM8": _lem8, "LEM9": _lem9}


def applicable_bounds(inst: Instance) -> list[str]:
    out = ["THM4"]
    uniform = inst.is_uniform
    bip = inst.graph.bipartition is not None and inst.k is not None
    if uniform:
        out.append("THM6")
    if bip and uniform:
        out.append("THM7")
    if bip:
        out.append("THM8")
    return out + ["LEM3", "LEM8", "LEM9"]


def report_all(inst: Instance, bounds: Sequence[str] | None = None, instance_id: str = "") -> list[BoundReport]:
    ev = Evaluation.of(inst)
    return [check_bound(inst, b, ev, instance_id) for b in (bounds or applicable_bounds(inst))]
