from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from roldarp.core import Instance, MetricGraph, Request  # noqa: E402
from roldarp.generate import corpus  # noqa: E402

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def make_instance(edges, requests=(), T=12, f=4, origin="o", vertices=None, k=None, bipartition=None):
    """Small instance from {(u, v): w} and (s, d, t, p) tuples."""
    names = set(vertices or ())
    for u, v in edges:
        names |= {u, v}
    names.add(origin)
    graph = MetricGraph(tuple(names), {e: Fraction(w) for e, w in edges.items()}, bipartition)
    reqs = tuple(Request(s, d, Fraction(t), Fraction(p)) for s, d, t, p in requests)
    return Instance(graph, origin, Fraction(T), f, reqs, k)


def complete(names, w):
    names = list(names)
    return {(a, b): w for i, a in enumerate(names) for b in names[i + 1:]}


@pytest.fixture(scope="session")
def the_corpus():
    return corpus()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, label = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} | {label}")
