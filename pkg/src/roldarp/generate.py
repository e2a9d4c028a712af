"""Seeded random instances.

Randomness comes from numpy's counter-based Philox generator keyed by the
seed, so a (seed, parameters) pair always yields the same instance on every
platform. Draws happen in a fixed order: segment length, edge weights,
then per request source, destination, release time and revenue.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Instance, MetricGraph, Request, RoldarpError, metric_closure, scalar


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _draw(rng: np.random.Generator, lo: int, hi: int) -> int:
    """Uniform integer in [lo, hi]."""
    return int(rng.integers(lo, hi, endpoint=True))


def random_instance(seed: int, vertices: int = 5, requests: int = 6, f: int = 4,
                    L: int | None = None, uniform: bool = False, bipartite: bool = False,
                    k=None, max_revenue: int = 10) -> Instance:
    """Integer-weighted instance; bipartite mode puts sources in V1 and destinations plus origin in V2."""
    if vertices < 2 or requests < 0 or f < 1:
        raise RoldarpError("BAD_PARAMS", "need at least 2 vertices, f >= 1 and requests >= 0")
    rng = rng_for(seed)
    L = _draw(rng, 2, 6) if L is None else L
    T = f * L
    names = [f"v{i}" for i in range(vertices)]
    if bipartite:
        k = Fraction(1) if k is None else scalar(k)
        if not (0 < k <= 1):
            raise RoldarpError("BAD_K", f"k must lie in (0, 1], got {k}")
        n1 = vertices // 2
        if n1 < 1 or vertices - n1 < 1:
            raise RoldarpError("BAD_PARAMS", "bipartite mode needs at least one vertex per side")
        v1, v2 = names[:n1], names[n1:]
        lo = max(1, math.ceil(k * L))
        weights = {(a, b): _draw(rng, lo, L) for a in v1 for b in v2}
        graph = metric_closure(MetricGraph(tuple(names), weights, (frozenset(v1), frozenset(v2))))
        origin, sources, dests = v2[0], v1, v2
    else:
        k = None
        weights = {(a, b): _draw(rng, 1, L) for i, a in enumerate(names) for b in names[i + 1:]}
        graph = metric_closure(MetricGraph(tuple(names), weights))
        origin, sources, dests = names[0], names, names
    reqs = []
    for _ in range(requests):
        s = sources[_draw(rng, 0, len(sources) - 1)]
        choices = [d for d in dests if d != s]
        d = choices[_draw(rng, 0, len(choices) - 1)]
        t = _draw(rng, 0, T)
        p = 1 if uniform else _draw(rng, 1, max_revenue)
        reqs.append(Request(s, d, t, p))
    return Instance(graph, origin, Fraction(T), f, tuple(reqs), k)


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    seed: int
    kind: str
    instance: Instance


CORPUS_KINDS = ("general", "general-uniform", "bipartite-uniform", "bipartite")
CORPUS_KS = (Fraction(1), Fraction(1, 2), Fraction(2, 5))


def corpus(size: int = 200, base_seed: int = 20240601, max_requests: int = 8,
           max_vertices: int = 6, fs=(4, 6, 8)) -> list[CorpusEntry]:
    """Mixed corpus cycling through general/bipartite and uniform/nonuniform instances."""
    out = []
    for i in range(size):
        seed = base_seed + i
        rng = rng_for(seed ^ 0x5EED)
        kind = CORPUS_KINDS[i % 4]
        n = _draw(rng, 3, max_vertices)
        m = _draw(rng, 1, max_requests)
        f = fs[_draw(rng, 0, len(fs) - 1)]
        bip = kind.startswith("bipartite")
        k = CORPUS_KS[(i // 4) % len(CORPUS_KS)] if bip else None
        inst = random_instance(seed, vertices=max(n, 2), requests=m, f=f,
                               uniform=kind.endswith("uniform"), bipartite=bip, k=k)
        out.append(CorpusEntry(f"{kind}-{i:03d}", seed, kind, inst))
    return out
