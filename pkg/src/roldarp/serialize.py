"""JSON encoding for instances, schedules and reports.

Rationals are ``{"num": n, "den": d}`` objects. Field order is fixed and
vertex-keyed arrays follow canonical (lexicographic) vertex order, so equal
inputs always produce byte-identical files.
"""
from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

from .core import (
    Idle,
    Instance,
    MetricGraph,
    Move,
    Request,
    RoldarpError,
    Schedule,
    Serve,
    metric_closure,
    scalar,
)


def enc(x: Fraction) -> dict:
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator}


def dec(obj) -> Fraction:
    if isinstance(obj, dict):
        if obj.get("den", 1) == 0:
            raise RoldarpError("BAD_RATIONAL", "zero denominator")
        return Fraction(obj["num"], obj.get("den", 1))
    return scalar(obj)


def instance_to_json(inst: Instance) -> dict:
    g = inst.graph
    out = {
        "vertices": list(g.vertices),
        "origin": inst.origin,
        "edges": [{"u": u, "v": v, "w": enc(w)} for (u, v), w in g.weights.items()],
        "T": enc(inst.T),
        "f": inst.f,
    }
    if inst.k is not None:
        out["k"] = enc(inst.k)
    if g.bipartition is not None:
        out["bipartition"] = {"V1": sorted(g.bipartition[0]), "V2": sorted(g.bipartition[1])}
    out["requests"] = [{"s": r.s, "d": r.d, "t": enc(r.t), "p": enc(r.p)} for r in inst.requests]
    return out


def instance_from_json(obj: dict) -> Instance:
    """Parse an instance; an incomplete edge list is completed by metric closure."""
    try:
        bip = obj.get("bipartition")
        bipartition = (frozenset(bip["V1"]), frozenset(bip["V2"])) if bip else None
        weights = {(e["u"], e["v"]): dec(e["w"]) for e in obj["edges"]}
        graph = MetricGraph(tuple(obj["vertices"]), weights, bipartition)
        if not graph.is_complete():
            graph = metric_closure(graph)
        requests = tuple(Request(r["s"], r["d"], dec(r["t"]), dec(r["p"])) for r in obj["requests"])
        k = dec(obj["k"]) if obj.get("k") is not None else None
        return Instance(graph, obj["origin"], dec(obj["T"]), int(obj["f"]), requests, k)
    except (KeyError, TypeError, ValueError) as exc:
        raise RoldarpError("BAD_INSTANCE_JSON", str(exc)) from None


def action_to_json(a) -> dict:
    if isinstance(a, Move):
        return {"type": "move", "u": a.u, "v": a.v, "start": enc(a.start)}
    if isinstance(a, Serve):
        return {"type": "serve", "request": a.request, "start": enc(a.start)}
    return {"type": "idle", "start": enc(a.start), "duration": enc(a.duration)}


def schedule_to_json(sched: Schedule) -> list:
    return [action_to_json(a) for a in sched.actions]


def schedule_from_json(arr: list) -> Schedule:
    actions = []
    for a in arr:
        kind = a.get("type")
        if kind == "move":
            actions.append(Move(a["u"], a["v"], dec(a["start"])))
        elif kind == "serve":
            actions.append(Serve(int(a["request"]), dec(a["start"])))
        elif kind == "idle":
            actions.append(Idle(dec(a["start"]), dec(a["duration"])))
        else:
            raise RoldarpError("BAD_SCHEDULE_JSON", f"unknown action type {kind!r}")
    return Schedule(tuple(actions))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json(path: str | os.PathLike):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_instance(path: str | os.PathLike) -> Instance:
    obj = load_json(path)
    # accept a transcript or report that embeds the instance
    if "instance" in obj and "vertices" not in obj:
        obj = obj["instance"]
    return instance_from_json(obj)
