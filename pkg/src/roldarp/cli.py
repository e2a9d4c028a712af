"""Command-line entry point.

Exit status: 0 on success, 1 when a checked bound fails or a schedule is
infeasible, 2 on bad usage or bad input.
"""
from __future__ import annotations

import argparse
import glob
import json
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from . import analysis, serialize
from .adversary import Fig1Params, Transcript, adaptive_first_horizon, adaptive_last_window, gen_fig1
from .bipartite import to_bipartite
from .core import RoldarpError, validate_schedule
from .generate import random_instance
from .online import IdlePolicy
from .oracle import optimal_offline
from .sbp import SBPPolicy, run_sbp
from .serialize import enc, instance_to_json, schedule_to_json

POLICIES = {"sbp": SBPPolicy, "idle": IdlePolicy}


_RATIONAL = re.compile(r"-?\d+(/\d+)?")


def _frac(text: str) -> Fraction:
    """Integers or a/b only; decimals are refused so nothing looks like a float."""
    if not _RATIONAL.fullmatch(text.strip()):
        raise argparse.ArgumentTypeError(f"expected an integer or a/b, got {text!r}")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise argparse.ArgumentTypeError(f"zero denominator in {text!r}") from None


def _emit(args, obj) -> None:
    text = serialize.dumps(obj)
    if getattr(args, "output", None):
        serialize.write_atomic(args.output, text)
    else:
        sys.stdout.write(text)


def transcript_to_json(tr: Transcript) -> dict:
    ratio = tr.ratio
    return {
        "adversary": tr.adversary,
        "case": tr.case,
        "params": {k: enc(v) if isinstance(v, Fraction) else v for k, v in tr.params.items()},
        "horizon": enc(tr.horizon),
        "preclosed_by_construction": tr.preclosed,
        "instance": instance_to_json(tr.instance),
        "policy_schedule": schedule_to_json(tr.policy_schedule),
        "policy_revenue": enc(tr.policy_revenue),
        "opt_schedule": schedule_to_json(tr.opt.schedule),
        "opt_revenue": enc(tr.opt_revenue),
        "ratio": enc(ratio) if ratio is not None else None,
    }


def cmd_gen(args) -> int:
    if args.family == "fig1":
        inst, witness = gen_fig1(Fig1Params(args.f, args.h, args.B, args.eps))
        _emit(args, {**instance_to_json(inst), "witness": schedule_to_json(witness)})
    else:
        inst = random_instance(args.seed, vertices=args.vertices, requests=args.requests, f=args.f,
                               uniform=args.uniform, bipartite=args.bipartite, k=args.k)
        _emit(args, instance_to_json(inst))
    return 0


def cmd_run(args) -> int:
    inst = serialize.load_instance(args.input)
    res = run_sbp(inst)
    _emit(args, {
        "schedule": schedule_to_json(res.schedule),
        "revenue": enc(res.revenue),
        "by_segment": [enc(x) for x in res.profile.by_segment],
        "by_window": [enc(x) for x in res.profile.by_window],
    })
    return 0


def cmd_opt(args) -> int:
    inst = serialize.load_instance(args.input)
    res = optimal_offline(inst, args.horizon)
    verdict = validate_schedule(inst, res.schedule, args.horizon)
    _emit(args, {"schedule": schedule_to_json(res.schedule), "revenue": enc(res.revenue),
                 "nodes": res.nodes, "feasible": verdict.feasible})
    return 0 if verdict.feasible else 1


def cmd_duel(args) -> int:
    policy = POLICIES[args.policy]()
    if args.adversary == "last-window":
        k = args.k or (5 if args.uniform else 100)
        tr = adaptive_last_window(policy, T=args.T, f=args.f, uniform=args.uniform, k=k)
    else:
        tr = adaptive_first_horizon(policy, uniform=args.uniform, X=args.X, k=args.k or 4)
    _emit(args, transcript_to_json(tr))
    return 0


def cmd_check(args) -> int:
    inst = serialize.load_instance(args.input)
    rep = analysis.check_bound(inst, args.bound, instance_id=args.input)
    _emit(args, rep.to_json())
    return 0 if rep.holds else 1


def cmd_reduce(args) -> int:
    inst = serialize.load_instance(args.input)
    red = to_bipartite(inst, args.eps)
    _emit(args, {**instance_to_json(red.target), "eps": enc(red.eps)})
    return 0


def _report_one(path: str) -> list[analysis.BoundReport]:
    inst = serialize.load_instance(path)
    return analysis.report_all(inst, instance_id=path)


def cmd_report(args) -> int:
    paths = sorted(glob.glob(args.glob))
    if not paths:
        raise RoldarpError("NO_INPUT", f"nothing matches {args.glob!r}")
    with ThreadPoolExecutor() as pool:
        reports = [r for batch in pool.map(_report_one, paths) for r in batch]
    text = analysis.reports_to_csv(reports)
    if args.csv:
        serialize.write_atomic(args.csv, text)
    else:
        sys.stdout.write(text)
    return 0 if all(r.holds for r in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roldarp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def out(sp):
        sp.add_argument("-o", "--output", help="write here (atomically) instead of stdout")

    gen = sub.add_parser("gen", help="generate an instance")
    gsub = gen.add_subparsers(dest="family", required=True)
    g1 = gsub.add_parser("fig1", help="SBP lower-bound family with its witness schedule")
    g1.add_argument("--f", type=int, required=True)
    g1.add_argument("--h", type=_frac, required=True)
    g1.add_argument("--B", type=_frac, default=Fraction(1))
    g1.add_argument("--eps", type=_frac, default=Fraction(1, 1000))
    out(g1)
    gr = gsub.add_parser("random", help="seeded random instance")
    gr.add_argument("--vertices", type=int, required=True)
    gr.add_argument("--requests", type=int, required=True)
    gr.add_argument("--seed", type=int, required=True)
    gr.add_argument("--f", type=int, default=4)
    gr.add_argument("--uniform", action="store_true")
    gr.add_argument("--bipartite", action="store_true")
    gr.add_argument("--k", type=_frac)
    out(gr)
    gen.set_defaults(func=cmd_gen)

    run = sub.add_parser("run", help="run an online algorithm")
    run.add_argument("algorithm", choices=["sbp"])
    run.add_argument("-i", "--input", required=True)
    out(run)
    run.set_defaults(func=cmd_run)

    opt = sub.add_parser("opt", help="exact offline optimum")
    opt.add_argument("-i", "--input", required=True)
    opt.add_argument("--horizon", type=_frac)
    out(opt)
    opt.set_defaults(func=cmd_opt)

    duel = sub.add_parser("duel", help="play a policy against an adaptive adversary")
    duel.add_argument("--adversary", choices=["last-window", "first-horizon"], required=True)
    duel.add_argument("--policy", choices=sorted(POLICIES), default="sbp")
    duel.add_argument("--uniform", action="store_true")
    duel.add_argument("--k", type=int, default=None)
    duel.add_argument("--T", type=_frac, default=Fraction(20), help="time limit (last-window)")
    duel.add_argument("--f", type=int, default=4, help="segments (last-window)")
    duel.add_argument("--X", type=_frac, default=Fraction(6), help="segment length (first-horizon)")
    out(duel)
    duel.set_defaults(func=cmd_duel)

    chk = sub.add_parser("check", help="evaluate one bound or lemma on an instance")
    chk.add_argument("--bound", type=str.upper, choices=analysis.BOUNDS, required=True)
    chk.add_argument("-i", "--input", required=True)
    out(chk)
    chk.set_defaults(func=cmd_check)

    red = sub.add_parser("reduce", help="reduce a general instance to a bipartite one")
    red.add_argument("-i", "--input", required=True)
    red.add_argument("--eps", type=_frac)
    out(red)
    red.set_defaults(func=cmd_reduce)

    rep = sub.add_parser("report", help="check every applicable bound on many instances")
    rep.add_argument("--glob", required=True)
    rep.add_argument("--csv")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RoldarpError as exc:
        _diagnose(exc.code, exc.detail)
    except OSError as exc:
        _diagnose("IO_ERROR", str(exc))
    return 2


def _diagnose(code: str, detail: str) -> None:
    print(json.dumps({"error": code, "detail": detail}), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
