"""Command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 infeasible instance (the support
of the target meets several components of the graph).
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import io
from .dist import kbar, mixture
from .errors import GraphMCError, InfeasiblePlan
from .kernel import (
    build_kernel,
    lemma_bound_check,
    stationary_residual,
    support_component,
    verify_reversible,
)
from .graph import induced_subgraph
from .planner import Case, Mode, classify, plan
from .product import build_product_spec, run_product
from .simulator import (
    TRACE_CAP,
    counterexample_scenario,
    merge_reports,
    run,
)

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 2, 3


class _Infeasible(Exception):
    """Carries a report that should still be printed before exiting with 3."""

    def __init__(self, report):
        self.report = report


def _checkpoints(text: Optional[str]) -> list[int]:
    if not text:
        return []
    try:
        return [int(float(x)) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad checkpoint list {text!r}") from exc


def _positive(text: str) -> int:
    v = int(float(text))
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _epsilon(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("epsilon must lie in (0, 1)")
    return v


def _load(args):
    g = io.load_graph(args.graph)
    return g, io.load_dist(args.dist, g)


def cmd_classify(args):
    g, d = _load(args)
    cc = classify(d, g)
    out = cc.to_json()
    if cc.tag is Case.SUPPORT_SPLIT:
        raise _Infeasible(out)
    return out


def _plan_from_args(args, d, g):
    schedule = epsilon = None
    mode = getattr(args, "mode", "auto")
    if args.epsilon is not None:
        epsilon = args.epsilon
    if args.schedule is not None:
        schedule = io.parse_schedule(args.schedule, d, g)
    if mode == "epsilon" and epsilon is None:
        raise GraphMCError("--mode epsilon needs --epsilon")
    if mode == "schedule" and schedule is None:
        raise GraphMCError("--mode schedule needs --schedule")
    return plan(d, g, schedule=schedule, epsilon=epsilon)


def cmd_plan(args):
    g, d = _load(args)
    p = _plan_from_args(args, d, g)
    out = p.to_json(blocks=20)
    if p.mode is Mode.INFEASIBLE:
        raise _Infeasible(out)
    return out


def cmd_kernel(args):
    g, d = _load(args)
    cc = classify(d, g)
    if cc.tag is Case.SUPPORT_SPLIT:
        raise InfeasiblePlan(f"support split across components: {cc.witness}")
    if cc.tag is Case.CONNECTED_SUPPORT and args.k is None:
        supp = cc.witness["support"]
        ker = build_kernel(d.restrict(supp), induced_subgraph(g, supp))
    else:
        comp = support_component(d, g)
        dc = d.restrict(comp)
        k = args.k if args.k is not None else kbar(dc) + 1
        ker = build_kernel(mixture(dc, k), induced_subgraph(g, comp))
    out = ker.to_json()
    out["reversibility_residual"] = verify_reversible(ker)
    out["stationary_residual"] = stationary_residual(ker)
    return out


def cmd_dobrushin(args):
    g, d = _load(args)
    if classify(d, g).tag is Case.SUPPORT_SPLIT:
        raise InfeasiblePlan("support split across components")
    return lemma_bound_check(d, g, args.k).to_json()


def cmd_simulate(args):
    g, d = _load(args)
    p = _plan_from_args(args, d, g)
    cps = _checkpoints(args.checkpoints)
    reports = []
    for r in range(args.replicas):
        writer = None
        if args.trace and r == 0:
            writer = _TraceWriter(args.trace, p.states)
        try:
            reports.append(run(p, args.steps, args.seed, cps, replica=r,
                               on_chunk=writer))
        finally:
            if writer:
                writer.close()
    if args.replicas == 1:
        return reports[0].to_json()
    return {"replicas": [x.to_json() for x in reports],
            "pooled": merge_reports(reports).to_json()}


class _TraceWriter:
    def __init__(self, path, states):
        self.fh = open(path, "w", newline="")
        self.w = csv.writer(self.fh)
        self.w.writerow(["time", "state"])
        self.states = states
        self.rows = 0

    def __call__(self, t0, chunk):
        room = TRACE_CAP - self.rows
        for i, s in enumerate(chunk[:max(room, 0)]):
            self.w.writerow([t0 + i, self.states[s]])
        self.rows += min(len(chunk), max(room, 0))

    def close(self):
        self.fh.close()


def cmd_product(args):
    spec_path = Path(args.spec)
    obj = json.loads(spec_path.read_text())
    base = spec_path.parent
    factors = []
    for f in obj["factors"]:
        g = io.load_graph(base / f["graph"])
        d = io.load_dist(base / f["dist"], g)
        s = f.get("schedule")
        factors.append((d, g, io.parse_schedule(s, d, g, base) if s else None))
    spec = build_product_spec(factors)
    steps = args.steps or obj.get("steps", 10**5)
    rep = run_product(spec, steps, args.seed, _checkpoints(args.checkpoints))
    return rep.to_json()


def cmd_counterexample(args):
    return counterexample_scenario(args.replicas, args.steps, args.seed).to_json()


def _to_csv(command: str, out: dict) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if command == "simulate" and "labels" in out:
        w.writerow(["label", "visits", "empirical"])
        for row in zip(out["labels"], out["visit_counts"], out["empirical"]):
            w.writerow([row[0], row[1], format(row[2], ".17g")])
    elif command == "kernel":
        w.writerow(["from"] + out["labels"])
        for lab, row in zip(out["labels"], out["matrix"]):
            w.writerow([lab] + [format(x, ".17g") for x in row])
    elif command == "plan" and "blocks" in out:
        w.writerow(["k", "start", "end"])
        for b in out["blocks"]:
            w.writerow([b["k"], b["start"], b["end"]])
    else:
        w.writerow(["key", "value"])
        for k, v in out.items():
            w.writerow([k, io.dumps(v).strip()])
    return buf.getvalue()


COMMANDS = {
    "classify": cmd_classify,
    "plan": cmd_plan,
    "kernel": cmd_kernel,
    "dobrushin": cmd_dobrushin,
    "simulate": cmd_simulate,
    "product": cmd_product,
    "counterexample": cmd_counterexample,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphmc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def shared(p, graph=True):
        if graph:
            p.add_argument("--graph", required=True)
            p.add_argument("--dist", required=True)
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--out")
        p.add_argument("--format", choices=["json", "csv"], default="json")

    def plan_flags(p):
        p.add_argument("--mode", choices=["auto", "epsilon", "schedule"], default="auto")
        grp = p.add_mutually_exclusive_group()
        grp.add_argument("--epsilon", type=_epsilon)
        grp.add_argument("--schedule", help="paper | growth:C | FILE")

    shared(sub.add_parser("classify"))
    p = sub.add_parser("plan")
    shared(p)
    plan_flags(p)
    p = sub.add_parser("kernel")
    shared(p)
    p.add_argument("--k", type=_positive)
    p = sub.add_parser("dobrushin")
    shared(p)
    p.add_argument("--k", type=_positive, required=True)
    p = sub.add_parser("simulate")
    shared(p)
    plan_flags(p)
    p.add_argument("--steps", type=_positive, default=10**5)
    p.add_argument("--replicas", type=_positive, default=1)
    p.add_argument("--checkpoints")
    p.add_argument("--trace")
    p = sub.add_parser("product")
    shared(p, graph=False)
    p.add_argument("--spec", required=True)
    p.add_argument("--steps", type=_positive)
    p.add_argument("--checkpoints")
    p = sub.add_parser("counterexample")
    shared(p, graph=False)
    p.add_argument("--replicas", type=_positive, default=1000)
    p.add_argument("--steps", type=_positive, default=10**5)
    return parser


def _emit(args, out: dict) -> None:
    text = _to_csv(args.command, out) if args.format == "csv" else io.dumps(out)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _fail(code: str, detail: str) -> None:
    sys.stderr.write(io.dumps({"error": code, "detail": detail}))


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        out = COMMANDS[args.command](args)
    except _Infeasible as inf:
        _emit(args, inf.report)
        return EXIT_INFEASIBLE
    except InfeasiblePlan as exc:
        _fail(exc.code, str(exc))
        return EXIT_INFEASIBLE
    except GraphMCError as exc:
        _fail(exc.code, str(exc))
        return EXIT_USAGE
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        _fail(type(exc).__name__, str(exc))
        return EXIT_USAGE
    _emit(args, out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
