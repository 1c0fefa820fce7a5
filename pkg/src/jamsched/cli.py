"""Command line entry point: run, audit, search, validate.

Exit codes: 0 ok, 1 audit failure, 2 invalid input, 3 resource caps.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from .engine import Trace, completed_length, run, trace_problems
from .errors import (AdversaryViolation, AuditMismatch, BudgetExceeded, InstanceTooLarge,
                     InvalidLengths, InvalidScenario, InvalidSelector, PolicyViolation,
                     UnsupportedLengthSystem)
from .io import dump_json, frac_str, load_scenario, read_json, scenario_to_doc
from .oracle import check_plan
from .metrics import (audit_greedy, audit_mgreedy, audit_prudent, audit_stage_uniformity,
                      ratio_series)
from .policies import make_policy

EXIT_OK, EXIT_AUDIT, EXIT_INVALID, EXIT_CAPS = 0, 1, 2, 3

INVALID = (InvalidScenario, InvalidLengths, InvalidSelector, UnsupportedLengthSystem,
           PolicyViolation, AdversaryViolation, AuditMismatch, ValueError)
CAPS = (InstanceTooLarge, BudgetExceeded)


def _unit(sc_or_trace) -> int:
    return sc_or_trace.ticks_per_unit * sc_or_trace.ls.scale


def _plan_arg(path, sc):
    doc = read_json(path)
    if isinstance(doc, dict):
        doc = doc.get("opt_plan", doc.get("plan"))
    if not isinstance(doc, list):
        raise InvalidScenario(f"{path}: expected a list of [start, length_index]")
    unit = _unit(sc)
    plan = []
    for p in doc:
        t = Fraction(p[0]) * unit
        if t.denominator != 1:
            raise InvalidScenario(f"{path}: plan start {p[0]} is off the tick grid")
        plan.append((int(t), int(p[1])))
    return plan


def series_rows(series, unit):
    for t, a, o, r in series.samples:
        yield frac_str(Fraction(t, unit)), a, o, "inf" if r is None else str(r)


def write_series(series, unit, fmt, fh):
    if fmt == "json":
        doc = {"opt_source": series.opt_source, "tail_estimate": str(series.tail_estimate),
               "rows": [dict(zip(("t", "L_alg", "L_opt", "ratio"), row))
                        for row in series_rows(series, unit)]}
        fh.write(json.dumps(doc, sort_keys=True) + "\n")
        return
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "L_alg", "L_opt", "ratio"])
    for row in series_rows(series, unit):
        w.writerow(row)


def cmd_run(args) -> int:
    sc, file_plan = load_scenario(args.scenario, args.speedup)
    policy = make_policy(args.policy, sc.ls)
    trace = run(policy, sc)
    opt = args.opt
    if args.opt_plan:
        opt = _plan_arg(args.opt_plan, sc)
    elif file_plan is not None and opt == "exact":
        opt = file_plan
    if not isinstance(opt, str):
        # a supplied reference must be feasible on the realized pattern
        check_plan(trace.ls, trace.arrivals, trace.errors, trace.horizon, opt,
                   trace.ticks_per_unit)
    series = ratio_series(trace, n_samples=args.samples, opt=opt)
    out = open(args.output, "w") if args.output else sys.stdout
    try:
        write_series(series, _unit(sc), args.out, out)
    finally:
        if args.output:
            out.close()
    if args.trace_out:
        with open(args.trace_out, "w") as fh:
            fh.write(trace.dumps() + "\n")
    if args.figure:
        from .plotting import render_series
        render_series(series, args.figure, f"{args.policy} on {os.path.basename(args.scenario)}",
                      unit=_unit(sc))
    return EXIT_OK


def audits_for(trace, policy=None, opt="auto", samples=40):
    name = trace.policy.split(":")[0]
    if name == "greedy":
        reps = [audit_greedy(trace, opt=opt, n_samples=samples)]
    elif name == "prudent":
        reps = [audit_prudent(trace, opt=opt, n_samples=samples)]
    elif name in ("mgreedy", "mgreedy-adaptive"):
        reps = [audit_mgreedy(trace, opt=opt, n_samples=samples)]
        if policy is not None:
            reps.append(audit_stage_uniformity(policy.stages, trace.ls.k))
    else:
        raise AuditMismatch(f"no guarantee to audit for policy {trace.policy!r}")
    return reps


def _audit_one(job):
    path, policy_id, speedup, opt, samples = job
    try:
        sc, _ = load_scenario(path, speedup)
        pol = make_policy(policy_id, sc.ls)
        trace = run(pol, sc)
        reps = audits_for(trace, pol, opt, samples)
        return {"scenario": path, "policy": policy_id,
                "pass": all(r.passed for r in reps),
                "audits": [r.to_json() for r in reps]}, None
    except INVALID as e:
        return None, (EXIT_INVALID, f"{path}: {e}")
    except CAPS as e:
        return None, (EXIT_CAPS, f"{path}: {e}")


def _suite_files(target):
    if os.path.isdir(target):
        files = sorted(os.path.join(target, f) for f in os.listdir(target) if f.endswith(".json"))
        if not files:
            raise InvalidScenario(f"{target}: no scenario files")
        return files
    return [target]


def cmd_audit(args) -> int:
    if args.trace:
        doc = read_json(args.trace)
        try:
            trace = Trace.from_json(doc)
        except (KeyError, TypeError) as e:
            raise InvalidScenario(f"{args.trace}: malformed trace ({e})")
        if args.policy and trace.policy.split(":")[0] != args.policy.split(":")[0]:
            raise AuditMismatch(f"trace was produced by {trace.policy!r}, not {args.policy!r}")
        problems = trace_problems(trace)
        results = []
        if problems:
            results.append({"scenario": args.trace, "policy": trace.policy, "pass": False,
                            "audits": [{"audit": "trace", "pass": False, "violations": problems}]})
        else:
            reps = audits_for(trace, None, args.opt, args.samples)
            results.append({"scenario": args.trace, "policy": trace.policy,
                            "pass": all(r.passed for r in reps),
                            "audits": [r.to_json() for r in reps]})
    else:
        if not args.policy:
            raise InvalidScenario("audit needs a policy id")
        jobs = [(p, args.policy, args.speedup, args.opt, args.samples)
                for p in _suite_files(args.target)]
        if args.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(args.jobs) as ex:
                outs = list(ex.map(_audit_one, jobs))
        else:
            outs = [_audit_one(j) for j in jobs]
        errs = [e for _, e in outs if e is not None]
        if errs:
            for _, msg in errs:
                print(f"error: {msg}", file=sys.stderr)
            return max(code for code, _ in errs)
        results = [r for r, _ in outs]
    ok = all(r["pass"] for r in results)
    sys.stdout.write(json.dumps({"pass": ok, "results": results}, sort_keys=True) + "\n")
    for r in results:
        print(f"{'PASS' if r['pass'] else 'FAIL'} {r['policy']} {r['scenario']}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_AUDIT


def _int_list(text, k, name):
    parts = [int(x) for x in str(text).split(",")]
    if len(parts) == 1:
        parts = parts * k
    if len(parts) != k:
        raise InvalidScenario(f"{name} needs 1 or {k} values")
    return tuple(parts)


def cmd_search(args) -> int:
    from .core import build_length_system
    from .engine import Scenario
    from .search import Budget, worst_case_search
    ls = build_length_system([Fraction(x) for x in args.lengths.split(",")])
    unit = ls.scale
    horizon = Fraction(args.horizon) * unit
    if horizon.denominator != 1:
        raise InvalidScenario("horizon must be a whole number of ticks")
    if args.empty_budget:
        budget = Budget((0,) * ls.k, 0, int(horizon))
    else:
        budget = Budget(_int_list(args.max_packets, ls.k, "--max-packets"), args.max_jams,
                        int(horizon))
    res = worst_case_search(args.policy, ls, budget, node_limit=args.node_limit, jobs=args.jobs)
    # replay through the engine so the witness is known to reproduce
    sc = Scenario(ls, budget.horizon, res.arrivals, res.errors)
    if res.l_opt:
        tr = run(make_policy(args.policy, ls), sc)
        if completed_length(tr, sc.horizon) != res.l_alg:
            raise RuntimeError("witness replay disagrees with the search")
    print(str(res.min_ratio))
    report = {"policy": args.policy, "min_ratio": str(res.min_ratio), "l_alg": res.l_alg,
              "l_opt": res.l_opt, "slack": str(res.slack), "nodes": res.nodes}
    print(json.dumps(report, sort_keys=True), file=sys.stderr)
    if args.witness:
        doc = scenario_to_doc(sc)
        with open(args.witness, "w") as fh:
            fh.write(dump_json(doc))
    return EXIT_OK


def cmd_validate(args) -> int:
    code = EXIT_OK
    for path in args.scenarios:
        try:
            sc, _ = load_scenario(path)
            print(f"ok {path}: lengths={list(sc.ls.lengths)} horizon={sc.horizon} ticks")
        except INVALID as e:
            print(f"invalid {path}: {e}", file=sys.stderr)
            code = EXIT_INVALID
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jamsched",
                                description="Packet scheduling on a jammed channel.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one policy and report L_alg / L_opt over time")
    r.add_argument("scenario")
    r.add_argument("policy")
    r.add_argument("--samples", type=int, default=20)
    r.add_argument("--out", choices=("csv", "json"), default="csv")
    r.add_argument("--opt", choices=("exact", "bound", "auto", "witness"), default="exact",
                   help="offline reference: exact oracle, relaxation bound, or adversary witness")
    r.add_argument("--opt-plan", help="JSON list of [start, length_index] used as offline reference")
    r.add_argument("--speedup", help="override the scenario's speedup")
    r.add_argument("--output", "-o", help="write the report here instead of stdout")
    r.add_argument("--trace-out", help="also write the full trace JSON")
    r.add_argument("--figure", help="also render the series to this image file")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("audit", help="check a policy guarantee on a scenario, suite or trace")
    a.add_argument("target", nargs="?", help="scenario file or directory of scenarios")
    a.add_argument("policy", nargs="?")
    a.add_argument("--trace", help="audit a recorded trace JSON instead")
    a.add_argument("--speedup")
    a.add_argument("--opt", choices=("exact", "bound", "auto"), default="auto")
    a.add_argument("--samples", type=int, default=40)
    a.add_argument("--jobs", type=int, default=1)
    a.set_defaults(func=cmd_audit)

    s = sub.add_parser("search", help="exhaustive worst-case pattern search")
    s.add_argument("policy")
    s.add_argument("--lengths", required=True, help="comma separated, e.g. 1,2")
    s.add_argument("--max-packets", default="1", help="per length: one value or one per length")
    s.add_argument("--max-jams", type=int, default=1)
    s.add_argument("--horizon", default="6", help="in time units")
    s.add_argument("--empty-budget", action="store_true", help="no packets and no jams")
    s.add_argument("--node-limit", type=int, default=None,
                   help="defaults to $JAMSCHED_NODE_LIMIT or 10^7")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--witness", help="write the worst pattern as a scenario file")
    s.set_defaults(func=cmd_search)

    v = sub.add_parser("validate", help="parse scenario files and report problems")
    v.add_argument("scenarios", nargs="+")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CAPS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAPS
    except INVALID as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
