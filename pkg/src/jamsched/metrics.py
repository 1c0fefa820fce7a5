"""Relative throughput series and guarantee audits over traces.

The offline reference used as denominator is chosen by ``opt``:

``"exact"``   exact optimum recomputed with horizon t for every sample;
``"bound"``   the relaxation upper bound (sound for lower-bound audits);
``"auto"``    exact when the realized instance fits the oracle caps, else bound;
a plan       list of ``(start, index)``, e.g. an adversary's witness (a lower
             bound on the optimum, sound for upper-bound claims only).
"""
from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import aux_constants, f_constants, upper_bound_gamma
from .engine import Trace, completed_length
from .errors import AuditMismatch, InstanceTooLarge
from . import oracle


def throughput_ratio(l_alg: int, l_opt: int) -> Optional[Fraction]:
    """L_alg / L_opt, 1 when both are zero, None when only L_opt is zero."""
    if l_opt == 0:
        return Fraction(1) if l_alg == 0 else None
    return Fraction(l_alg, l_opt)


def default_samples(horizon: int, n: int) -> list[int]:
    n = max(1, n)
    return sorted(set(horizon * m // n for m in range(1, n + 1)))


def opt_values(trace: Trace, sample_times, opt="auto", selector="all") -> tuple[list[int], str]:
    """Offline reference values at each sample and a tag naming the source."""
    ls, R = trace.ls, trace.ticks_per_unit
    if not isinstance(opt, str):
        plan = opt.plan if isinstance(opt, oracle.OptSchedule) else opt
        return [oracle.plan_prefix(ls, plan, t, R, selector) for t in sample_times], "plan"
    if opt == "witness":
        if trace.witness is None:
            raise AuditMismatch("trace carries no adversary witness plan")
        return opt_values(trace, sample_times, trace.witness, selector)
    if opt in ("exact", "auto"):
        try:
            vals = []
            for t in sample_times:
                if selector == "all":
                    vals.append(oracle.offline_opt(ls, trace.arrivals, trace.errors, t, R).value)
                else:
                    raise InstanceTooLarge("exact oracle only covers the total")
            return vals, "exact"
        except InstanceTooLarge:
            if opt == "exact":
                raise
    return oracle.upper_bound(ls, trace.arrivals, trace.errors, sample_times, R, selector), "bound"


@dataclass
class RatioSeries:
    samples: list[tuple[int, int, int, Optional[Fraction]]]
    tail_estimate: Fraction
    opt_source: str = "exact"

    def rows(self):
        for t, a, o, r in self.samples:
            yield t, a, o, "inf" if r is None else str(r)


def tail_min(ratios) -> Fraction:
    vals = [r for r in ratios]
    tail = vals[len(vals) - max(1, math.ceil(len(vals) / 4)):]
    finite = [r for r in tail if r is not None]
    return min(finite) if finite else Fraction(1)


def ratio_series(trace: Trace, sample_times=None, opt="auto", n_samples: int = 20) -> RatioSeries:
    if sample_times is None:
        sample_times = default_samples(trace.horizon, n_samples)
    opts, src = opt_values(trace, sample_times, opt)
    ends, cum = trace.completion_curve()
    samples = []
    for t, o in zip(sample_times, opts):
        n = bisect_right(ends, t)
        a = cum[n - 1] if n else 0
        samples.append((t, a, o, throughput_ratio(a, o)))
    return RatioSeries(samples, tail_min([s[3] for s in samples]), src)


@dataclass
class AuditReport:
    audit: str
    passed: bool
    slack: object
    constants: dict
    samples: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    opt_source: str = ""

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return str(v)
            if isinstance(v, dict):
                return {k: enc(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            return v
        return enc({"audit": self.audit, "pass": self.passed, "slack": self.slack,
                    "constants": self.constants, "samples": self.samples,
                    "violations": self.violations, "opt_source": self.opt_source})

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def constants_of(ls) -> dict:
    delta, eta = aux_constants(ls)
    return {"gamma": upper_bound_gamma(ls), "delta": delta, "eta": eta, "f": f_constants(ls)}


def busy_segments(trace: Trace) -> list[tuple[int, int]]:
    """Maximal intervals in [0, horizon] during which the policy was not idle."""
    segs, cur = [], 0
    for a, b in sorted(trace.idle_intervals):
        if a > cur:
            segs.append((cur, a))
        cur = max(cur, b)
    if cur < trace.horizon:
        segs.append((cur, trace.horizon))
    return segs


def _arrived_before(trace: Trace, t: int) -> int:
    return sum(trace.ls.lengths[i] for a, i in trace.arrivals if a < t)


def window_opt_bound(trace: Trace, t1: int, t: int) -> int:
    """Upper bound on what any schedule completes in [t1, t] from packets
    arriving at or after t1: exact when the window fits the oracle caps."""
    arr = [(a - t1, i) for a, i in trace.arrivals if t1 <= a <= t]
    jams = [e - t1 for e in trace.errors if t1 < e <= t]
    try:
        return oracle.offline_opt(trace.ls, arr, jams, t - t1, trace.ticks_per_unit).value
    except InstanceTooLarge:
        return oracle.upper_bound(trace.ls, arr, jams, [t - t1], trace.ticks_per_unit)[0]


def audit_greedy(trace: Trace, sample_times=None, opt="auto", n_samples: int = 40) -> AuditReport:
    """Check 2 L_greedy(tau) + f_k >= L_opt(tau) on busy intervals.

    An interval starts where Greedy leaves idleness (or at 0) and ends at a
    sample.  The offline side is credited, at no cost, with everything that
    arrived before the interval start, so L_opt(tau) = L_opt(t) - A(<t1).
    Without an exact optimum, L_opt(tau) is capped by the window optimum
    over packets arriving in [t1, t]; both caps are upper bounds.
    """
    ls = trace.ls
    if not trace.policy.startswith("greedy") or not ls.divisible:
        raise AuditMismatch(f"audit_greedy needs a greedy trace on divisible lengths, "
                            f"got {trace.policy!r} on {ls.lengths}")
    fk = f_constants(ls)[-1]
    if sample_times is None:
        sample_times = default_samples(trace.horizon, n_samples)
    segs = busy_segments(trace)
    starts = [a for a, _ in segs]
    checked = []
    for t in sample_times:
        pos = bisect_right(starts, t) - 1
        if pos < 0:
            continue
        a, b = segs[pos]
        if a < t <= b:
            checked.append((t, a))
    opts, src = opt_values(trace, [t for t, _ in checked], opt) if checked else ([], "none")
    rows, bad = [], []
    for (t, t1), o in zip(checked, opts):
        g = completed_length(trace, t) - completed_length(trace, t1)
        flushed = _arrived_before(trace, t1)
        rhs = o - flushed
        if src != "exact" and t1 > 0 and 2 * g + fk < rhs:
            rhs = min(rhs, window_opt_bound(trace, t1, t))
        ok = 2 * g + fk >= rhs
        row = {"t": t, "busy_start": t1, "L_alg": g, "L_opt": rhs, "ok": ok}
        rows.append(row)
        if not ok:
            bad.append(row)
    return AuditReport("greedy", not bad, fk, constants_of(ls), rows, bad, src)


def audit_prudent(trace: Trace, sample_times=None, opt="auto", n_samples: int = 40) -> AuditReport:
    """Check L_prudent >= L_opt - 5/2 k l_k and no deficit on the longest length."""
    ls = trace.ls
    if not trace.policy.startswith("prudent") or trace.speedup != 2:
        raise AuditMismatch(f"audit_prudent needs a prudent trace at speedup 2, "
                            f"got {trace.policy!r} at {trace.speedup}")
    slack = Fraction(5, 2) * ls.k * ls.lmax
    if sample_times is None:
        sample_times = default_samples(trace.horizon, n_samples)
    opts, src = opt_values(trace, sample_times, opt)
    top = ls.k - 1
    rows, bad = [], []
    for t, o in zip(sample_times, opts):
        p = completed_length(trace, t)
        pk = completed_length(trace, t, top)
        ok_k = oracle.single_class_opt(ls, trace.arrivals, trace.errors, t, top,
                                       trace.ticks_per_unit)
        ok = p >= o - slack and pk >= ok_k
        row = {"t": t, "L_alg": p, "L_opt": o, "L_alg_k": pk, "L_opt_k": ok_k, "ok": ok}
        rows.append(row)
        if not ok:
            bad.append(row)
    return AuditReport("prudent", not bad, slack, constants_of(ls), rows, bad, src)


def mgreedy_bound(ls, c: int) -> Fraction:
    gamma = upper_bound_gamma(ls)
    _, eta = aux_constants(ls)
    return gamma / (1 + Fraction(4) / (c * eta))


def audit_mgreedy(trace: Trace, c: Optional[int] = None, sample_times=None, opt="auto",
                  n_samples: int = 40) -> AuditReport:
    """Check tail ratio >= gamma / (1 + 4/(c eta)) - slack.

    slack = (f_k + k * c k l_k) / L_opt(horizon): the busy-interval constant
    f_k plus the volume that may sit in non-interesting queues.
    """
    ls = trace.ls
    if not trace.policy.startswith("mgreedy"):
        raise AuditMismatch(f"audit_mgreedy needs an mgreedy trace, got {trace.policy!r}")
    if c is None:
        c = _c_from_id(trace.policy)
    series = ratio_series(trace, sample_times, opt, n_samples)
    final_opt = series.samples[-1][2] if series.samples else 0
    extra = f_constants(ls)[-1] + ls.k * c * ls.k * ls.lmax
    slack = Fraction(extra, final_opt) if final_opt else Fraction(1)
    bound = mgreedy_bound(ls, c)
    ok = series.tail_estimate >= bound - slack
    rows = [{"t": t, "L_alg": a, "L_opt": o, "ratio": r} for t, a, o, r in series.samples]
    consts = constants_of(ls)
    consts.update({"c": c, "bound": bound, "tail_estimate": series.tail_estimate})
    return AuditReport("mgreedy", ok, slack, consts, rows, [] if ok else rows[-1:],
                       series.opt_source)


def _c_from_id(policy_id: str) -> int:
    from .policies import parse_policy_id
    name, kw = parse_policy_id(policy_id)
    return kw.get("c", kw.get("c0", 4))


def uniform_calls(stages, previous=None):
    """Count uniform top-level group calls per stage.

    A call is uniform when every attempt in it used one fixed length and the
    directly preceding top-level call (possibly in the previous stage) used
    that same single length.
    """
    out = []
    prev = previous
    for st in stages:
        n = 0
        for call in st.calls:
            if len(call) == 1 and prev is not None and call == prev:
                n += 1
            prev = call
        out.append(n)
    return out


def audit_stage_uniformity(stages, k: int) -> AuditReport:
    """Every completed stage has at least c k - 2k uniform top-level calls."""
    counts = uniform_calls(stages)
    rows, bad = [], []
    for st, n in zip(stages, counts):
        if not st.completed:
            continue
        need = st.c * k - 2 * k
        row = {"stage": st.index, "c": st.c, "calls": len(st.calls), "uniform": n,
               "required": need, "ok": n >= need}
        rows.append(row)
        if n < need:
            bad.append(row)
    return AuditReport("mgreedy-stages", not bad, 2 * k, {"k": k}, rows, bad, "trace")
