"""Offline optimum for a fixed arrival/error pattern.

The offline schedule always runs at speed 1 and may idle.  A transmission
``[s, s + d)`` survives iff no jam ``j`` satisfies ``s < j < s + d`` (the
same rule the engine applies).

Three tools live here:

* :func:`offline_opt`: exact maximum by memoized search over (cursor time,
  packets used per class).  Packets of one class are used in arrival order
  and every transmission is left-justified, so candidate starts are
  arrivals, jams and previous completions.
* :func:`brute_force_opt`: naive tick-by-tick search over packet subsets,
  used only to cross-check the former on micro instances.
* :func:`upper_bound` / :func:`single_class_opt`: cheap bounds for
  instances beyond the exact caps.
"""
from __future__ import annotations

import sys
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .core import LengthSystem, select_indices
from .errors import InstanceTooLarge, InvalidScenario

MAX_PACKETS = 24
MAX_EVENTS = 64


@dataclass
class OptSchedule:
    value: int
    plan: list[tuple[int, int]]
    lengths: tuple[int, ...]
    durations: tuple[int, ...]
    horizon: int
    prefix_steps: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        if not self.prefix_steps:
            total, steps = 0, []
            for s, i in sorted(self.plan):
                total += self.lengths[i]
                steps.append((s + self.durations[i], total))
            self.prefix_steps = steps


def opt_prefix(sched: OptSchedule, t: int) -> int:
    """Completed length of the stored plan by ``t``."""
    ends = [e for e, _ in sched.prefix_steps]
    n = bisect_right(ends, t)
    return sched.prefix_steps[n - 1][1] if n else 0


def _by_class(ls, arrivals, horizon):
    arr = [[] for _ in range(ls.k)]
    for t, i in arrivals:
        if t <= horizon:
            arr[i].append(t)
    for a in arr:
        a.sort()
    return arr


def earliest_start(s: int, d: int, jams: Sequence[int], horizon: int):
    """Smallest start >= s whose transmission of length d avoids every jam."""
    while True:
        pos = bisect_right(jams, s)
        if pos < len(jams) and jams[pos] < s + d:
            s = jams[pos]
            continue
        return s if s + d <= horizon else None


def offline_opt(ls: LengthSystem, arrivals, errors, horizon: int, ticks_per_unit: int = 1,
                max_packets: int = MAX_PACKETS, max_events: int = MAX_EVENTS) -> OptSchedule:
    arr = _by_class(ls, arrivals, horizon)
    jams = sorted(set(e for e in errors if e <= horizon))
    n_packets = sum(len(a) for a in arr)
    n_events = len(set(t for a in arr for t in a) | set(jams))
    if n_packets > max_packets or n_events > max_events:
        raise InstanceTooLarge(
            f"{n_packets} packets / {n_events} event times exceed caps "
            f"{max_packets} / {max_events}")
    k = ls.k
    dur = tuple(l * ticks_per_unit for l in ls.lengths)
    L = ls.lengths
    memo: dict = {}

    def best(t, used):
        key = (t, used)
        hit = memo.get(key)
        if hit is not None:
            return hit
        val, choice = 0, None
        for i in range(k):
            u = used[i]
            if u >= len(arr[i]):
                continue
            s = earliest_start(max(t, arr[i][u]), dur[i], jams, horizon)
            if s is None:
                continue
            nxt = used[:i] + (u + 1,) + used[i + 1:]
            v = L[i] + best(s + dur[i], nxt)[0]
            if v > val:
                val, choice = v, (i, s, nxt)
        memo[key] = (val, choice)
        return memo[key]

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10 * n_packets + 100))
    try:
        value, _ = best(0, (0,) * k)
        plan = []
        t, used = 0, (0,) * k
        while True:
            _, choice = memo[(t, used)]
            if choice is None:
                break
            i, s, used = choice
            plan.append((s, i))
            t = s + dur[i]
    finally:
        sys.setrecursionlimit(limit)
    return OptSchedule(value, plan, L, dur, horizon)


def brute_force_opt(ls: LengthSystem, arrivals, errors, horizon: int,
                    ticks_per_unit: int = 1) -> int:
    """Tick-by-tick exhaustive optimum over packet subsets (micro instances only)."""
    pk = [(t, i) for t, i in arrivals if t <= horizon]
    if len(pk) > 12:
        raise InstanceTooLarge("brute force is limited to 12 packets")
    jamset = set(errors)
    dur = [l * ticks_per_unit for l in ls.lengths]
    # fits[i][t]: a class-i transmission from t ends by the horizon and avoids every jam
    fits = [[t + d <= horizon and not any(j in jamset for j in range(t + 1, t + d))
             for t in range(horizon + 1)] for d in dur]

    @lru_cache(maxsize=None)
    def f(t, mask):
        if t >= horizon:
            return 0
        best = f(t + 1, mask)
        for p, (a, i) in enumerate(pk):
            if mask >> p & 1 or a > t or not fits[i][t]:
                continue
            best = max(best, ls.lengths[i] + f(t + dur[i], mask | 1 << p))
        return best

    return f(0, 0)


def check_plan(ls: LengthSystem, arrivals, errors, horizon: int, plan,
               ticks_per_unit: int = 1) -> int:
    """Validate an offline plan and return its completed length."""
    arr = _by_class(ls, arrivals, horizon)
    jams = sorted(errors)
    used = [0] * ls.k
    last_end = None
    total = 0
    for s, i in sorted(plan):
        d = ls.lengths[i] * ticks_per_unit
        if last_end is not None and s < last_end:
            raise InvalidScenario(f"plan overlaps at tick {s}")
        if s + d > horizon:
            raise InvalidScenario(f"plan transmission at {s} ends after the horizon")
        pos = bisect_right(jams, s)
        if pos < len(jams) and jams[pos] < s + d:
            raise InvalidScenario(f"plan transmission at {s} is hit by jam {jams[pos]}")
        if used[i] >= len(arr[i]) or arr[i][used[i]] > s:
            raise InvalidScenario(f"plan sends length index {i} at {s} before it arrived")
        used[i] += 1
        last_end = s + d
        total += ls.lengths[i]
    return total


def plan_prefix(ls: LengthSystem, plan, t: int, ticks_per_unit: int = 1, selector="all") -> int:
    idx = set(select_indices(selector, ls.k))
    return sum(ls.lengths[i] for s, i in plan
               if i in idx and s + ls.lengths[i] * ticks_per_unit <= t)


def _subset_sum_max(cap: int, items) -> int:
    """Largest reachable total <= cap using ``count`` copies of each weight."""
    if cap <= 0:
        return 0
    mask = (1 << (cap + 1)) - 1
    reach = 1
    for w, count in items:
        count = min(count, cap // w)
        part = 1
        while count > 0:
            take = min(part, count)
            reach = (reach | (reach << (w * take))) & mask
            count -= take
            part *= 2
    return reach.bit_length() - 1


def upper_bound(ls: LengthSystem, arrivals, errors, sample_times, ticks_per_unit: int = 1,
                selector="all") -> list[int]:
    """Upper bound on what any offline schedule completes by each sample time.

    Between consecutive jams a schedule fits at most a bounded knapsack of
    the packets that have arrived early enough; cumulatively it can never
    exceed what has arrived.  The bound is min(previous bound + gap knapsack,
    arrived volume), taken gap by gap.
    """
    idx = list(select_indices(selector, ls.k))
    R = ticks_per_unit
    dur = [l * R for l in ls.lengths]
    arr = _by_class(ls, arrivals, max(list(sample_times) + [0]))
    jams = sorted(set(errors))

    def avail(i, t):
        return bisect_right(arr[i], t - dur[i])

    def arrived(t):
        return sum(ls.lengths[i] * avail(i, t) for i in idx)

    def knap(a, b):
        items = [(dur[i], avail(i, b)) for i in idx]
        return _subset_sum_max(b - a, items) // R

    edges = [0] + jams
    cum = 0
    samples = sorted(set(sample_times))
    res = {}
    g = 0
    for t in samples:
        while g + 1 < len(edges) and edges[g + 1] <= t:
            cum = min(cum + knap(edges[g], edges[g + 1]), arrived(edges[g + 1]))
            g += 1
        res[t] = min(cum + knap(edges[g], t), arrived(t))
    return [res[t] for t in sample_times]


def single_class_opt(ls: LengthSystem, arrivals, errors, t: int, index: int,
                     ticks_per_unit: int = 1) -> int:
    """Exact maximum length of class ``index`` any schedule completes by ``t``."""
    d = ls.lengths[index] * ticks_per_unit
    jams = sorted(errors)
    cursor, count = 0, 0
    for a in sorted(x for x, i in arrivals if i == index):
        s = earliest_start(max(cursor, a), d, jams, t)
        if s is None:
            break
        count += 1
        cursor = s + d
    return count * ls.lengths[index]
