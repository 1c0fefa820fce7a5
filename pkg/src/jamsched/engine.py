"""Event-driven executor for one policy over one arrival/error pattern.

Time is an integer tick count.  A scenario fixes ``ticks_per_unit`` so that
every length ``l`` lasts ``l * ticks_per_unit`` ticks for the offline
schedule and ``l * ticks_per_unit / speedup`` ticks for the online policy,
both exactly.

Same-tick ordering is: arrivals are delivered, the transmission in flight is
resolved (completion), jams are applied, then the policy decides.  A jam at
tick ``j`` therefore only hits a transmission with ``start < j < end``; one
that starts at ``j`` was started after the jam was processed.
"""
from __future__ import annotations

import heapq
import json
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import LengthSystem, QueueState, lcm_many, select_indices, to_fraction
from .errors import InvalidScenario, PolicyViolation

SUCCESS = "success"
JAMMED = "jammed"
TRUNCATED = "truncated"


@dataclass
class Scenario:
    ls: LengthSystem
    horizon: int
    arrivals: list[tuple[int, int]] = field(default_factory=list)
    errors: list[int] = field(default_factory=list)
    speedup: Fraction = Fraction(1)
    ticks_per_unit: int = 1
    adversary: Optional[object] = None  # AdversarySpec or a ready adversary
    seed: Optional[int] = None

    def __post_init__(self):
        self.speedup = Fraction(self.speedup)
        self.arrivals = [(int(t), int(i)) for t, i in self.arrivals]
        self.errors = [int(e) for e in self.errors]
        self.validate()

    def validate(self) -> None:
        if self.speedup <= 0:
            raise InvalidScenario("speedup must be positive")
        if self.horizon < 0:
            raise InvalidScenario("horizon must be non-negative")
        if self.ticks_per_unit <= 0:
            raise InvalidScenario("ticks_per_unit must be positive")
        for i in range(self.ls.k):
            if (self.ls.lengths[i] * self.ticks_per_unit) % self.speedup != 0:
                raise InvalidScenario(
                    "length %d is not a whole number of ticks at speedup %s"
                    % (self.ls.lengths[i], self.speedup))
        times = [t for t, _ in self.arrivals]
        if times != sorted(times):
            raise InvalidScenario("arrivals must be sorted by time")
        if self.errors != sorted(self.errors):
            raise InvalidScenario("errors must be sorted")
        for t, i in self.arrivals:
            if not 0 <= t <= self.horizon:
                raise InvalidScenario(f"arrival time {t} outside [0, {self.horizon}]")
            if not 0 <= i < self.ls.k:
                raise InvalidScenario(f"arrival length index {i} outside [0, {self.ls.k})")
        for e in self.errors:
            if not 0 <= e <= self.horizon:
                raise InvalidScenario(f"error time {e} outside [0, {self.horizon}]")

    def alg_duration(self, i: int) -> int:
        return int(self.ls.lengths[i] * self.ticks_per_unit / self.speedup)

    def opt_duration(self, i: int) -> int:
        return self.ls.lengths[i] * self.ticks_per_unit

    def with_pattern(self, arrivals, errors, speedup=None) -> "Scenario":
        """Same length system and horizon, fixed pattern, no adversary."""
        return Scenario(self.ls, self.horizon, list(arrivals), list(errors),
                        self.speedup if speedup is None else speedup,
                        self.ticks_per_unit)


def make_scenario(lengths, horizon, arrivals=(), errors=(), speedup=1,
                  adversary=None, seed=None, resolution=1) -> Scenario:
    """Build a scenario from user units (rationals), choosing the tick grid.

    The tick resolution is the smallest multiple of ``resolution`` that puts
    every time, and every length divided by the speedup, on the grid.
    """
    from .core import build_length_system
    ls = lengths if isinstance(lengths, LengthSystem) else build_length_system(lengths)
    s = to_fraction(speedup)
    times = [to_fraction(t) * ls.scale for t, _ in arrivals]
    times += [to_fraction(e) * ls.scale for e in errors]
    times.append(to_fraction(horizon) * ls.scale)
    if adversary is not None and hasattr(adversary, "time_params"):
        times += [x * ls.scale for x in adversary.time_params(ls)]
    dens = [t.denominator for t in times] + [s.numerator, resolution]
    R = lcm_many(dens)
    tick = lambda t: int(to_fraction(t) * ls.scale * R)
    return Scenario(ls, tick(horizon),
                    [(tick(t), int(i)) for t, i in arrivals],
                    [tick(e) for e in errors], s, R, adversary, seed)


@dataclass(frozen=True)
class TransmissionRecord:
    packet_id: int
    length_index: int
    start: int
    end: int
    outcome: str  # success | jammed | truncated

    @property
    def ok(self) -> bool:
        return self.outcome == SUCCESS


@dataclass
class Trace:
    ls: LengthSystem
    horizon: int
    ticks_per_unit: int
    speedup: Fraction
    records: list[TransmissionRecord] = field(default_factory=list)
    idle_intervals: list[tuple[int, int]] = field(default_factory=list)
    final_queue: tuple[int, ...] = ()
    arrivals: list[tuple[int, int]] = field(default_factory=list)
    errors: list[int] = field(default_factory=list)
    policy: str = ""
    policy_log: list = field(default_factory=list)
    witness: Optional[list[tuple[int, int]]] = None  # adversary's offline plan

    def scenario(self) -> Scenario:
        """The realized pattern as a fixed scenario (for replay and OPT)."""
        return Scenario(self.ls, self.horizon, list(self.arrivals), list(self.errors),
                        self.speedup, self.ticks_per_unit)

    def successes(self):
        return [r for r in self.records if r.outcome == SUCCESS]

    def completion_curve(self, selector="all"):
        """Sorted completion ticks and cumulative completed length."""
        idx = set(select_indices(selector, self.ls.k))
        ends, cum, total = [], [], 0
        for r in self.records:
            if r.outcome == SUCCESS and r.length_index in idx:
                total += self.ls.lengths[r.length_index]
                ends.append(r.end)
                cum.append(total)
        return ends, cum

    def to_json(self) -> dict:
        return {
            "lengths": list(self.ls.lengths),
            "horizon": self.horizon,
            "ticks_per_unit": self.ticks_per_unit,
            "speedup": str(self.speedup),
            "policy": self.policy,
            "records": [[r.packet_id, r.length_index, r.start, r.end, r.outcome]
                        for r in self.records],
            "idle": [list(iv) for iv in self.idle_intervals],
            "final_queue": list(self.final_queue),
            "arrivals": [list(a) for a in self.arrivals],
            "errors": list(self.errors),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Trace":
        ls = LengthSystem(tuple(int(x) for x in doc["lengths"]))
        return cls(ls, int(doc["horizon"]), int(doc["ticks_per_unit"]),
                   Fraction(doc["speedup"]),
                   [TransmissionRecord(*r) for r in doc["records"]],
                   [tuple(iv) for iv in doc.get("idle", [])],
                   tuple(doc.get("final_queue", [])),
                   [tuple(a) for a in doc.get("arrivals", [])],
                   list(doc.get("errors", [])),
                   doc.get("policy", ""))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def completed_length(trace: Trace, up_to: int, selector="all") -> int:
    ends, cum = trace.completion_curve(selector)
    n = bisect_right(ends, up_to)
    return cum[n - 1] if n else 0


class Run:
    """Mutable state of one execution.  Adversaries receive it as their view."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.ls = scenario.ls
        self.now = 0
        self.queue = QueueState(scenario.ls.k)
        self.in_flight: Optional[tuple[int, int, int]] = None  # (index, start, end)
        self.action = None  # None before the decision, "idle" or index after
        self.records: list[TransmissionRecord] = []
        self.arrivals: list[tuple[int, int]] = []
        self.errors: list[int] = []
        self._arr_heap: list[tuple[int, int, int]] = []
        self._jam_heap: list[int] = []
        self._seq = 0
        self._next_pid = 0
        self.completed = 0  # successful length so far, in units

    @property
    def counts(self) -> tuple[int, ...]:
        return self.queue.counts

    def add_arrival(self, t: int, index: int) -> None:
        heapq.heappush(self._arr_heap, (t, self._seq, index))
        self._seq += 1

    def add_jam(self, t: int) -> None:
        heapq.heappush(self._jam_heap, t)

    def deliver(self, t: int) -> None:
        while self._arr_heap and self._arr_heap[0][0] <= t:
            at, _, i = heapq.heappop(self._arr_heap)
            self.queue.push(i, self._next_pid)
            self._next_pid += 1
            self.arrivals.append((at, i))

    def retire_jams(self, t: int) -> None:
        while self._jam_heap and self._jam_heap[0] <= t:
            j = heapq.heappop(self._jam_heap)
            if not self.errors or self.errors[-1] != j:
                self.errors.append(j)

    def next_jam_after(self, t: int) -> Optional[int]:
        # callers retire jams <= t first
        return self._jam_heap[0] if self._jam_heap else None

    def next_arrival(self) -> Optional[int]:
        return self._arr_heap[0][0] if self._arr_heap else None


def _apply_events(run: Run, ev, earliest: int, strict: bool) -> Optional[int]:
    if ev is None:
        return None
    from .adversary import check_events
    check_events(ev, run.now, strict)
    for t, i in ev.arrivals:
        if not 0 <= i < run.ls.k:
            raise InvalidScenario(f"adversary injected bad length index {i}")
        run.add_arrival(t, i)
    for j in ev.jams:
        run.add_jam(j)
    return ev.wake


def run(policy, scenario: Scenario, adversary=None) -> Trace:
    """Execute ``policy`` on ``scenario`` and return the full trace."""
    from .adversary import build_adversary
    sc = scenario
    if adversary is None and sc.adversary is not None:
        adversary = build_adversary(sc.adversary, sc)
    if adversary is not None and hasattr(adversary, "bind"):
        adversary.bind(sc)
    if hasattr(policy, "bind"):
        policy.bind(sc)
    st = Run(sc)
    for t, i in sc.arrivals:
        st.add_arrival(t, i)
    for e in sc.errors:
        st.add_jam(e)
    H = sc.horizon
    idle: list[tuple[int, int]] = []
    dur = [sc.alg_duration(i) for i in range(sc.ls.k)]
    t = 0
    while True:
        st.now = t
        st.deliver(t)
        st.retire_jams(t)
        if t >= H:
            break
        st.action = None
        wake = None
        if adversary is not None:
            wake = _apply_events(st, adversary.next_events(st), t, strict=False)
            st.deliver(t)
            st.retire_jams(t)
        counts = st.queue.counts
        choice = policy.decide(t, counts)
        if choice is None:
            st.action = "idle"
            if adversary is not None:
                w2 = _apply_events(st, adversary.next_events(st), t, strict=True)
                wake = w2 if w2 is not None else wake
            cands = [H]
            na = st.next_arrival()
            if na is not None:
                cands.append(na)
            if wake is not None and wake > t:
                cands.append(wake)
            pw = getattr(policy, "wake_time", None)
            if pw is not None:
                w = pw(t)
                if w is not None and w > t:
                    cands.append(w)
            nt = min(c for c in cands if c > t) if any(c > t for c in cands) else H
            idle.append((t, nt))
            t = nt
            continue
        if not (isinstance(choice, int) and 0 <= choice < sc.ls.k):
            raise PolicyViolation(f"policy returned invalid action {choice!r}")
        if counts[choice] == 0:
            raise PolicyViolation(
                f"{getattr(policy, 'id', policy)} requested length index {choice} "
                f"with no pending packet at t={t}")
        end = t + dur[choice]
        st.action = choice
        st.in_flight = (choice, t, end)
        if adversary is not None:
            _apply_events(st, adversary.next_events(st), t, strict=True)
        j = st.next_jam_after(t)
        pid = st.queue.head(choice)
        if j is not None and j < end and j <= H:
            st.records.append(TransmissionRecord(pid, choice, t, j, JAMMED))
            st.in_flight = None
            policy.feedback(j, choice, False)
            t = j
        elif end > H:
            st.records.append(TransmissionRecord(pid, choice, t, H, TRUNCATED))
            st.in_flight = None
            t = H
        else:
            st.queue.pop(choice)
            st.completed += sc.ls.lengths[choice]
            st.records.append(TransmissionRecord(pid, choice, t, end, SUCCESS))
            st.in_flight = None
            policy.feedback(end, choice, True)
            t = end
    trace = Trace(sc.ls, H, sc.ticks_per_unit, sc.speedup, st.records, idle,
                  st.queue.counts, st.arrivals, st.errors,
                  getattr(policy, "id", type(policy).__name__),
                  list(getattr(policy, "log", []) or []))
    if adversary is not None and hasattr(adversary, "witness"):
        trace.witness = adversary.witness()
    return trace


def trace_problems(trace: Trace) -> list[str]:
    """Structural checks on a (possibly hand-edited) trace; empty when sound."""
    out = []
    ls, R, s = trace.ls, trace.ticks_per_unit, trace.speedup
    dur = [int(l * R / s) for l in ls.lengths]
    jams = sorted(trace.errors)
    busy = sorted([(r.start, r.end) for r in trace.records] + list(trace.idle_intervals))
    for (a0, a1), (b0, b1) in zip(busy, busy[1:]):
        if b0 < a1:
            out.append(f"intervals [{a0},{a1}) and [{b0},{b1}) overlap")
    arrived = [0] * ls.k
    arr = sorted(trace.arrivals)
    pos = 0
    done = [0] * ls.k
    for r in sorted(trace.records, key=lambda r: r.start):
        while pos < len(arr) and arr[pos][0] <= r.start:
            arrived[arr[pos][1]] += 1
            pos += 1
        i = r.length_index
        if not 0 <= i < ls.k:
            out.append(f"record at {r.start} has bad length index {i}")
            continue
        if arrived[i] <= done[i]:
            out.append(f"record at {r.start} sends length index {i} with an empty queue")
        lo = bisect_right(jams, r.start)
        inside = [j for j in jams[lo:] if j < r.start + dur[i]]
        if r.outcome == SUCCESS:
            if r.end - r.start != dur[i]:
                out.append(f"success at {r.start} lasts {r.end - r.start}, expected {dur[i]}")
            if inside:
                out.append(f"success at {r.start} survives jam at {inside[0]}")
            done[i] += 1
        elif r.outcome == JAMMED:
            if not inside or inside[0] != r.end:
                out.append(f"jammed record at {r.start} ends at {r.end}, not at the first jam")
        elif r.outcome == TRUNCATED:
            if r.end != trace.horizon or r.start + dur[i] <= trace.horizon or inside:
                out.append(f"truncated record at {r.start} is inconsistent with the horizon")
        else:
            out.append(f"record at {r.start} has unknown outcome {r.outcome!r}")
    total = [0] * ls.k
    for _, i in trace.arrivals:
        total[i] += 1
    if trace.final_queue and tuple(a - d for a, d in zip(total, done)) != tuple(trace.final_queue):
        out.append("final queue does not match arrivals minus successes")
    return out
