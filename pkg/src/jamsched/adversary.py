"""Arrival and jam sources: scripted, stochastic and constructive adversaries.

An adversary is consulted by the engine at every decision point, once
before the policy decides (``view.action is None``) and once after
(``view.action`` is ``"idle"`` or the chosen length index).  It answers with
:class:`Events`.  Constructive adversaries also keep the offline schedule
they are playing against the policy; :meth:`witness` returns it as a list of
``(start_tick, length_index)`` pairs.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import AdversaryViolation, InvalidScenario


@dataclass
class Events:
    arrivals: list[tuple[int, int]] = field(default_factory=list)
    jams: list[int] = field(default_factory=list)
    wake: Optional[int] = None


def check_events(ev: Events, now: int, strict: bool) -> None:
    for t, _ in ev.arrivals:
        if t < now or (strict and t == now):
            raise AdversaryViolation(f"arrival at {t} is in the past (now={now})")
    for j in ev.jams:
        if j < now or (strict and j == now):
            raise AdversaryViolation(f"jam at {j} is in the past (now={now})")


@dataclass
class AdversarySpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None

    def time_params(self, ls=None) -> list[Fraction]:
        """Times (in user units) the tick grid must represent exactly."""
        kind = self.kind.lower().replace("_", "-")
        if kind != "ll-killer":
            return []
        if "period" in self.params:
            return [Fraction(self.params["period"])]
        if ls is None:
            return []
        return [Fraction(19, 20) * ls.lmax / ls.scale]


class Adversary:
    """Base class; subclasses override :meth:`next_events`."""

    def __init__(self):
        self._last_now = -1
        self.sc = None

    def bind(self, scenario) -> None:
        self.sc = scenario

    def _fit(self, plan):
        # witness transmissions must complete within the horizon
        sc = self.sc
        return [(s, i) for s, i in plan if s + sc.opt_duration(i) <= sc.horizon]

    def _clock(self, now: int) -> None:
        if now < self._last_now:
            raise AdversaryViolation(f"time went backwards: {now} < {self._last_now}")
        self._last_now = now

    def next_events(self, view) -> Optional[Events]:
        self._clock(view.now)
        return None


class PatternAdversary(Adversary):
    """Releases a fixed pattern at the first call."""

    def __init__(self, arrivals=(), jams=()):
        super().__init__()
        self.arrivals = list(arrivals)
        self.jams = list(jams)
        self._sent = False

    def next_events(self, view):
        self._clock(view.now)
        if self._sent:
            return None
        self._sent = True
        return Events(list(self.arrivals), list(self.jams))


class ScriptedAdversary(PatternAdversary):
    """Replays recorded (tick, index) arrivals and jam ticks."""


class StochasticAdversary(PatternAdversary):
    """Poisson arrivals with per-length weights; renewal jam process.

    ``rate`` is arrivals per unit time, ``mean_gap`` the mean jam spacing in
    units (omit it for no jams).  Fully determined by ``seed``.
    """

    def __init__(self, rate=1, weights=None, mean_gap=None, seed=0):
        super().__init__()
        self.rate = float(Fraction(rate))
        self.weights = weights
        self.mean_gap = None if mean_gap is None else float(Fraction(mean_gap))
        self.seed = seed

    def bind(self, scenario):
        super().bind(scenario)
        rng = random.Random(self.seed)
        R = scenario.ticks_per_unit * scenario.ls.scale
        H = scenario.horizon
        k = scenario.ls.k
        w = self.weights or [1] * k
        t = 0.0
        arrivals = []
        while True:
            t += rng.expovariate(self.rate)
            tick = int(t * R)
            if tick > H:
                break
            arrivals.append((tick, rng.choices(range(k), weights=w)[0]))
        jams = []
        if self.mean_gap:
            t = 0.0
            while True:
                t += rng.expovariate(1.0 / self.mean_gap)
                tick = int(t * R)
                if tick > H:
                    break
                if not jams or jams[-1] != tick:
                    jams.append(tick)
        self.arrivals, self.jams = arrivals, jams


class TwoLengthDriver(Adversary):
    """Adaptive adversary over one long and one short length.

    Rounds: ``shorts_per_round`` short packets are injected whenever the
    offline schedule has used up its short backlog.  When the policy starts a
    short packet outside a window, an error-free window of one long duration
    opens; the offline side sends a long packet in it and a jam closes it.
    When the policy starts a long packet outside a window it is jammed one
    tick before completion while the offline side drains short packets.
    """

    def __init__(self, long_index, short_index, shorts_per_round=None):
        super().__init__()
        if not short_index < long_index:
            raise InvalidScenario("TwoLengthDriver needs short_index < long_index")
        self.i = long_index
        self.j = short_index
        self.spr = shorts_per_round
        self.plan: list[tuple[int, int]] = []
        self.off_short = 0
        self.off_long = 0
        self.window_end = None
        self.started = False
        self.rounds = 0

    def bind(self, scenario):
        super().bind(scenario)
        ls = scenario.ls
        if self.i >= ls.k:
            raise InvalidScenario("TwoLengthDriver long index out of range")
        if self.spr is None:
            self.spr = math.floor(ls.ratio(self.i, self.j))
        self.A = scenario.opt_duration(self.j)
        self.B = scenario.opt_duration(self.i)
        self.b_alg = scenario.alg_duration(self.i)
        if self.b_alg < 2:
            raise InvalidScenario("tick grid too coarse for TwoLengthDriver")

    def _send_shorts(self, start, room):
        n = min(self.off_short, room // self.A)
        for m in range(n):
            self.plan.append((start + m * self.A, self.j))
        self.off_short -= n

    def next_events(self, view):
        self._clock(view.now)
        now = view.now
        if self.window_end is not None and now >= self.window_end:
            self.window_end = None
        act = view.action
        if act is None:
            if self.window_end is not None:
                return None
            arr = []
            if self.off_short == 0:
                arr += [(now, self.j)] * self.spr
                self.off_short += self.spr
                self.rounds += 1
            if self.off_long == 0 or view.counts[self.i] == 0:
                arr.append((now, self.i))
                self.off_long += 1
            self.started = True
            return Events(arr)
        if act == "idle":
            if self.window_end is not None:
                return Events(wake=self.window_end)
            self._send_shorts(now, self.A)
            self.off_long += 1
            return Events([(now + self.A, self.i)])
        if self.window_end is not None:
            return None
        if act == self.j:
            self.window_end = now + self.B
            if self.off_long > 0:
                self.plan.append((now, self.i))
                self.off_long -= 1
            else:
                self._send_shorts(now, self.B)
            return Events(jams=[self.window_end])
        if act == self.i:
            self._send_shorts(now, self.b_alg - 1)
            return Events(jams=[now + self.b_alg - 1])
        return None

    def witness(self):
        return self._fit(self.plan)


class LLKiller(PatternAdversary):
    """Periodic jams just shorter than a long packet.

    One long packet arrives at 0 and ceil(period/l_1) short packets at the
    start of every period.  A longest-first sender never completes anything;
    the offline side fills every period with short packets.
    """

    def __init__(self, period=None):
        super().__init__()
        self.period = None if period is None else Fraction(period)

    def bind(self, scenario):
        super().bind(scenario)
        ls = scenario.ls
        R = scenario.ticks_per_unit * ls.scale
        per = self.period if self.period is not None else Fraction(19, 20) * ls.lmax / ls.scale
        P = per * R
        if P.denominator != 1:
            raise InvalidScenario("LLKiller period is not on the tick grid")
        P = int(P)
        A = scenario.opt_duration(0)
        if not (A <= P < scenario.alg_duration(ls.k - 1)):
            raise InvalidScenario("LLKiller period must lie in [l_1, l_k)")
        H = scenario.horizon
        per_round = -(-P // A)
        self.arrivals = [(0, ls.k - 1)]
        self.jams = []
        self.plan = []
        t = 0
        while t <= H:
            self.arrivals += [(t, 0)] * per_round
            if t + P <= H:
                self.jams.append(t + P)
            self.plan += [(t + m * A, 0) for m in range(P // A)]
            t += P
        self.arrivals.sort()
        self.P = P

    def witness(self):
        return self._fit(self.plan)


class SLBound(PatternAdversary):
    """Supercycle pinning shortest-first at 1/(1+rho).

    Each cycle one short and one long packet arrive together; an error-free
    window of one long duration is closed by a jam, then a second jam one
    tick short of a further long duration kills the long attempt that
    follows.  Two jam phasings are generated and the one worse for
    shortest-first is kept.
    """

    def __init__(self, phasing=None):
        super().__init__()
        self.phasing = phasing

    def _pattern(self, sc, phasing):
        B = sc.opt_duration(sc.ls.k - 1)
        Ba = sc.alg_duration(sc.ls.k - 1)
        first, second = (B, Ba - 1) if phasing == 0 else (Ba - 1, B)
        arrivals, jams, plan = [], [], []
        t = 0
        H = sc.horizon
        while t <= H:
            arrivals += [(t, 0), (t, sc.ls.k - 1)]
            for j in (t + first, t + first + second):
                if j <= H:
                    jams.append(j)
            if phasing == 0:
                plan += [(t, sc.ls.k - 1), (t + B, 0)]
            else:
                plan += [(t, 0), (t + first, sc.ls.k - 1)]
            t += first + second
        return arrivals, jams, plan

    def bind(self, scenario):
        super().bind(scenario)
        from .engine import run
        from .policies import ShortestFirst
        sc = scenario
        if sc.opt_duration(0) > sc.alg_duration(sc.ls.k - 1) - 1:
            raise InvalidScenario("SLBound needs l_1 shorter than l_k by one tick")
        options = [self.phasing] if self.phasing is not None else [0, 1]
        best = None
        for ph in options:
            arr, jams, plan = self._pattern(sc, ph)
            tr = run(ShortestFirst(sc.ls), sc.with_pattern(arr, jams))
            score = sum(sc.ls.lengths[r.length_index] for r in tr.successes())
            if best is None or score < best[0]:
                best = (score, ph, arr, jams, plan)
        _, self.phasing, self.arrivals, self.jams, self.plan = best

    def witness(self):
        return self._fit(self.plan)


def build_adversary(spec, scenario=None):
    """Instantiate an adversary from an :class:`AdversarySpec` (or pass one through)."""
    if hasattr(spec, "next_events"):
        return spec
    if isinstance(spec, dict):
        spec = AdversarySpec(spec["kind"], {k: v for k, v in spec.items()
                                            if k not in ("kind", "seed")},
                             spec.get("seed"))
    p = dict(spec.params)
    kind = spec.kind.lower().replace("_", "-")
    if kind == "scripted":
        return ScriptedAdversary(p.get("arrivals", ()), p.get("jams", ()))
    if kind == "stochastic":
        return StochasticAdversary(p.get("rate", 1), p.get("weights"),
                                   p.get("mean_gap"), spec.seed or 0)
    if kind in ("two-length", "two-length-driver"):
        return TwoLengthDriver(int(p["long"]), int(p["short"]), p.get("shorts_per_round"))
    if kind == "ll-killer":
        return LLKiller(p.get("period"))
    if kind == "sl-bound":
        return SLBound(p.get("phasing"))
    raise InvalidScenario(f"unknown adversary kind {spec.kind!r}")


def two_length_driver(i: int, j: int, ls=None, shorts_per_round=None) -> AdversarySpec:
    if not j < i:
        raise InvalidScenario("two_length_driver needs j < i")
    if ls is not None and i >= ls.k:
        raise InvalidScenario("length index out of range")
    params = {"long": i, "short": j}
    if shorts_per_round is not None:
        params["shorts_per_round"] = shorts_per_round
    return AdversarySpec("two-length", params)
