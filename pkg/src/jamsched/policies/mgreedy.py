"""Stage-based MGreedy and its adaptive-c variant."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InvalidScenario
from .base import IDLE, GeneratorPolicy


class _StageAbort(Exception):
    pass


@dataclass
class StageRecord:
    index: int
    start: int
    c: int
    candidates: frozenset
    istar: list = field(default_factory=list)   # i* after every attempt
    calls: list = field(default_factory=list)   # attempted lengths per top-level call
    end: int | None = None
    completed: bool = False


class MGreedy(GeneratorPolicy):
    """Greedy restricted to one interesting length per stage.

    A stage picks the candidate set ``{i : n_i l_i >= c k l_k}`` and commits
    to its minimum ``i*``; it runs ``c k`` top-level cover groups in which
    every transmission uses length ``l_{i*}``.  After each attempt new
    candidates join and ``i*`` can only move down.  If the queue of ``i*``
    runs dry the stage is closed early.
    """
    id = "mgreedy"

    def __init__(self, ls, c=4):
        super().__init__(ls)
        if int(c) < 1:
            raise InvalidScenario("mgreedy needs c >= 1")
        self.c = int(c)
        self.stages: list[StageRecord] = []
        self.C: set[int] = set()
        self.istar = None

    def candidates(self):
        thr = self.c * self.k * self.L[-1]
        return {i for i in range(self.k) if self.L[i] * self.q[i] >= thr}

    def program(self):
        while True:
            while not self.candidates():
                yield IDLE
            self.C = self.candidates()
            self.istar = min(self.C)
            st = StageRecord(len(self.stages), self.t, self.c, frozenset(self.C))
            self.stages.append(st)
            self._stage = st
            try:
                for _ in range(self.c * self.k):
                    st.calls.append(set())
                    yield from self.group(self.k - 1)
                st.completed = True
            except _StageAbort:
                if st.calls and not st.calls[-1]:
                    st.calls.pop()
            st.end = self.t
            self.stage_finished(st)

    def stage_finished(self, st):
        pass

    def group(self, j):
        L = self.L
        ell = 0
        while ell <= L[j] - L[self.istar]:
            if j > self.istar:
                ell += yield from self.group(j - 1)
            else:
                if self.q[j] == 0:
                    raise _StageAbort
                self._stage.calls[-1].add(j)
                ok = yield j
                self.C |= self.candidates()
                self.istar = min(self.C)
                self._stage.istar.append(self.istar)
                if ok:
                    ell = L[j]
        return ell

    @property
    def log(self):
        return [("stage", s.index, s.start, s.end, s.completed, [sorted(c) for c in s.calls])
                for s in self.stages]

    @log.setter
    def log(self, value):
        pass


class MGreedyAdaptive(MGreedy):
    """MGreedy that doubles c between stages once the length transmitted
    since the last doubling reaches ``W c^2 k l_k``."""
    id = "mgreedy-adaptive"

    def __init__(self, ls, c0=2, W=16):
        super().__init__(ls, c0)
        self.W = int(W)
        self.since_doubling = 0
        self.doublings: list[tuple[int, int]] = []

    def threshold(self) -> int:
        return self.W * self.c * self.c * self.k * self.L[-1]

    def feedback(self, t, index, success):
        super().feedback(t, index, success)
        if success:
            self.since_doubling += self.L[index]

    def maybe_double(self) -> bool:
        if self.since_doubling >= self.threshold():
            self.c *= 2
            self.since_doubling = 0
            self.doublings.append((self.t, self.c))
            return True
        return False

    def stage_finished(self, st):
        self.maybe_double()
