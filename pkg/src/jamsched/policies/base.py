"""Policy protocol.

A policy is asked ``decide(t, counts)`` at every decision point and answers
with a 0-based length index to transmit, or ``None`` to stay idle.  The
outcome of each transmission comes back through ``feedback``.

The stateful policies are written as generators: every ``yield`` hands
an action to the engine and receives the outcome of a transmission
(``True``/``False``) or ``None`` after an idle step.  Recursive group calls
become ``yield from``.
"""
from __future__ import annotations

from ..core import LengthSystem
from ..errors import UnsupportedLengthSystem

IDLE = None


class Policy:
    id = "policy"
    requires_divisible = False

    def __init__(self, ls: LengthSystem):
        if self.requires_divisible and not ls.divisible:
            raise UnsupportedLengthSystem(
                f"{self.id} needs consecutive lengths to divide each other, got {ls.lengths}")
        self.ls = ls
        self.L = ls.lengths
        self.k = ls.k
        self.log: list = []

    def bind(self, scenario) -> None:
        pass

    def decide(self, t: int, counts):
        raise NotImplementedError

    def feedback(self, t: int, index: int, success: bool) -> None:
        pass

    # queue volume helpers over the counts seen at the latest decision
    def vol_below(self, j: int) -> int:
        return sum(self.L[i] * self.q[i] for i in range(j))

    def vol(self) -> int:
        return sum(l * n for l, n in zip(self.L, self.q))


class GeneratorPolicy(Policy):
    """Drives ``self.program()`` one action at a time."""

    def __init__(self, ls):
        super().__init__(ls)
        self.q = (0,) * ls.k
        self.t = 0
        self._gen = None
        self._outcome = None

    def restart(self) -> None:
        self._gen = self.program()
        self._outcome = None

    def decide(self, t, counts):
        self.t, self.q = t, counts
        if self._gen is None:
            self.restart()
        outcome, self._outcome = self._outcome, None
        return self._gen.send(outcome) if outcome is not None else next(self._gen)

    def feedback(self, t, index, success):
        self.t = t
        self._outcome = bool(success)

    def program(self):
        raise NotImplementedError
