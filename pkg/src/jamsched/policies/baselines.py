"""Work-conserving baselines and a plan-replaying policy."""
from ..errors import PolicyViolation
from .base import IDLE, Policy


class ShortestFirst(Policy):
    id = "sl"
    stateless = True

    def decide(self, t, counts):
        for i, n in enumerate(counts):
            if n:
                return i
        return IDLE


class LongestFirst(Policy):
    id = "ll"
    stateless = True

    def decide(self, t, counts):
        for i in range(len(counts) - 1, -1, -1):
            if counts[i]:
                return i
        return IDLE


class PlanPolicy(Policy):
    """Replays a fixed list of ``(start_tick, length_index)`` transmissions."""
    id = "plan"

    def __init__(self, ls, plan):
        super().__init__(ls)
        self.plan = sorted(plan)
        self.pos = 0
        self.failures = 0

    def decide(self, t, counts):
        if self.pos >= len(self.plan):
            return IDLE
        start, i = self.plan[self.pos]
        if start > t:
            return IDLE
        if start < t:
            raise PolicyViolation(f"plan entry at {start} missed (now {t})")
        self.pos += 1
        return i

    def wake_time(self, t):
        if self.pos < len(self.plan):
            return self.plan[self.pos][0]
        return None

    def feedback(self, t, index, success):
        if not success:
            self.failures += 1
