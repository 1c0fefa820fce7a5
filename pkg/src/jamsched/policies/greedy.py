"""Greedy group scheduling and its cover variant for arbitrary lengths."""
from .base import IDLE, GeneratorPolicy


class Greedy(GeneratorPolicy):
    """Shortest-first in groups that balance the next larger length.

    Stays idle while the queued volume is below ``l_k``; otherwise runs one
    top-level group of level k.  A group of level j either splits into
    ``l_j / l_{j-1}`` groups of level j-1 (when the shorter packets cover
    ``l_j``) or transmits one ``l_j`` packet, retrying after each jam and
    re-checking the split condition before every retry.
    """
    id = "greedy"
    requires_divisible = True

    def program(self):
        top = self.k - 1
        while True:
            while self.vol() < self.L[top]:
                yield IDLE
            self.log.append(("group", self.t))
            yield from self.group(top)

    def group(self, j):
        L = self.L
        while True:
            if j > 0 and self.vol_below(j) >= L[j]:
                for _ in range(L[j] // L[j - 1]):
                    yield from self.group(j - 1)
                return L[j]
            if (yield j):
                return L[j]


class GreedyCover(Greedy):
    """Greedy where level j keeps calling level j-1 while its transmitted
    length is at most ``l_j - l_{j-1}``; needs no divisibility."""
    id = "greedy-cover"
    requires_divisible = False

    def group(self, j):
        L = self.L
        while True:
            if j > 0 and self.vol_below(j) >= L[j]:
                acc = 0
                while acc <= L[j] - L[j - 1]:
                    acc += yield from self.group(j - 1)
                return acc
            if (yield j):
                return L[j]
