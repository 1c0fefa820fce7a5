"""Prudent: preamble of short blocks, then longest-first, restarted at every jam."""
from .base import IDLE, GeneratorPolicy


class Prudent(GeneratorPolicy):
    """Phase-based policy meant to run at speedup 2.

    A phase starts after each jam.  It idles until some class holds at least
    ``l_k`` volume, takes the smallest such class i and sends
    ``l_{i+1}/l_i`` of its packets.  While the phase total ``sent`` is below
    ``l_k`` it sends packets of the largest j with ``n_j l_j >= l_k - sent``
    and ``l_j <= sent``.  Afterwards, or when no such j exists, it transmits
    the longest pending packet until the next jam.

    ``preamble="level"`` (default) sizes each growth block so that ``sent``
    climbs one length level, ``l_m -> l_{m+1}``; the preamble then totals
    exactly ``l_k`` and takes ``l_k/2`` time at speedup 2.  ``"literal"``
    sends ``l_{j+1}/l_j`` packets per block and adds ``l_{j+1}``, which can
    overshoot ``l_k`` (e.g. [1,2,4,8] from class 2 sends 4 + 8).
    """
    id = "prudent"
    requires_divisible = True

    def __init__(self, ls, preamble="level"):
        super().__init__(ls)
        if preamble not in ("level", "literal"):
            raise ValueError(f"unknown preamble rule {preamble!r}")
        self.preamble = preamble
        self.mode = "preamble"
        self.sent = 0
        self.last_error = None

    def feedback(self, t, index, success):
        super().feedback(t, index, success)
        if not success:
            self.last_error = t
            self.restart()

    def restart(self):
        self.mode = "preamble"
        self.sent = 0
        super().restart()

    def block(self, i, count):
        self.log.append(("block", self.t, i, self.sent))
        sent = 0
        for _ in range(count):
            if self.q[i] == 0:
                break
            yield i
            sent += self.L[i]
        return sent

    def program(self):
        L, k = self.L, self.k
        lk = L[-1]
        while not any(L[i] * self.q[i] >= lk for i in range(k)):
            yield IDLE
        i = min(i for i in range(k) if L[i] * self.q[i] >= lk)
        if i < k - 1:
            self.sent = yield from self.block(i, L[i + 1] // L[i])
            while self.sent < lk:
                js = [j for j in range(k)
                      if self.q[j] * L[j] >= lk - self.sent and L[j] <= self.sent]
                if not js:
                    break
                j = max(js)
                if self.preamble == "literal":
                    self.sent += yield from self.block(j, L[j + 1] // L[j])
                else:
                    nxt = next((l for l in L if l > self.sent), lk)
                    self.sent += yield from self.block(j, (nxt - self.sent) // L[j])
        self.mode = "longest"
        while True:
            pending = [i for i in range(k) if self.q[i] > 0]
            yield pending[-1] if pending else IDLE
