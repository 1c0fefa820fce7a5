"""Length systems, queues and the derived throughput constants.

Lengths are kept as integers (user-supplied rationals are rescaled by the
LCM of their denominators) and every ratio is a :class:`fractions.Fraction`.
Length indices are 0-based throughout the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

from .errors import InvalidLengths, InvalidSelector

Rational = Union[int, Fraction, str]


def to_fraction(value: Rational) -> Fraction:
    if isinstance(value, float):
        # floats are accepted only when they are exact small decimals
        return Fraction(str(value))
    return Fraction(value)


def lcm_many(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


@dataclass(frozen=True)
class LengthSystem:
    lengths: tuple[int, ...]
    scale: int = 1  # user lengths = lengths / scale

    def __post_init__(self):
        if len(self.lengths) < 2:
            raise InvalidLengths("need at least two packet lengths, got %d" % len(self.lengths))
        if any(not isinstance(x, int) or x <= 0 for x in self.lengths):
            raise InvalidLengths("lengths must be positive integers: %r" % (self.lengths,))
        if any(b <= a for a, b in zip(self.lengths, self.lengths[1:])):
            raise InvalidLengths("lengths must be strictly increasing: %r" % (self.lengths,))

    @property
    def k(self) -> int:
        return len(self.lengths)

    @property
    def lmin(self) -> int:
        return self.lengths[0]

    @property
    def lmax(self) -> int:
        return self.lengths[-1]

    @property
    def rho(self) -> Fraction:
        return Fraction(self.lmax, self.lmin)

    @cached_property
    def divisible(self) -> bool:
        return all(b % a == 0 for a, b in zip(self.lengths, self.lengths[1:]))

    def ratio(self, i: int, j: int) -> Fraction:
        """rho_{i,j} = l_i / l_j."""
        return Fraction(self.lengths[i], self.lengths[j])

    @cached_property
    def ratios(self) -> dict[tuple[int, int], Fraction]:
        return {(i, j): self.ratio(i, j)
                for i in range(self.k) for j in range(i)}

    def __len__(self):
        return self.k


def build_length_system(raw_lengths: Sequence[Rational]) -> LengthSystem:
    try:
        fracs = [to_fraction(x) for x in raw_lengths]
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InvalidLengths(f"unparseable length: {exc}") from None
    if len(fracs) < 2:
        raise InvalidLengths("need at least two packet lengths, got %d" % len(fracs))
    if any(f <= 0 for f in fracs):
        raise InvalidLengths("lengths must be positive")
    if any(b <= a for a, b in zip(fracs, fracs[1:])):
        raise InvalidLengths("lengths must be strictly increasing")
    scale = lcm_many(f.denominator for f in fracs)
    return LengthSystem(tuple(int(f * scale) for f in fracs), scale)


def upper_bound_gamma(ls: LengthSystem) -> Fraction:
    """Best relative throughput any online policy can guarantee on ``ls``."""
    best = None
    for r in ls.ratios.values():
        fl = math.floor(r)
        val = Fraction(fl) / (fl + r)
        if best is None or val < best:
            best = val
    return best


def f_constants(ls: LengthSystem) -> list[int]:
    """Additive slacks f_1..f_k of the busy-interval bound for Greedy."""
    L = ls.lengths
    f = [L[-1]]
    for i in range(1, ls.k):
        f.append(f[-1] + 3 * L[i] + L[i - 1] + L[-1])
    return f


def aux_constants(ls: LengthSystem) -> tuple[Fraction, Fraction]:
    """Return (delta, eta).

    delta is the worst rounding ratio rho_{i,j}/floor(rho_{i,j}); eta is the
    throughput floor of the cover variant, min (rho_i - 1)/(2 rho_i - 1) over
    consecutive ratios.
    """
    delta = max(r / math.floor(r) for r in ls.ratios.values())
    eta = min((r - 1) / (2 * r - 1)
              for r in (ls.ratio(i, i - 1) for i in range(1, ls.k)))
    return delta, eta


@dataclass
class QueueState:
    """Pending packets per length index, FIFO within a class."""
    k: int
    fifo: list[list[int]] = field(default_factory=list)

    def __post_init__(self):
        if not self.fifo:
            self.fifo = [[] for _ in range(self.k)]

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "QueueState":
        q = cls(len(counts))
        pid = 0
        for i, n in enumerate(counts):
            q.fifo[i] = list(range(pid, pid + n))
            pid += n
        return q

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.fifo)

    def push(self, index: int, packet_id: int) -> None:
        self.fifo[index].append(packet_id)

    def head(self, index: int) -> int:
        return self.fifo[index][0]

    def pop(self, index: int) -> int:
        return self.fifo[index].pop(0)

    def empty(self) -> bool:
        return not any(self.fifo)

    def copy(self) -> "QueueState":
        return QueueState(self.k, [list(f) for f in self.fifo])


@dataclass(frozen=True)
class Packet:
    id: int
    length_index: int
    arrival: int


def _selected(selector, k: int) -> range:
    if selector == "all":
        return range(k)
    if isinstance(selector, int):
        if not 0 <= selector < k:
            raise InvalidSelector(f"length index {selector} outside [0, {k})")
        return range(selector, selector + 1)
    try:
        op, idx = selector
    except (TypeError, ValueError):
        raise InvalidSelector(f"bad selector {selector!r}") from None
    if not isinstance(idx, int) or not 0 <= idx < k:
        raise InvalidSelector(f"length index {idx!r} outside [0, {k})")
    if op == "<":
        return range(0, idx)
    if op == "<=":
        return range(0, idx + 1)
    if op == ">=":
        return range(idx, k)
    if op == ">":
        return range(idx + 1, k)
    raise InvalidSelector(f"unknown selector operator {op!r}")


def select_indices(selector, k: int) -> range:
    """Resolve ``"all"``, an index, or ``(op, index)`` with op in <, <=, >=, >."""
    return _selected(selector, k)


def queue_volume(q, ls: LengthSystem, selector="all") -> int:
    counts = q.counts if isinstance(q, QueueState) else tuple(q)
    if len(counts) != ls.k:
        raise InvalidSelector("queue has %d classes, length system %d" % (len(counts), ls.k))
    return sum(ls.lengths[i] * counts[i] for i in _selected(selector, ls.k))
