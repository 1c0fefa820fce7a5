"""Exhaustive worst-case pattern search for one deterministic policy.

The adversary tree branches only where a choice can lower the ratio:

* jams fall strictly inside a transmission of the policy; any other jam
  leaves the policy's run unchanged and can only shrink the optimum;
* arrivals fall on tick 0, on an idle wake-up tick, or on d + 1 while the
  policy transmits from d; moving an arrival earlier within the same
  transmission (down to d + 1) leaves the policy's run unchanged and can
  only grow the optimum;
* while the policy idles the next event is an arrival at any later tick.

So the minimum over this tree equals the minimum over all patterns within
the budget.  Policy state is rebuilt by replaying the decision history,
since live generators cannot be copied.  A few hundred random legal patterns
are evaluated first; the best of them is a genuine incumbent, so pruning
against it keeps the search exact.
"""
from __future__ import annotations

import itertools
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import LengthSystem, build_length_system
from .errors import BudgetExceeded, InvalidScenario
from .oracle import offline_opt

DEFAULT_NODE_LIMIT = 10 ** 7


def node_limit_from_env() -> int:
    raw = os.environ.get("JAMSCHED_NODE_LIMIT")
    if not raw:
        return DEFAULT_NODE_LIMIT
    try:
        return int(float(raw))
    except ValueError:
        raise InvalidScenario(f"JAMSCHED_NODE_LIMIT must be a number, got {raw!r}")


@dataclass
class Budget:
    max_per_length: tuple[int, ...]
    max_jams: int
    horizon: int  # ticks

    @classmethod
    def uniform(cls, k: int, per_length: int, jams: int, horizon: int) -> "Budget":
        return cls((per_length,) * k, jams, horizon)


@dataclass
class SearchResult:
    min_ratio: Fraction
    arrivals: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    l_alg: int = 0
    l_opt: int = 0
    nodes: int = 0
    leaves: int = 0

    @property
    def slack(self) -> Fraction:
        """One longest packet relative to the witness optimum."""
        return Fraction(0) if not self.l_opt else Fraction(self._lmax, self.l_opt)

    _lmax: int = 0


class _Search:
    def __init__(self, policy_id: str, ls: LengthSystem, budget: Budget, R: int,
                 node_limit: int):
        from .policies import make_policy
        self.make = lambda: make_policy(policy_id, ls)
        self.ls, self.k, self.H, self.R = ls, ls.k, budget.horizon, R
        self.dur = [l * R for l in ls.lengths]  # speed 1 only
        self.budget = budget
        self.limit = node_limit
        self.nodes = 0
        self.leaves = 0
        self.best: Optional[Fraction] = None
        self.best_case = None
        self.arr: list[tuple[int, int]] = []
        self.err: list[int] = []
        self.hist: list[tuple] = []
        self.policy = None
        self.applied = 0
        self.opt_memo: dict = {}
        self.vol = ls.lengths
        self.cap = budget.horizon // R
        self.stateless = getattr(self.make(), "stateless", False)

    # policy replay
    def _sync(self):
        n = len(self.hist)
        if self.stateless and self.policy is not None:
            self.applied = n
            return
        if self.policy is None or self.applied > n:
            self.policy = self.make()
            for h in self.hist:
                if h[0] == "d":
                    self.policy.decide(h[1], h[2])
                else:
                    self.policy.feedback(h[1], h[2], h[3])
            self.applied = n

    def _decide(self, t, counts):
        self._sync()
        a = self.policy.decide(t, counts)
        self.hist.append(("d", t, counts))
        self.applied += 1
        return a

    def _feedback(self, t, i, ok):
        self._sync()
        self.policy.feedback(t, i, ok)
        self.hist.append(("f", t, i, ok))
        self.applied += 1

    def _truncate(self, n):
        del self.hist[n:]
        if self.applied > n:
            self.applied = n + 10 ** 9  # forces a rebuild

    def _leaf(self, l_alg):
        self.leaves += 1
        o = self._opt(self.arr, self.err)
        if o == 0:
            return
        r = Fraction(l_alg, o)
        if self.best is None or r < self.best:
            self.best = r
            self.best_case = (sorted(self.arr), sorted(self.err), l_alg, o)

    def _opt(self, arr, err):
        key = (tuple(sorted(arr)), tuple(sorted(err)))
        o = self.opt_memo.get(key)
        if o is None:
            o = offline_opt(self.ls, list(key[0]), list(key[1]), self.H, self.R,
                            max_packets=64, max_events=256).value
            self.opt_memo[key] = o
        return o

    def _prunable(self, t, l_alg, left) -> bool:
        # Later arrivals help the optimum most by arriving now, later jams
        # only hurt it, and l_alg never decreases.
        if self.best is None or l_alg == 0 and self.best > 0:
            return False
        rest = [(t, i) for i, n in enumerate(left) for _ in range(n)]
        if l_alg >= self.best * min(self.cap, sum(self.vol[i] for _, i in self.arr + rest)):
            return True
        return l_alg >= self.best * self._opt(self.arr + rest, self.err)

    def _vectors(self, left, nonempty=False):
        for v in itertools.product(*(range(n + 1) for n in left)):
            if nonempty and not any(v):
                continue
            yield v

    def _inject(self, t, v):
        for i, n in enumerate(v):
            self.arr.extend([(t, i)] * n)

    def node(self, t, counts, left, jams, l_alg, nonempty=False, only=None, inject=True):
        self.nodes += 1
        if self.nodes > self.limit:
            raise BudgetExceeded(f"search exceeded node limit {self.limit}")
        if t >= self.H:
            self._leaf(l_alg)
            return
        if self._prunable(t, l_alg, left):
            return
        na, nh = len(self.arr), len(self.hist)
        if only is not None:
            vecs = [only]
        elif inject:
            vecs = self._vectors(left, nonempty)
        else:
            vecs = [(0,) * self.k]
        for v in vecs:
            del self.arr[na:]
            self._truncate(nh)
            self._inject(t, v)
            c = tuple(a + b for a, b in zip(counts, v))
            lft = tuple(a - b for a, b in zip(left, v))
            a = self._decide(t, c)
            if a is None:
                self._idle(t, c, lft, jams, l_alg)
            else:
                self._transmit(t, a, c, lft, jams, l_alg)
        del self.arr[na:]
        self._truncate(nh)

    def _idle(self, t, c, left, jams, l_alg):
        na, nh = len(self.arr), len(self.hist)
        self._leaf(l_alg)  # nothing else ever arrives
        if any(left):
            for t2 in range(t + 1, self.H):
                del self.arr[na:]
                self._truncate(nh)
                self.node(t2, c, left, jams, l_alg, nonempty=True)

    def _transmit(self, t, a, c, left, jams, l_alg):
        end = t + self.dur[a]
        na, ne, nh = len(self.arr), len(self.err), len(self.hist)
        if end > self.H:
            # the policy never decides again: a jam could only help it, and
            # the whole remaining budget at t + 1 only helps the optimum
            if t + 1 < self.H:
                self._inject(t + 1, left)
            self._leaf(l_alg)
            del self.arr[na:]
            return
        late = [(0,) * self.k]
        has_late = t + 1 < end
        if has_late:
            late = list(self._vectors(left))
        hits = list(range(t + 1, end)) if jams else []
        for v in late:
            lft = tuple(x - y for x, y in zip(left, v))
            c2 = tuple(x + y for x, y in zip(c, v))
            for j in hits + [None]:
                del self.arr[na:]
                del self.err[ne:]
                self._truncate(nh)
                self._inject(t + 1, v)
                if j is not None:
                    self.err.append(j)
                    self._feedback(j, a, False)
                    self.node(j, c2, lft, jams - 1, l_alg, inject=False)
                else:
                    self._feedback(end, a, True)
                    done = list(c2)
                    done[a] -= 1
                    self.node(end, tuple(done), lft, jams, l_alg + self.vol[a],
                              inject=not has_late)
        del self.arr[na:]
        del self.err[ne:]
        self._truncate(nh)


def _run_subtree(args):
    policy_id, lengths, budget, R, limit, root, incumbent = args
    s = _Search(policy_id, LengthSystem(tuple(lengths)), budget, R, limit)
    if incumbent is not None:
        s.best, s.best_case = incumbent
    s.node(0, (0,) * len(lengths), budget.max_per_length, budget.max_jams, 0, only=root)
    return s.best, s.best_case, s.nodes, s.leaves


def probe_patterns(policy_id, ls, budget, R=1, n=300, seed=0):
    """Best ratio over random legal patterns; a valid incumbent for the search."""
    from .engine import Scenario, completed_length, run
    from .policies import make_policy
    rng = random.Random(seed)
    H = budget.horizon
    best = None
    for _ in range(n):
        arr = sorted((rng.randrange(H), i) for i, m in enumerate(budget.max_per_length)
                     for _ in range(rng.randint(0, m))) if H else []
        err = sorted(rng.sample(range(1, H), min(rng.randint(0, budget.max_jams), H - 1))) \
            if H > 1 else []
        o = offline_opt(ls, arr, err, H, R, max_packets=64, max_events=256).value
        if o == 0:
            continue
        tr = run(make_policy(policy_id, ls), Scenario(ls, H, arr, err, 1, R))
        a = completed_length(tr, H)
        r = Fraction(a, o)
        if best is None or r < best[0]:
            best = (r, (arr, err, a, o))
    return best


def worst_case_search(policy_id: str, lengths, budget: Budget, ticks_per_unit: int = 1,
                      node_limit: Optional[int] = None, jobs: int = 1,
                      probes: int = 300) -> SearchResult:
    """Exact minimum of L_alg/L_opt over every pattern within ``budget``.

    Patterns whose optimum is 0 are skipped; if every pattern has optimum 0
    the ratio is 1 (both sides zero).  The policy runs at speed 1.
    """
    ls = lengths if isinstance(lengths, LengthSystem) else build_length_system(lengths)
    if len(budget.max_per_length) != ls.k:
        raise InvalidScenario("budget needs one packet cap per length")
    if budget.horizon < 0 or budget.max_jams < 0 or min(budget.max_per_length) < 0:
        raise InvalidScenario("budget entries must be non-negative")
    limit = node_limit_from_env() if node_limit is None else node_limit
    from .policies import make_policy
    make_policy(policy_id, ls)  # fail early on bad ids / length systems
    roots = list(itertools.product(*(range(n + 1) for n in budget.max_per_length)))
    inc = probe_patterns(policy_id, ls, budget, ticks_per_unit, probes) if probes else None
    tasks = [(policy_id, ls.lengths, budget, ticks_per_unit, limit, r, inc) for r in roots]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            parts = list(ex.map(_run_subtree, tasks))
    else:
        parts = []
        used = 0
        for tk in tasks:
            tk = tk[:4] + (limit - used,) + tk[5:6] + (inc,)
            parts.append(_run_subtree(tk))
            used += parts[-1][2]
            if parts[-1][0] is not None:
                inc = (parts[-1][0], parts[-1][1])
    nodes = sum(p[2] for p in parts)
    if nodes > limit:
        raise BudgetExceeded(f"search used {nodes} nodes, limit {limit}")
    res = SearchResult(Fraction(1), nodes=nodes, leaves=sum(p[3] for p in parts))
    res._lmax = ls.lmax
    if inc is not None:
        parts.append((inc[0], inc[1], 0, 0))
    for best, case, _, _ in parts:
        if best is not None and (best < res.min_ratio or res.l_opt == 0):
            res.min_ratio = best
            res.arrivals, res.errors, res.l_alg, res.l_opt = case
    return res
