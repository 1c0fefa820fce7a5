import itertools
from fractions import Fraction

import pytest

from jamsched import build_length_system, completed_length, make_scenario, run
from jamsched.errors import BudgetExceeded, InvalidScenario
from jamsched.oracle import offline_opt
from jamsched.policies import make_policy
from jamsched.search import Budget, node_limit_from_env, probe_patterns, worst_case_search

L12 = build_length_system([1, 2])
SMALL = Budget((2, 1), 2, 6)


def brute_min_ratio(pid, ls, budget):
    """Minimum ratio over every pattern in the budget, by plain enumeration."""
    H = budget.horizon
    per_len = []
    for i, m in enumerate(budget.max_per_length):
        opts = []
        for n in range(m + 1):
            opts += [[(t, i) for t in c] for c in
                     itertools.combinations_with_replacement(range(H + 1), n)]
        per_len.append(opts)
    jam_sets = [list(c) for n in range(budget.max_jams + 1)
                for c in itertools.combinations(range(1, H + 1), n)]
    best = Fraction(1)
    for parts in itertools.product(*per_len):
        arr = sorted(sum(parts, []))
        for jams in jam_sets:
            o = offline_opt(ls, arr, jams, H).value
            if o == 0:
                continue
            tr = run(make_policy(pid, ls), make_scenario(ls, H, arr, jams))
            best = min(best, Fraction(completed_length(tr, H), o))
    return best


def test_sl_small_budget():
    res = worst_case_search("sl", L12, SMALL)
    assert res.min_ratio <= Fraction(1, 3) + res.slack
    assert res.slack == Fraction(2, res.l_opt)


def test_ll_strictly_below_sl():
    sl = worst_case_search("sl", L12, SMALL)
    ll = worst_case_search("ll", L12, SMALL)
    assert ll.min_ratio < sl.min_ratio


def test_empty_budget_gives_one():
    res = worst_case_search("greedy", L12, Budget((0, 0), 0, 6))
    assert res.min_ratio == 1 and res.l_opt == 0


@pytest.mark.parametrize("pid", ["sl", "ll", "greedy", "greedy-cover"])
def test_matches_plain_enumeration(pid):
    budget = Budget((1, 1), 1, 4)
    res = worst_case_search(pid, L12, budget, probes=0)
    assert res.min_ratio == brute_min_ratio(pid, L12, budget)


@pytest.mark.parametrize("pid", ["sl", "mgreedy:c=2"])
def test_probes_do_not_change_result(pid):
    ls = build_length_system([2, 3])
    budget = Budget((1, 2), 2, 10)
    a = worst_case_search(pid, ls, budget, probes=0)
    b = worst_case_search(pid, ls, budget, probes=200)
    assert a.min_ratio == b.min_ratio


def test_witness_reproduces():
    res = worst_case_search("sl", L12, SMALL)
    sc = make_scenario(L12, SMALL.horizon, res.arrivals, res.errors)
    tr = run(make_policy("sl", L12), sc)
    assert completed_length(tr, sc.horizon) == res.l_alg
    assert offline_opt(L12, res.arrivals, res.errors, sc.horizon).value == res.l_opt
    assert Fraction(res.l_alg, res.l_opt) == res.min_ratio


def test_probe_incumbent_is_legal():
    ratio, (arr, err, a, o) = probe_patterns("sl", L12, SMALL, n=50)
    assert len([x for x in arr if x[1] == 0]) <= 2 and len(err) <= 2
    assert ratio == Fraction(a, o)


def test_node_limit():
    with pytest.raises(BudgetExceeded):
        worst_case_search("greedy-cover", build_length_system([2, 3]), Budget((3, 3), 3, 16),
                          node_limit=1000, probes=0)


def test_node_limit_env(monkeypatch):
    monkeypatch.setenv("JAMSCHED_NODE_LIMIT", "1e5")
    assert node_limit_from_env() == 10 ** 5
    monkeypatch.setenv("JAMSCHED_NODE_LIMIT", "lots")
    with pytest.raises(InvalidScenario):
        node_limit_from_env()


def test_parallel_matches_sequential():
    a = worst_case_search("sl", L12, SMALL, jobs=1)
    b = worst_case_search("sl", L12, SMALL, jobs=2)
    assert a.min_ratio == b.min_ratio
