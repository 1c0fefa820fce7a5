from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from jamsched.core import (LengthSystem, QueueState, aux_constants, build_length_system,
                           f_constants, queue_volume, upper_bound_gamma)
from jamsched.errors import InvalidLengths, InvalidSelector


def test_build_divisible():
    ls = build_length_system([1, 2, 4])
    assert ls.k == 3 and ls.divisible and ls.rho == 4


def test_build_non_divisible():
    ls = build_length_system([2, 3])
    assert ls.k == 2 and not ls.divisible
    assert ls.ratio(1, 0) == Fraction(3, 2)


@pytest.mark.parametrize("raw", [[1], [], [2, 1], [1, 1], [0, 1], [-1, 2]])
def test_build_rejects(raw):
    with pytest.raises(InvalidLengths):
        build_length_system(raw)


def test_rational_lengths_rescale():
    ls = build_length_system([Fraction(1, 2), Fraction(3, 4)])
    assert ls.lengths == (2, 3) and ls.scale == 4


@pytest.mark.parametrize("lens,gamma", [([1, 2, 4], Fraction(1, 2)), ([2, 3], Fraction(2, 5)),
                                        ([1, 2, 3], Fraction(2, 5))])
def test_gamma(lens, gamma):
    assert upper_bound_gamma(build_length_system(lens)) == gamma


def test_f_constants():
    assert f_constants(build_length_system([1, 2, 4])) == [4, 15, 33]
    # the recurrence gives 2 + 3*2 + 1 + 2 = 11 for the second constant
    assert f_constants(build_length_system([1, 2])) == [2, 11]


def test_aux_constants():
    assert aux_constants(build_length_system([2, 3])) == (Fraction(3, 2), Fraction(1, 4))
    assert aux_constants(build_length_system([1, 2, 4])) == (1, Fraction(1, 3))


def test_queue_volume():
    ls = build_length_system([1, 2, 4])
    assert queue_volume((5, 1, 1), ls, "all") == 11
    assert queue_volume((5, 1, 1), ls, ("<", 2)) == 7
    for sel in ("all", 0, 2, ("<", 1), ("<=", 1), (">=", 1), (">", 0)):
        assert queue_volume((0, 0, 0), ls, sel) == 0
    with pytest.raises(InvalidSelector):
        queue_volume((0, 0, 0), ls, ("!", 1))


def test_queue_fifo():
    q = QueueState(2)
    q.push(0, 7)
    q.push(0, 8)
    q.push(1, 9)
    assert q.counts == (2, 1) and q.head(0) == 7
    assert q.pop(0) == 7 and q.head(0) == 8
    c = q.copy()
    c.pop(1)
    assert q.counts == (1, 1) and c.counts == (1, 0)


length_sets = st.lists(st.integers(1, 64), min_size=2, max_size=6, unique=True).map(sorted)


@given(length_sets)
def test_gamma_range_and_divisibility(lens):
    ls = LengthSystem(tuple(lens))
    g = upper_bound_gamma(ls)
    assert Fraction(1, 3) < g <= Fraction(1, 2)
    assert (g == Fraction(1, 2)) == ls.divisible


@given(length_sets)
def test_gamma_is_one_over_one_plus_delta(lens):
    ls = LengthSystem(tuple(lens))
    delta, _ = aux_constants(ls)
    assert upper_bound_gamma(ls) == 1 / (1 + delta)


@given(length_sets)
def test_f_increasing(lens):
    f = f_constants(LengthSystem(tuple(lens)))
    assert f[0] == lens[-1]
    assert all(a < b for a, b in zip(f, f[1:]))


@given(length_sets, st.data())
def test_volume_additive(lens, data):
    ls = LengthSystem(tuple(lens))
    counts = tuple(data.draw(st.integers(0, 9)) for _ in lens)
    assert queue_volume(counts, ls, "all") == sum(queue_volume(counts, ls, i) for i in range(ls.k))
