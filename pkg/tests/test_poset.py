from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from incidence_braid.poset import (
    Interval,
    PosetError,
    antichain,
    box_contains,
    box_height,
    box_split,
    chain,
    count_inclusion_pairs,
    inclusion_pairs,
    is_lower_extremal,
    poset_build,
    reduced_inclusions,
)


def test_two_chain_counts():
    P = chain(2)
    assert count_inclusion_pairs(P, 3) == 125
    assert count_inclusion_pairs(P, 2) == 25
    assert len(list(inclusion_pairs(P, 3))) == 125
    assert sum(1 for S, T in inclusion_pairs(P, 3) if box_height(P, T) == 0) == 8


def test_point_count():
    assert count_inclusion_pairs(chain(1), 3) == 1


def test_two_chain_reduced_set():
    # 19 lower-extremal inclusions plus 12 boxes of height one.
    red = reduced_inclusions(chain(2), 3)
    assert len(red) == 31
    P = chain(2)
    assert sum(1 for S, T in red if S == T) == 12


def test_heights_and_covers():
    P = poset_build(["a", "b", "c", "d"], [("a", "b"), ("b", "c"), ("a", "d")])
    assert P.height == 2
    assert P.height_matrix[0, 2] == 2
    assert P.cover_pairs() == [(0, 1), (0, 3), (1, 2)]
    assert P.is_connected


def test_components():
    P = antichain(3)
    assert len(P.components) == 3 and not P.is_connected


def test_cycle_rejected():
    with pytest.raises(PosetError):
        poset_build(["a", "b"], [("a", "b"), ("b", "a")])


def test_unknown_label_rejected():
    with pytest.raises(PosetError):
        poset_build(["a"], [("a", "z")])


def test_split_boxes():
    P = chain(3)
    T = (Interval(0, 2),)
    S = (Interval(1, 1),)
    (S1, T1), (S2, T2) = box_split(P, S, T, (1,))
    assert T1 == (Interval(0, 1),) and T2 == (Interval(1, 2),)
    assert S1 == (Interval(1, 1),) and S2 == (Interval(1, 1),)


@st.composite
def posets(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    labels = [f"x{i}" for i in range(n)]
    return poset_build(labels, [(labels[i], labels[j]) for i, j in chosen])


@settings(max_examples=40, deadline=None)
@given(posets(max_n=4), st.integers(2, 3))
def test_count_matches_enumeration(P, n):
    assert count_inclusion_pairs(P, n) == len(list(inclusion_pairs(P, n)))


@settings(max_examples=40, deadline=None)
@given(posets(max_n=4))
def test_reduced_set_shape(P):
    for S, T in reduced_inclusions(P, 3):
        assert box_contains(P, S, T)
        h = box_height(P, T)
        assert (S == T and h == 1) or (is_lower_extremal(P, S, T) and h >= 1)


@settings(max_examples=60, deadline=None)
@given(posets())
def test_order_axioms(P):
    le = P.leq
    n = P.n
    assert all(le[i, i] for i in range(n))
    for a, b, c in product(range(n), repeat=3):
        if le[a, b] and le[b, c]:
            assert le[a, c]
        if a != b:
            assert not (le[a, b] and le[b, a])
