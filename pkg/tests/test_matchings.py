import itertools
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import class_sum_matches_labelled_sum
from torus_npoint.errors import SizeCapError
from torus_npoint.matchings import (
    LabelledSet,
    Matching,
    aut_order,
    double_factorial_odd,
    enumerate_fpf,
    enumerate_involutions,
    matching_classes,
    telephone_number,
)


def brute_involution_count(n):
    return sum(1 for p in itertools.permutations(range(n)) if all(p[p[i]] == i for i in range(n)))


@pytest.mark.parametrize("n, expected", [(0, 1), (3, 4), (4, 10)])
def test_involution_counts_examples(n, expected):
    assert sum(1 for _ in enumerate_involutions(LabelledSet.from_labels([1] * n))) == expected


@pytest.mark.parametrize("n, expected", [(1, 0), (4, 3), (6, 15)])
def test_fpf_counts_examples(n, expected):
    assert sum(1 for _ in enumerate_fpf(LabelledSet.from_labels([1] * n))) == expected


def test_telephone_numbers_against_permutations():
    assert [telephone_number(n) for n in range(8)] == [brute_involution_count(n) for n in range(8)]


def test_double_factorial_values():
    assert [double_factorial_odd(n) for n in range(9)] == [1, 0, 1, 0, 3, 0, 15, 0, 105]


@given(st.lists(st.integers(1, 4), max_size=7))
def test_involutions_are_distinct_and_cover(labels):
    S = LabelledSet.from_labels(labels)
    invs = list(enumerate_involutions(S))
    assert len(invs) == telephone_number(len(labels))
    assert len(set(invs)) == len(invs)
    uids = [e.uid for e in S]
    assert all(inv.covers(uids) for inv in invs)


@given(st.lists(st.integers(1, 4), max_size=8))
def test_fpf_have_no_fixed_points(labels):
    S = LabelledSet.from_labels(labels)
    fpf = list(enumerate_fpf(S))
    assert len(fpf) == double_factorial_odd(len(labels))
    assert all(not inv.fixed and len(inv.pairs) * 2 == len(labels) for inv in fpf)


def test_aut_order_examples():
    assert aut_order(Matching.from_pairs([(1, 2)])) == 1
    assert aut_order(Matching.from_pairs([(3, 3)])) == 2
    assert aut_order(Matching.from_pairs([(1, 1), (1, 1)])) == 8


def test_orbits_are_sorted_and_complete():
    S = LabelledSet.from_labels([1, 2, 3])
    for inv in enumerate_involutions(S):
        flat = sorted(u for orbit in inv.orbits() for u in orbit)
        assert flat == [0, 1, 2]


def test_size_cap():
    S = LabelledSet.from_labels([1] * 13)
    with pytest.raises(SizeCapError):
        next(enumerate_involutions(S))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        next(enumerate_fpf(LabelledSet.from_labels([1] * 14), cap=14))
    assert caught
    with pytest.raises(SizeCapError):
        next(enumerate_fpf(S, cap=17))


def test_blocks_and_directions():
    S = LabelledSet.from_blocks([[(1, 1), (2, 3)], [(1, 2)]])
    assert S.blocks() == [1, 2]
    assert S.directions() == [1, 2]
    assert len(S.by_block(1)) == 2
    assert [e.label for e in S.by_direction(1)] == [1, 2]


@pytest.mark.parametrize("profile", [{1: 2}, {1: 4}, {1: 2, 2: 2}, {1: 1, 3: 1}, {2: 3, 1: 1}, {1: 3, 2: 3}])
def test_class_sum_identity(profile):
    assert class_sum_matches_labelled_sum(profile)


def test_matching_classes_of_odd_profile_empty():
    assert matching_classes({1: 3}) == []
