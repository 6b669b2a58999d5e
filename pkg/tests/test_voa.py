import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from torus_npoint.voa import (
    FockState,
    LatticeData,
    exact_cholesky,
    gbinom,
    mode_apply,
    monomial_exponents,
    monomial_from_exponents,
    monomial_weight,
    monomials_of_weight,
    partitions,
    square_round_coeff,
    square_to_round,
    vertex_coefficient,
)

A3 = LatticeData([[2, -1, 0], [-1, 2, -1], [0, -1, 2]])
D_LIKE = LatticeData([[4, 2, 0], [2, 4, 2], [0, 2, 4]])


def test_inner_examples():
    L = LatticeData([[2]])
    assert L.inner((1,), (1,)) == 2
    assert L.inner((1,), (-1,)) == -2
    assert LatticeData([[2, 1], [1, 2]]).inner((1, 0), (0, 1)) == 1


def test_pairing_examples(rank1, rank1_exact):
    assert abs(rank1.pairing(1, (1,)) - math.sqrt(2)) < 1e-15
    assert rank1.pairing(1, (0,)) == 0
    assert rank1_exact.pairing(1, (3,)) == 6


@pytest.mark.parametrize("gram", [[[2]], [[2, -1], [-1, 2]], [[16, 4], [4, 2]], [[4, 2, 0], [2, 4, 2], [0, 2, 4]]])
def test_pairings_reproduce_gram(gram):
    L = LatticeData(gram)
    n = L.rank
    basis = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    for a in basis:
        for b in basis:
            dot = sum(L.pairing(r, a) * L.pairing(r, b) for r in range(1, n + 1))
            assert abs(dot - L.inner(a, b)) < 1e-12


def test_exact_cholesky_cases():
    assert exact_cholesky([[4]]) == [[2]]
    L = exact_cholesky([[16, 4], [4, 2]])
    assert L == [[4, 0], [1, 1]]
    assert exact_cholesky([[2]]) is None
    assert LatticeData([[16, 4], [4, 2]]).exact
    assert not LatticeData([[2, -1], [-1, 2]]).exact


@pytest.mark.parametrize("gram", [[[3]], [[2, 1], [0, 2]], [[2, 3], [3, 2]], [[1]]])
def test_bad_grams_rejected(gram):
    with pytest.raises(ValueError):
        LatticeData(gram)


def test_cocycle_examples(a2):
    L = LatticeData([[2]])
    assert all(L.cocycle((m,), (n,)) == 1 for m in range(-3, 4) for n in range(-3, 4))
    assert a2.cocycle((1, 0), (0, 0)) == 1
    assert a2.cocycle((1, 0), (0, 1)) * a2.cocycle((0, 1), (1, 0)) == -1


@pytest.mark.parametrize("lattice", [LatticeData([[2]]), LatticeData([[2, -1], [-1, 2]]), A3, D_LIKE])
def test_cocycle_invariants(lattice):
    rng = random.Random(7)
    n = lattice.rank
    vec = lambda: tuple(rng.randint(-3, 3) for _ in range(n))
    for _ in range(100):
        a, b, c = vec(), vec(), vec()
        ab = tuple(x + y for x, y in zip(a, b))
        bc = tuple(x + y for x, y in zip(b, c))
        assert lattice.cocycle(ab, c) == lattice.cocycle(a, c) * lattice.cocycle(b, c)
        assert lattice.cocycle(a, bc) == lattice.cocycle(a, b) * lattice.cocycle(a, c)
        assert lattice.cocycle(a, b) * lattice.cocycle(b, a) == (-1) ** (lattice.inner(a, b) % 2)


def test_sign_correction_hook_preserves_commutator(a2):
    table = {(1, 1): -1}
    c = lambda v: table.get(tuple(v), 1)
    L = LatticeData([[2, -1], [-1, 2]], sign_correction=c)
    assert L.cocycle((1, 1), (-1, -1)) == -a2.cocycle((1, 1), (-1, -1))
    for a in [(1, 0), (0, 1), (1, 1), (2, -1)]:
        for b in [(1, 0), (0, 1), (-1, 1)]:
            assert L.cocycle(a, b) * L.cocycle(b, a) == (-1) ** (L.inner(a, b) % 2)


def test_mode_apply_examples(rank1):
    one = FockState.vacuum()
    a = FockState.monomial([(1, 1)])
    assert mode_apply(rank1, 1, 1, a) == one
    assert mode_apply(rank1, 1, 2, a).is_zero()
    state = FockState.vacuum(alpha=(1,))
    out = mode_apply(rank1, 1, 0, state)
    (coeff,) = out.terms.values()
    assert abs(coeff - math.sqrt(2)) < 1e-15


monos = st.lists(st.tuples(st.integers(1, 2), st.integers(1, 4)), max_size=4)


@given(monos, st.integers(1, 2), st.integers(-4, 4), st.integers(1, 2), st.integers(-4, 4))
def test_heisenberg_commutator(mono, r, m, s, n):
    L = LatticeData([[16, 4], [4, 2]])
    v = FockState.monomial(mono, alpha=(1, -1))
    lhs = mode_apply(L, r, m, mode_apply(L, s, n, v)) + mode_apply(L, s, n, mode_apply(L, r, m, v)).scale(-1)
    expected = v.scale(m) if (r == s and m == -n) else FockState({}, v.alpha)
    assert lhs == expected


@pytest.mark.parametrize(
    "k, j, expected", [(1, -1, 1), (2, -2, 1), (2, -1, 1), (3, -3, 1), (3, -2, Fraction(3, 2)), (3, -1, Fraction(1, 2))]
)
def test_square_round_coefficients(k, j, expected):
    assert square_round_coeff(k, j) == expected


def test_square_to_round_examples(rank1):
    assert square_to_round(rank1, FockState.monomial([(1, 1)])) == FockState.monomial([(1, 1)], bracket="round", alpha=(0,))
    expected = FockState({((1, 2),): 1, ((1, 1),): 1}, (0,), "round")
    assert square_to_round(rank1, FockState.monomial([(1, 2)])) == expected
    assert square_to_round(rank1, FockState.vacuum()) == FockState.vacuum((0,), "round")


@given(st.lists(st.tuples(st.integers(1, 2), st.integers(1, 3)), min_size=1, max_size=3))
def test_square_to_round_keeps_leading_term(mono):
    L = LatticeData([[2, -1], [-1, 2]])
    v = FockState.monomial(mono)
    r = square_to_round(L, v)
    w = monomial_weight(tuple(mono))
    assert all(x <= w for x in r.weights())
    top = {m: c for m, c in r.terms.items() if monomial_weight(m) == w}
    assert top == {next(iter(v.terms)): 1}


def test_gbinom():
    assert gbinom(-1, 3) == -1
    assert gbinom(-2, 2) == 3
    assert gbinom(5, 2) == 10
    assert gbinom(3, -1) == 0


def test_monomial_exponent_roundtrip():
    mono = monomial_from_exponents([[1, 2, 2], [2, 1, 1]])
    assert monomial_weight(mono) == 5
    assert monomial_exponents(mono) == [[1, 2, 2], [2, 1, 1]]


def test_partitions_and_weights():
    assert [len(partitions(n)) for n in range(8)] == [1, 1, 2, 3, 5, 7, 11, 15]
    assert len(monomials_of_weight(2, 2)) == 5
    assert len(monomials_of_weight(2, 3)) == 10


def test_vertex_coefficient_of_current_on_vacuum(rank1):
    a = FockState.monomial([(1, 1)], bracket="round")
    one = FockState.vacuum((0,), "round")
    # Y(a, z) 1 = sum_{n >= 0} a(-n-1) z^n
    assert vertex_coefficient(rank1, a, one, 0) == FockState.monomial([(1, 1)], bracket="round", alpha=(0,))
    assert vertex_coefficient(rank1, a, one, 2) == FockState.monomial([(1, 3)], bracket="round", alpha=(0,))
    assert vertex_coefficient(rank1, a, one, -1).is_zero()


def test_vertex_coefficient_current_current(rank1):
    a = FockState.monomial([(1, 1)], bracket="round")
    # Y(a, z) a has z^-2 coefficient equal to the vacuum
    v = vertex_coefficient(rank1, a, a, -2)
    assert v.terms == {(): 1}
