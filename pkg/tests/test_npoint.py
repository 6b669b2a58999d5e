import cmath
import math
from fractions import Fraction

import pytest
from helpers import same_series
from hypothesis import given
from hypothesis import strategies as st

from torus_npoint.elliptic import c_coeff, eta_numeric, pn_numeric, pn_series, prime_form_series
from torus_npoint.errors import MathDomainError
from torus_npoint.matchings import LabelledElement
from torus_npoint.npoint import (
    FORMAL,
    Insertion,
    NPointProblem,
    current_generating,
    exp_prime_lhs,
    exp_prime_rhs,
    exp_zeta_lhs,
    exp_zeta_rhs,
    fourier_normalization,
    gamma_orbit,
    lattice_factor,
    make_context,
    npoint_full,
    onepoint_module,
    q_n,
    quasi_period_multiplier,
    reduction_coefficients,
    verify_elliptic,
    zhu_recursion_residual,
)
from torus_npoint.series import QSeries, eisenstein, inverse_eta_power
from torus_npoint.voa import FockState, LatticeData

T = 96
Z = 6
TAU = 0.3 + 1.1j


def current(*labels, r=1):
    return FockState.monomial([(r, k) for k in labels])


def formal_problem(lattice, beta, states, alphas=None, positions=None, T=T, Z=Z):
    n = len(states)
    alphas = alphas or [lattice.zero()] * n
    positions = positions or [Fraction(n - 1 - i) for i in range(n)]
    ins = [Insertion(s, a, c) for s, a, c in zip(states, alphas, positions)]
    return NPointProblem(lattice, tuple(beta), ins, FORMAL, T, Z)


def numeric_problem(lattice, beta, states, alphas, zs, tau=TAU):
    ins = [Insertion(s, a, complex(z)) for s, a, z in zip(states, alphas, zs)]
    return NPointProblem(lattice, tuple(beta), ins, tau)



class TestGamma:
    def setup_method(self):
        self.L = LatticeData([[4]])
        self.prob = formal_problem(self.L, (1,), [current(1, 2), current(1)], [(1,), (-1,)])
        self.ctx = make_context(self.prob)

    def test_same_block_pair_is_c(self):
        e, f = LabelledElement(1, 1, 1, 0), LabelledElement(1, 1, 2, 1)
        assert gamma_orbit([e, f], self.prob, self.ctx) == self.ctx.C(1, 2)

    def test_cross_block_pair_is_d(self):
        e, f = LabelledElement(1, 1, 2, 1), LabelledElement(2, 1, 1, 2)
        assert gamma_orbit([e, f], self.prob, self.ctx) == self.ctx.D(2, 1, 0, 1)

    def test_different_directions_vanish(self):
        L = LatticeData([[16, 4], [4, 2]])
        prob = formal_problem(L, (0, 0), [current(1), current(1, r=2)])
        e, f = LabelledElement(1, 1, 1, 0), LabelledElement(2, 2, 1, 1)
        assert gamma_orbit([e, f], prob).is_zero()

    def test_fixed_current_collects_charges(self):
        # (a, beta) + D(1, 0, z_12) (a, alpha_2) with (a, beta) = 2 and (a, alpha_2) = -2
        e = LabelledElement(1, 1, 1, 0)
        expected = self.ctx.scalar(2) + self.ctx.D(1, 0, 0, 1) * -2
        assert gamma_orbit([e], self.prob, self.ctx) == expected

    def test_orbits_of_size_three_rejected(self):
        e = LabelledElement(1, 1, 1, 0)
        with pytest.raises(ValueError):
            gamma_orbit([e, e, e], self.prob, self.ctx)


def test_q_n_current_squared(rank1_exact):
    # a[-1]^2 with (a, beta) = 2: 4 + E_2
    prob = formal_problem(rank1_exact, (1,), [current(1, 1)])
    assert same_series(q_n(prob).value, eisenstein(2, T) + 4)


def test_q_n_pairs_labels_one_and_three(rank1_exact):
    prob = formal_problem(rank1_exact, (0,), [current(1, 3)])
    value = q_n(prob).value
    assert same_series(value, c_coeff(1, 3, T))
    assert same_series(value, eisenstein(4, T).scale(3))


def test_lattice_factor_two_point(rank1):
    prob = formal_problem(rank1, (0,), [FockState.vacuum(), FockState.vacuum()], [(1,), (-1,)])
    value = lattice_factor(prob).value
    K = prime_form_series(Z + 3, T)
    expected = (K * K).inverse() * inverse_eta_power(1, T)
    assert value.agrees_with(expected, 0, zupto=Z - 3)


def test_two_currents_give_p2_over_eta(rank1):
    prob = formal_problem(rank1, (0,), [current(1), current(1)])
    value = npoint_full(prob).value
    expected = pn_series(2, Z, T) * inverse_eta_power(1, T)
    assert value.agrees_with(expected, 0, zupto=Z - 1)


def test_three_currents_vanish_without_charge(rank1):
    prob = formal_problem(rank1, (0,), [current(1)] * 3, positions=[Fraction(1), Fraction(2), Fraction(0)])
    assert npoint_full(prob).value.is_zero()


def test_one_current_in_charged_module(rank1_exact):
    prob = formal_problem(rank1_exact, (1,), [current(1)])
    value = npoint_full(prob).value
    expected = inverse_eta_power(1, T).shift(24 * 2).scale(2)
    assert same_series(value, expected)


def test_onepoint_module_vacuum(a2):
    for beta in [(0, 0), (1, 0), (1, 1)]:
        v = onepoint_module(a2, FockState.vacuum(), beta, T)
        assert same_series(v, inverse_eta_power(2, T).shift(12 * a2.norm(beta)))


def test_current_generating_matches_npoint_full(rank1):
    zs = [0.4 + 0.3j, -0.2 + 0.1j, 0.1 - 0.5j]
    prob = numeric_problem(rank1, (1,), [current(1)] * 3, [(0,)] * 3, zs)
    a = current_generating(prob).value
    b = npoint_full(prob).value
    assert abs(a - b) < 1e-11 * abs(b)


def test_current_generating_two_point_closed_form(rank1):
    zs = [0.4 + 0.3j, -0.2 + 0.1j]
    prob = numeric_problem(rank1, (1,), [current(1)] * 2, [(0,)] * 2, zs)
    q = cmath.exp(2j * math.pi * TAU)
    expected = (pn_numeric(2, zs[0] - zs[1], TAU) + 2) * q / eta_numeric(TAU)
    assert abs(current_generating(prob).value - expected) < 1e-11 * abs(expected)


@pytest.mark.parametrize("beta", [(0,), (1,), (-2,)])
def test_exp_zeta_identity(rank1_exact, beta):
    lhs = exp_zeta_lhs(rank1_exact, beta, 4, 96)
    rhs = exp_zeta_rhs(rank1_exact, beta, 4, 96)
    assert all(same_series(lhs[w], rhs[w]) for w in range(5))


@pytest.mark.parametrize("lambdas", [(1, -1), (2, 1, -3)])
def test_exp_prime_identity(lambdas):
    lhs = exp_prime_lhs(lambdas, 4, 72)
    rhs = exp_prime_rhs(lambdas, 4, 72)
    assert set(lhs) == set(rhs)
    assert all(same_series(lhs[x], rhs[x]) for x in lhs)


small_mono = st.lists(st.integers(1, 3), min_size=0, max_size=3)


@given(small_mono, small_mono, st.sampled_from([(0,), (1,)]))
def test_dp_matches_enumeration(l1, l2, beta):
    L = LatticeData([[4]])
    prob = numeric_problem(L, beta, [current(*l1), current(*l2)], [(1,), (-1,)], [0.5 + 0.2j, -0.1 + 0.3j])
    a = npoint_full(prob, method="dp").value
    b = npoint_full(prob, method="enumerate").value
    assert abs(a - b) <= 1e-11 * max(1, abs(a))


def test_dp_matches_enumeration_formal(rank1_exact):
    prob = formal_problem(rank1_exact, (1,), [current(1, 2), current(1, 1)], [(1,), (-1,)])
    assert npoint_full(prob, method="dp").value == npoint_full(prob, method="enumerate").value


def test_charges_must_sum_to_zero(rank1):
    prob = formal_problem(rank1, (0,), [FockState.vacuum(), FockState.vacuum()], [(1,), (1,)])
    with pytest.raises(MathDomainError) as info:
        npoint_full(prob)
    assert info.value.quantity == "sum(alpha_i)"


def test_bad_direction_rejected(rank1):
    prob = formal_problem(rank1, (0,), [current(1, r=2)])
    with pytest.raises(ValueError):
        npoint_full(prob)


def test_unknown_method_rejected(rank1):
    with pytest.raises(ValueError):
        npoint_full(formal_problem(rank1, (0,), [current(1)]), method="magic")


def test_literal_singleton_breaks_permutation_symmetry(rank1):
    states = [current(1, 2), current(1), FockState.vacuum()]
    prob = numeric_problem(rank1, (1,), states, [(1,), (-1,), (0,)], [0.5 + 0.3j, -0.2 + 0.1j, 0.1 - 0.6j])
    sym = verify_elliptic(prob, 0, "2pi i")
    lit = verify_elliptic(prob, 0, "2pi i", singleton="literal")
    perms = [k for k in sym.checks if k.startswith("permutation")]
    assert max(sym.checks[k] for k in perms) < 1e-9
    assert max(lit.checks[k] for k in perms) > 0.1


@pytest.mark.parametrize("lattice, alphas", [(LatticeData([[2]]), [(1,), (-1,)]), (LatticeData([[2, -1], [-1, 2]]), [(1, 0), (0, 1), (-1, -1)])])
def test_pure_lattice_elliptic(lattice, alphas):
    zs = [0.5 + 0.3j, -0.2 + 0.1j, 0.1 - 0.6j][: len(alphas)]
    vac = [FockState.vacuum()] * len(alphas)
    prob = numeric_problem(lattice, lattice.zero(), vac, alphas, zs)
    for i in range(len(alphas)):
        for shift in ("2pi i", "2pi i tau"):
            assert verify_elliptic(prob, i, shift).passed(1e-8)


def test_multiplier_forms_agree_when_others_at_origin(rank1):
    vac = [FockState.vacuum()] * 2
    prob = numeric_problem(rank1, (1,), vac, [(1,), (-1,)], [0.4 + 0.2j, 0])
    a, b = quasi_period_multiplier(prob, 0), quasi_period_multiplier(prob, 0, general=False)
    assert abs(a - b) < 1e-15 * abs(b)
    moved = numeric_problem(rank1, (1,), vac, [(1,), (-1,)], [0.4 + 0.2j, 0.3])
    a, b = quasi_period_multiplier(moved, 0), quasi_period_multiplier(moved, 0, general=False)
    # the extra factor is exp((a_1, a_2) z_2) = exp(-0.6)
    assert abs(a / b - math.exp(-0.6)) < 1e-12


def test_formal_result_evaluates_to_numeric(rank1_exact):
    states = [current(1, 2), current(1)]
    alphas = [(1,), (-1,)]
    formal = formal_problem(rank1_exact, (1,), states, alphas, [Fraction(1), Fraction(0)], T=288, Z=14)
    z, tau = 0.3 + 0.1j, 0.1 + 1.3j
    series_value = npoint_full(formal).value.evaluate(z, tau)
    numeric = numeric_problem(rank1_exact, (1,), states, alphas, [z, 0], tau)
    direct = npoint_full(numeric).value
    assert abs(series_value - direct) < 1e-8 * abs(direct)


def test_scaled_positions_match_substitution(rank1_exact):
    states = [current(1), current(1)]
    a = npoint_full(formal_problem(rank1_exact, (0,), states, positions=[Fraction(2), Fraction(0)])).value
    b = npoint_full(formal_problem(rank1_exact, (0,), states, positions=[Fraction(1), Fraction(0)])).value
    assert a == b.scale_variable(2)


def test_fourier_mean_recovers_deleted_function(rank1):
    states = [current(1), current(1)]
    prob = numeric_problem(rank1, (1,), states, [(0,), (0,)], [0.4 + 1.5j, -0.2 + 0.1j])
    mean, expected, gap = fourier_normalization(prob, 0)
    assert abs(mean - expected) < 1e-8 * max(1, abs(expected))
    assert gap < 1e-8


def test_reduction_coefficients(rank1_exact):
    v1, v2 = current(1, 2), current(1)
    one_point = lambda v, b: onepoint_module(rank1_exact, v, b, T)
    coeffs = reduction_coefficients(rank1_exact, v1, v2, (1,), range(-4, 3), one_point)
    assert coeffs[-4] is None
    formal = formal_problem(rank1_exact, (1,), [v1, v2], positions=[Fraction(1), Fraction(0)], Z=3)
    F = npoint_full(formal).value
    for j, val in coeffs.items():
        expected = QSeries.zero(T) if val is None else val
        assert same_series(F[j], expected), j


@pytest.mark.parametrize("p", [1, 2])
def test_recursion_residual_vanishes(rank1_exact, p):
    states = [current(1, p, 2), current(1, 1)]
    prob = formal_problem(rank1_exact, (1,), states, [(1,), (-1,)])
    assert zhu_recursion_residual(prob, p).value.is_zero()
