"""Verification suites behind ``npoint verify``.

Every check yields a record ``{suite, case_id, residual, tolerance, pass}``.
Exact comparisons report residual 0 only on coefficient-exact agreement.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable, Iterator

from .elliptic import ZSeries
from .npoint import (
    FORMAL,
    Insertion,
    NPointProblem,
    exp_prime_lhs,
    exp_prime_rhs,
    exp_zeta_lhs,
    exp_zeta_rhs,
    fourier_normalization,
    laurent_leading,
    module_sum_two_point,
    npoint_full,
    onepoint_module,
    propgen_coefficient,
    theta_two_point,
    verify_elliptic,
    zhu_recursion_residual,
)
from .oracle import brute_trace
from .series import INF, QSeries, inverse_eta_power
from .voa import FockState, LatticeData, monomials_of_weight

SUITES = ("zhu", "elliptic", "laurent", "generating", "theta", "oracle")

RANK1 = LatticeData([[2]])
RANK1_EXACT = LatticeData([[4]])
RANK2_EXACT = LatticeData([[16, 4], [4, 2]])
A2 = LatticeData([[2, -1], [-1, 2]])
TAUS = (0.3 + 1.1j, 1j)


def record(suite: str, case_id: str, residual: float, tolerance: float) -> dict:
    residual = float(residual)
    return {
        "suite": suite,
        "case_id": case_id,
        "residual": residual,
        "tolerance": tolerance,
        "pass": bool(residual <= tolerance),
    }


# -- residual measures ---------------------------------------------------------------------


def _coeff_values(v) -> list:
    if isinstance(v, QSeries):
        return [x for _, x in v.items()]
    if isinstance(v, ZSeries):
        return [x for _, c in v.items() for _, x in c.items()]
    return [v]


def magnitude(v) -> float:
    return max((abs(complex(x)) for x in _coeff_values(v)), default=0.0)


def _cut_q(s: QSeries, upto) -> QSeries:
    return s if upto is None else s.truncate(upto)


def series_residual(a, b, upto=None, floor: float = 1e-300) -> float:
    """0 on exact agreement, otherwise max coefficient gap relative to max |b|.

    ``upto`` restricts the comparison to t-exponents below it.  ``floor``
    bounds the denominator from below, for references that vanish.
    """
    if isinstance(a, QSeries):
        lim = min(a.trunc, b.trunc) if upto is None else upto
        a, b = _cut_q(a, lim), _cut_q(b, lim)
        if a.is_exact and b.is_exact:
            if a.truncate(INF) == b.truncate(INF):
                return 0.0
        diff = a.max_abs_diff(b, upto=lim)
    elif isinstance(a, ZSeries):
        diff = a.max_abs_diff(b, qupto=upto)
        if diff == 0:
            return 0.0
    else:
        diff = abs(complex(a) - complex(b))
    return diff / max(magnitude(b), floor)


def value_residual(res, scale) -> float:
    """Size of a residual value relative to the size of a reference value."""
    m = magnitude(res)
    return 0.0 if m == 0 else m / max(magnitude(scale), 1e-300)


# -- random Zhu instances -----------------------------------------------------------------------


def random_zhu_instance(rng: random.Random, exact: bool = True, max_labels: int = 6, max_mode: int = 4):
    """(problem, p, direction) with n <= 3 insertions, rank <= 2 and at most ``max_labels`` modes."""
    if exact:
        lattice = rng.choice([RANK1_EXACT, RANK2_EXACT])
    else:
        lattice = rng.choice([RANK1, A2])
    rank = lattice.rank
    n = rng.randint(1, 3)
    total_labels = rng.randint(1, max_labels)
    counts = [0] * n
    counts[0] = 1
    for _ in range(total_labels - 1):
        counts[rng.randrange(n)] += 1
    states = []
    for c in counts:
        mono = [(rng.randint(1, rank), rng.randint(1, max_mode)) for _ in range(c)]
        states.append(FockState.monomial(mono))
    alphas = [tuple(rng.randint(-1, 1) for _ in range(rank)) for _ in range(n - 1)]
    alphas.append(tuple(-sum(a[i] for a in alphas) for i in range(rank)))
    if n == 1:
        alphas = [lattice.zero()]
    beta = tuple(rng.randint(-1, 1) for _ in range(rank))
    mono0 = next(iter(states[0].terms))
    direction, p = rng.choice(list(mono0))
    if exact:
        positions = [Fraction(c) for c in rng.sample([1, -1, 2, Fraction(1, 2), 3], n)]
        prob = NPointProblem(lattice, beta, [Insertion(s, a, z) for s, a, z in zip(states, alphas, positions)], FORMAL, 48, 4)
    else:
        tau = rng.choice(TAUS)
        positions = [complex(rng.uniform(-1, 1), rng.uniform(-2.5, 2.5)) for _ in range(n)]
        for i in range(1, n):
            positions[i] += 1.3 * i
        prob = NPointProblem(lattice, beta, [Insertion(s, a, z) for s, a, z in zip(states, alphas, positions)], tau)
    return prob, p, direction


def describe(prob: NPointProblem) -> str:
    parts = []
    for ins in prob.insertions:
        mono = next(iter(ins.state.terms))
        parts.append("".join(f"a{r}[-{k}]" for r, k in mono) + f"e{list(ins.alpha)}")
    return f"gram={[list(r) for r in prob.lattice.gram]} beta={list(prob.beta)} " + ",".join(parts)


def zhu_cases(seed: int = 0, exact_count: int = 50, float_count: int = 10):
    rng = random.Random(seed)
    for i in range(exact_count):
        yield (f"exact-{i}",) + random_zhu_instance(rng, exact=True)
    for i in range(float_count):
        yield (f"float-{i}",) + random_zhu_instance(rng, exact=False)


def suite_zhu(tol: float = 1e-10, seed: int = 0, exact_count: int = 50, float_count: int = 10) -> Iterator[dict]:
    for cid, prob, p, r in zhu_cases(seed, exact_count, float_count):
        res = zhu_recursion_residual(prob, p, r).value
        resid = value_residual(res, npoint_full(prob).value)
        tolerance = 0.0 if prob.formal and prob.lattice.exact else max(tol, 1e-9)
        yield record("zhu", f"{cid} p={p} r={r} {describe(prob)}", resid, tolerance)


# -- elliptic -----------------------------------------------------------------------------------


def _lattice_problem(lattice, beta, alphas, zs, tau, states=None):
    states = states or [FockState.vacuum()] * len(alphas)
    return NPointProblem(lattice, beta, [Insertion(s, a, z) for s, a, z in zip(states, alphas, zs)], tau)


def elliptic_cases():
    zs2 = [0.31 + 0.42j, -0.27 + 1.9j]
    zs3 = [0.31 + 0.42j, -0.27 + 1.9j, 0.55 - 1.7j]
    configs = [
        ("rank1-2pt", RANK1, (1,), [(1,), (-1,)], zs2),
        ("rank1-3pt", RANK1, (0,), [(1,), (1,), (-2,)], zs3),
        ("A2-2pt", A2, (1, 0), [(1, 1), (-1, -1)], zs2),
        ("A2-3pt", A2, (0, 1), [(1, 0), (0, 1), (-1, -1)], zs3),
    ]
    for tau in TAUS:
        for name, lat, beta, alphas, zs in configs:
            yield f"{name} tau={tau}", _lattice_problem(lat, beta, alphas, zs, tau)


def decorated_cases():
    a1 = FockState.monomial([(1, 1)])
    a2 = FockState.monomial([(1, 2)])
    mixed = FockState.monomial([(1, 1), (2, 2)])
    zs = [0.31 + 0.42j, -0.27 + 1.9j, 0.55 - 1.7j]
    for tau in TAUS:
        yield f"decorated-rank1-2pt tau={tau}", _lattice_problem(RANK1, (1,), [(1,), (-1,)], zs[:2], tau, [a1, a2])
        yield f"decorated-A2-3pt tau={tau}", _lattice_problem(A2, (1, 0), [(1, 0), (0, 1), (-1, -1)], zs, tau, [mixed, a1, a2])


def suite_elliptic(tol: float = 1e-8) -> Iterator[dict]:
    tol = max(tol, 1e-8)
    for cid, prob in elliptic_cases():
        for i in range(prob.n):
            for shift in ("2pi i", "2pi i tau"):
                rep = verify_elliptic(prob, i, shift)
                for name, r in rep.checks.items():
                    if name.startswith("permutation") or name == "translation":
                        if i or shift != "2pi i":
                            continue
                    yield record("elliptic", f"{cid} z{i + 1} {name}", r, tol)
    # decorated states: the 2 pi i tau multiplier picks up P_1 shifts, so only
    # periodicity, translation and permutation are checked
    for cid, prob in decorated_cases():
        rep = verify_elliptic(prob, 0, "2pi i")
        for name, r in rep.checks.items():
            yield record("elliptic", f"{cid} {name}", r, tol)
    # Fourier normalisation of currents in z_1
    cur = FockState.monomial([(1, 1)])
    for tau in TAUS:
        zs = [0.2 + 0.1j, 2.5 - 0.3j, 4.4 + 0.2j]
        for n in (1, 2, 3):
            prob = _lattice_problem(RANK1, (1,), [(0,)] * n, zs[:n], tau, [cur] * n)
            mean, expected, gap = fourier_normalization(prob, 0)
            scale = max(abs(expected), 1e-300)
            yield record("elliptic", f"fourier n={n} tau={tau}", abs(mean - expected) / scale, tol)
            yield record("elliptic", f"fourier-richardson n={n} tau={tau}", gap / scale, tol)


# -- Laurent leading terms ----------------------------------------------------------------------------


def suite_laurent(T: int = 120) -> Iterator[dict]:
    cur = FockState.monomial([(1, 1)])
    for lat, beta in [(RANK1, (0,)), (RANK1, (1,)), (RANK1_EXACT, (1,))]:
        prob = NPointProblem(lat, beta, [Insertion(cur, lat.zero(), Fraction(1)), Insertion(cur, lat.zero(), Fraction(0))], FORMAL, T, 4)
        v, c = laurent_leading(prob)
        zero_point = inverse_eta_power(lat.rank, T).shift(12 * lat.norm(beta))
        yield record("laurent", f"current gram={list(map(list, lat.gram))} beta={list(beta)} order", abs(v + 2), 0.0)
        yield record("laurent", f"current gram={list(map(list, lat.gram))} beta={list(beta)} coefficient", series_residual(c, zero_point), 0.0)
    for lat, beta, alpha in [
        (RANK1, (0,), (1,)),
        (RANK1, (1,), (2,)),
        (A2, (0, 0), (1, 1)),
        (A2, (1, 0), (1, 0)),
        (A2, (1, -1), (0, 1)),
    ]:
        neg = tuple(-x for x in alpha)
        vac = FockState.vacuum()
        prob = NPointProblem(lat, beta, [Insertion(vac, alpha, Fraction(1)), Insertion(vac, neg, Fraction(0))], FORMAL, T, 4)
        v, c = laurent_leading(prob)
        deleted = inverse_eta_power(lat.rank, T).shift(12 * lat.norm(beta)) * lat.cocycle(alpha, neg)
        cid = f"lattice gram={list(map(list, lat.gram))} beta={list(beta)} alpha={list(alpha)}"
        yield record("laurent", cid + " order", abs(v - lat.inner(alpha, neg)), 0.0)
        # pure lattice states only see integer inner products, so this is exact on every lattice
        yield record("laurent", cid + " coefficient", series_residual(c, deleted), 0.0)


# -- generating identities ------------------------------------------------------------------------------


def suite_generating(T: int = 144, order: int = 6) -> Iterator[dict]:
    for lat, beta in [(RANK1_EXACT, (0,)), (RANK1_EXACT, (1,)), (RANK1_EXACT, (-2,))]:
        lhs = exp_zeta_lhs(lat, beta, order, T)
        rhs = exp_zeta_rhs(lat, beta, order, T)
        for w in range(order + 1):
            yield record("generating", f"exp-zeta beta={list(beta)} s^{w}", series_residual(lhs[w], rhs[w]), 0.0)
    for lam in [(1, -1), (Fraction(1, 2), Fraction(-1, 2)), (1, 2, -3), (Fraction(1, 2), Fraction(3, 2), -2)]:
        lhs = exp_prime_lhs(lam, order, T)
        rhs = exp_prime_rhs(lam, order, T)
        keys = sorted(set(lhs) | set(rhs))
        worst = 0.0
        for k in keys:
            a = lhs.get(k, QSeries.zero(T))
            b = rhs.get(k, QSeries.zero(T))
            worst = max(worst, 0.0 if a == b else series_residual(a, b) or float("inf"))
        yield record("generating", f"exp-prime lambda={[str(x) for x in lam]}", worst, 0.0)
    for labels in [(1, 1), (1, 3), (2, 2), (1, 1, 2), (1, 2, 3), (1, 1, 1, 1)]:
        for beta in [(0,), (1,)]:
            a = propgen_coefficient(RANK1_EXACT, labels, beta, 96)
            b = onepoint_module(RANK1_EXACT, FockState.monomial([(1, k) for k in labels]), beta, 96)
            yield record("generating", f"coefficient labels={list(labels)} beta={list(beta)}", series_residual(a, b), 0.0)


# -- theta -------------------------------------------------------------------------------------------


def suite_theta(tol: float = 1e-9, B: int = 6) -> Iterator[dict]:
    tol = max(tol, 1e-9)
    for lat, alpha in [(RANK1, (1,)), (RANK1, (2,)), (A2, (1, 1)), (A2, (1, 0))]:
        name = f"gram={list(map(list, lat.gram))} alpha={list(alpha)}"
        a = module_sum_two_point(lat, alpha, B, T=144, Z=6)
        b = theta_two_point(lat, alpha, B, T=144, Z=6)
        yield record("theta", f"{name} formal", series_residual(a, b, upto=24 * (B - 1) + 1), tol)
        for tau in TAUS:
            z = 0.4 + 0.3j
            a = module_sum_two_point(lat, alpha, 2 * B, tau, z)
            b = theta_two_point(lat, alpha, 2 * B, tau, z)
            yield record("theta", f"{name} tau={tau}", abs(a - b) / abs(b), tol)


# -- oracle --------------------------------------------------------------------------------------------


def oracle_cases(max_weight: int = 6):
    for beta in [(0,), (1,)]:
        for w in range(max_weight + 1):
            for mono in monomials_of_weight(1, w):
                yield beta, mono


def suite_oracle(tol: float = 1e-9, W: int = 8, max_weight: int = 6) -> Iterator[dict]:
    tol = max(tol, 1e-9)
    characters = {}
    for beta, mono in oracle_cases(max_weight):
        v = FockState.monomial(mono)
        bt = brute_trace(RANK1, v, beta, W)
        cf = onepoint_module(RANK1, v, beta, bt.trunc)
        if beta not in characters:
            characters[beta] = magnitude(onepoint_module(RANK1, FockState.vacuum(), beta, bt.trunc))
        name = "".join(f"a[-{k}]" for _, k in mono) or "vacuum"
        # traces that vanish identically are measured against the module character
        resid = series_residual(bt, cf, floor=characters[beta])
        yield record("oracle", f"{name} beta={list(beta)}", resid, 0.0 if not any(beta) else tol)


RUNNERS: dict[str, Callable[..., Iterator[dict]]] = {
    "zhu": suite_zhu,
    "elliptic": suite_elliptic,
    "laurent": suite_laurent,
    "generating": suite_generating,
    "theta": suite_theta,
    "oracle": suite_oracle,
}


def run_suite(name: str, tol: float = 1e-10, seed: int = 0) -> list[dict]:
    if name not in RUNNERS:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if name == "zhu":
        return list(suite_zhu(tol, seed))
    if name in ("elliptic", "theta", "oracle"):
        return list(RUNNERS[name](tol))
    return list(RUNNERS[name]())
