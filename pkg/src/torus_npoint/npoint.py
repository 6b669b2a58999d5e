"""Closed formulas for genus-one n-point functions and their verification checks.

Two evaluation modes share one code path through small "context" objects:

* formal: tau is formal (QSeries in t = q^(1/24)) and every position is a
  rational multiple z_i = c_i z of one formal variable z; values are ZSeries.
* numeric: tau and all z_i are complex numbers; values are complex.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .elliptic import (
    DEFAULT_ZORDER,
    ZSeries,
    c_coeff,
    c_coeff_numeric,
    d_coeff,
    d_coeff_numeric,
    eta_numeric,
    lattice_reduce,
    prime_form_numeric,
    prime_form_series,
)
from .errors import MathDomainError, PoleError, SizeCapError
from .matchings import (
    DEFAULT_CAP,
    LabelledElement,
    LabelledSet,
    check_size,
    enumerate_fpf,
    enumerate_involutions,
)
from .series import DEFAULT_TRUNC, INF, QSeries, eisenstein, inverse_eta_power
from .voa import FockState, LatticeData, monomial_weight, monomials_of_weight, vertex_coefficient

FORMAL = "formal"


# -- problem description ------------------------------------------------------------


@dataclass
class Insertion:
    state: FockState  # square-bracket Fock state in M
    alpha: tuple
    z: object  # Fraction (formal coefficient) or complex


@dataclass
class NPointProblem:
    lattice: LatticeData
    beta: tuple
    insertions: list[Insertion]
    tau: object = FORMAL  # "formal" or complex
    T: int = DEFAULT_TRUNC
    Z: int = DEFAULT_ZORDER

    @property
    def formal(self) -> bool:
        return isinstance(self.tau, str) and self.tau == FORMAL

    @property
    def n(self) -> int:
        return len(self.insertions)

    def validate(self) -> None:
        lat = self.lattice
        self.beta = lat._check(self.beta)
        total = [0] * lat.rank
        for ins in self.insertions:
            ins.alpha = lat._check(ins.alpha)
            for i, x in enumerate(ins.alpha):
                total[i] += x
            if ins.state.bracket != "square":
                raise ValueError("insertion states must be given in square brackets")
            for mono in ins.state.terms:
                for r, _ in mono:
                    if r > lat.rank:
                        raise ValueError(f"direction {r} exceeds lattice rank {lat.rank}")
        if any(total):
            raise MathDomainError(f"sum of insertion charges is {tuple(total)}, not 0", "sum(alpha_i)")
        if not self.formal:
            tau = complex(self.tau)
            if tau.imag <= 0:
                raise MathDomainError(f"tau={tau} is not in the upper half plane", "tau")

    def with_insertions(self, insertions: list[Insertion]) -> "NPointProblem":
        return NPointProblem(self.lattice, self.beta, insertions, self.tau, self.T, self.Z)

    def with_beta(self, beta) -> "NPointProblem":
        return NPointProblem(self.lattice, tuple(beta), self.insertions, self.tau, self.T, self.Z)


@dataclass
class NPointResult:
    value: object  # QSeries | ZSeries | complex
    mode: str
    provenance: str
    field: str = ""

    def __post_init__(self):
        if not self.field:
            v = self.value
            if isinstance(v, (QSeries, ZSeries)):
                self.field = "exact-rational" if v.is_exact else "complex-float"
            else:
                self.field = "complex-float"


def _pole_budget(prob: NPointProblem) -> int:
    labels = sum(monomial_weight(m) for ins in prob.insertions for m in ins.state.terms) if prob.insertions else 0
    lat = prob.lattice
    neg = 0
    for i, j in itertools.combinations(range(prob.n), 2):
        neg += max(0, -lat.inner(prob.insertions[i].alpha, prob.insertions[j].alpha))
    return labels + neg + 2


# -- evaluation contexts ------------------------------------------------------------------


class FormalContext:
    """tau formal, z_i = c_i * z; values are ZSeries known below z^Zw."""

    mode = "formal"

    def __init__(self, prob: NPointProblem):
        self.prob = prob
        self.T = prob.T
        self.Zw = prob.Z + _pole_budget(prob)
        self.c = []
        for ins in prob.insertions:
            z = ins.z
            if isinstance(z, complex) or isinstance(z, float):
                raise MathDomainError("numeric position in a formal-tau problem", "z")
            self.c.append(Fraction(z))
        for i, j in itertools.combinations(range(len(self.c)), 2):
            if self.c[i] == self.c[j]:
                raise PoleError(f"insertions {i + 1} and {j + 1} share the formal position {self.c[i]}*z", f"z_{i + 1}{j + 1}")

    def one(self):
        return ZSeries.const(QSeries.const(1, self.T), self.Zw)

    def zero(self):
        return ZSeries({}, self.Zw)

    def scalar(self, x):
        return ZSeries.const(QSeries.const(x, self.T), self.Zw)

    def C(self, r, s):
        return ZSeries.const(c_coeff(r, s, self.T), self.Zw)

    def D(self, r, s, i, j):
        return _scaled_d(r, s, self.c[i] - self.c[j], self.Zw, self.T)

    def K_power(self, i, j, m):
        return _scaled_k_power(self.c[i] - self.c[j], m, self.Zw, self.T)

    def exp_linear(self, coeffs):
        x = sum(Fraction(a) * c for a, c in zip(coeffs, self.c))
        return ZSeries({m: x**m / math.factorial(m) for m in range(self.Zw)}, self.Zw)

    def prefactor(self, beta_norm: int, rank: int):
        q = inverse_eta_power(rank, self.T).shift(12 * beta_norm)
        return ZSeries.const(q, self.Zw)

    def finish(self, value: ZSeries):
        value = value.truncate(self.prob.Z)
        if self.prob.n <= 1:
            return value.as_qseries() if not value.is_zero() else QSeries.zero(self.T)
        return value

    def is_zero(self, value, tol) -> bool:
        return value.is_zero() if value.is_exact else value.max_abs_diff(ZSeries({}, value.ztrunc)) <= tol

    def magnitude(self, value) -> float:
        if isinstance(value, QSeries):
            return float(value.max_abs_diff(QSeries.zero(value.trunc)))
        return float(value.max_abs_diff(ZSeries({}, value.ztrunc)))


@lru_cache(maxsize=4096)
def _scaled_d(r, s, c, Z, T):
    return d_coeff(r, s, Z, T).scale_variable(c)


@lru_cache(maxsize=4096)
def _scaled_k_power(c, m, Z, T):
    K = prime_form_series(Z + abs(m) + 2, T).scale_variable(c)
    return (K**m).truncate(Z)


class NumericContext:
    """tau and z_i complex; values are complex numbers."""

    mode = "numeric"

    def __init__(self, prob: NPointProblem):
        self.prob = prob
        self.tau = complex(prob.tau)
        self.z = [complex(ins.z) for ins in prob.insertions]

    def one(self):
        return 1 + 0j

    def zero(self):
        return 0j

    def scalar(self, x):
        return complex(x)

    def C(self, r, s):
        return c_coeff_numeric(r, s, self.tau)

    def D(self, r, s, i, j):
        try:
            return d_coeff_numeric(r, s, self.z[i] - self.z[j], self.tau)
        except PoleError as exc:
            raise PoleError(f"P_{r + s} pole at z_{i + 1}-z_{j + 1}", f"z_{i + 1}{j + 1}") from exc

    def K_power(self, i, j, m):
        if m == 0:
            return 1 + 0j
        k = prime_form_numeric(self.z[i] - self.z[j], self.tau)
        if m < 0 and abs(k) < 1e-12:
            raise PoleError(f"prime form vanishes at z_{i + 1}-z_{j + 1}", f"z_{i + 1}{j + 1}")
        return k**m

    def exp_linear(self, coeffs):
        return cmath.exp(sum(complex(a) * z for a, z in zip(coeffs, self.z)))

    def prefactor(self, beta_norm: int, rank: int):
        return cmath.exp(2j * math.pi * self.tau * beta_norm / 2) / eta_numeric(self.tau) ** rank

    def finish(self, value):
        return complex(value)

    def is_zero(self, value, tol) -> bool:
        return abs(value) <= tol

    def magnitude(self, value) -> float:
        return abs(value)


def make_context(prob: NPointProblem):
    return FormalContext(prob) if prob.formal else NumericContext(prob)


# -- labelled sets of a problem ------------------------------------------------------


def labelled_set(monos: Sequence[tuple]) -> LabelledSet:
    """Blocks numbered from 1 in insertion order; directions from the monomials."""
    return LabelledSet.from_blocks([list(m) for m in monos])


# -- gamma weights ----------------------------------------------------------------------


SINGLETON_CONVENTIONS = ("all", "literal")


def gamma_orbit(orbit: Sequence[LabelledElement], prob: NPointProblem, ctx=None, singleton: str = "all"):
    """Weight of a 1- or 2-element orbit.

    Pairs give C(r, s) within one block and D(r, s, z_ij) across blocks.  A
    fixed element with label p in block k and direction r gives
    (a_r, delta_{p,1} beta + C(p,0) alpha_k + sum_l D(p,0,z_kl) alpha_l); with
    ``singleton="all"`` the sum runs over every l != k, with ``"literal"``
    only over l > k.
    """
    ctx = ctx or make_context(prob)
    lat = prob.lattice
    if len(orbit) == 2:
        e, f = orbit
        if e.direction != f.direction:
            return ctx.zero()
        if e.block == f.block:
            return ctx.C(e.label, f.label)
        return ctx.D(e.label, f.label, e.block - 1, f.block - 1)
    if len(orbit) != 1:
        raise ValueError("orbits have one or two elements")
    (e,) = orbit
    r, p, k = e.direction, e.label, e.block - 1
    total = ctx.zero()
    if p == 1:
        s = lat.pairing(r, prob.beta)
        if s:
            total = total + ctx.scalar(s)
    ak = lat.pairing(r, prob.insertions[k].alpha)
    if ak and p % 2 == 0:
        total = total + ctx.C(p, 0) * ak
    for l, ins in enumerate(prob.insertions):
        if l == k or (singleton == "literal" and l < k):
            continue
        al = lat.pairing(r, ins.alpha)
        if al:
            total = total + ctx.D(p, 0, k, l) * al
    return total


class _GammaCache:
    def __init__(self, S: LabelledSet, prob, ctx, singleton):
        self.elements = {e.uid: e for e in S}
        self.prob, self.ctx, self.singleton = prob, ctx, singleton
        self.cache: dict = {}

    def __call__(self, uids: tuple):
        hit = self.cache.get(uids)
        if hit is None:
            hit = gamma_orbit([self.elements[u] for u in uids], self.prob, self.ctx, self.singleton)
            self.cache[uids] = hit
        return hit


def _inv_sum_enumerate(S: LabelledSet, gamma, ctx, cap):
    total = ctx.zero()
    for inv in enumerate_involutions(S, cap):
        term = ctx.one()
        for orbit in inv.orbits():
            term = term * gamma(orbit)
        total = total + term
    return total


def _inv_sum_dp(S: LabelledSet, gamma, ctx, cap):
    check_size(len(S), cap)
    uids = tuple(sorted(e.uid for e in S))
    memo: dict = {}

    def f(rest: tuple):
        if not rest:
            return ctx.one()
        hit = memo.get(rest)
        if hit is not None:
            return hit
        first, tail = rest[0], rest[1:]
        acc = gamma((first,)) * f(tail)
        for i, other in enumerate(tail):
            acc = acc + gamma((first, other)) * f(tail[:i] + tail[i + 1 :])
        memo[rest] = acc
        return acc

    return f(uids)


def q_n_monomials(
    prob: NPointProblem, monos: Sequence[tuple], ctx=None, method: str = "dp", singleton: str = "all", cap: int = DEFAULT_CAP
):
    """Q_N for one monomial per insertion: prod_r sum_{Inv(Phi^r)} prod gamma."""
    ctx = ctx or make_context(prob)
    S = labelled_set(monos)
    out = ctx.one()
    for r in S.directions():
        Sr = S.by_direction(r)
        gamma = _GammaCache(Sr, prob, ctx, singleton)
        if method == "enumerate":
            part = _inv_sum_enumerate(Sr, gamma, ctx, cap)
        elif method == "dp":
            part = _inv_sum_dp(Sr, gamma, ctx, cap)
        else:
            raise ValueError(f"unknown method {method!r}")
        out = out * part
    return out


def _multilinear(prob: NPointProblem):
    """Yield (coefficient, monomials) over all combinations of insertion terms."""
    term_lists = [list(ins.state.terms.items()) for ins in prob.insertions]
    for combo in itertools.product(*term_lists):
        coeff = 1
        for _, c in combo:
            coeff = coeff * c
        yield coeff, [m for m, _ in combo]


def q_n(prob: NPointProblem, method: str = "dp", singleton: str = "all", cap: int = DEFAULT_CAP) -> NPointResult:
    prob.validate()
    ctx = make_context(prob)
    total = ctx.zero()
    for coeff, monos in _multilinear(prob):
        total = total + q_n_monomials(prob, monos, ctx, method, singleton, cap) * coeff
    return NPointResult(ctx.finish(total), ctx.mode, f"Q_N via {method}")


def _lattice_factor_value(prob: NPointProblem, ctx):
    lat = prob.lattice
    value = ctx.prefactor(lat.norm(prob.beta), lat.rank)
    coeffs = [lat.inner(prob.beta, ins.alpha) for ins in prob.insertions]
    if any(coeffs):
        value = value * ctx.exp_linear(coeffs)
    for i, j in itertools.combinations(range(prob.n), 2):
        ai, aj = prob.insertions[i].alpha, prob.insertions[j].alpha
        m = lat.inner(ai, aj)
        eps = lat.cocycle(ai, aj)
        if m:
            value = value * ctx.K_power(i, j, m)
        if eps == -1:
            value = value * -1
    return value


def lattice_factor(prob: NPointProblem) -> NPointResult:
    """The pure-lattice n-point function (all Fock parts replaced by the vacuum)."""
    prob.validate()
    ctx = make_context(prob)
    return NPointResult(ctx.finish(_lattice_factor_value(prob, ctx)), ctx.mode, "lattice factor")


def npoint_full(prob: NPointProblem, method: str = "dp", singleton: str = "all", cap: int = DEFAULT_CAP) -> NPointResult:
    """Q_N times the lattice factor, summed multilinearly over the insertion states."""
    prob.validate()
    ctx = make_context(prob)
    qn = ctx.zero()
    for coeff, monos in _multilinear(prob):
        qn = qn + q_n_monomials(prob, monos, ctx, method, singleton, cap) * coeff
    value = qn * _lattice_factor_value(prob, ctx)
    return NPointResult(ctx.finish(value), ctx.mode, f"closed formula ({method}, singleton={singleton})")


# -- rank-one style corollaries ----------------------------------------------------------


def onepoint_module(lattice: LatticeData, v: FockState, beta, T: int = DEFAULT_TRUNC, cap: int = DEFAULT_CAP) -> QSeries:
    """1-point function on M (x) e^beta from label-1 subsets and fixed-point-free pairings.

    For each direction: sum over subsets Delta of label-1 elements of
    (a_r, beta)^|Delta| times the sum over complete pairings of the rest of
    prod C(r, s).
    """
    beta = lattice._check(beta)
    pref = inverse_eta_power(lattice.rank, T).shift(12 * lattice.norm(beta))
    total = QSeries.zero(pref.trunc)
    for mono, coeff in v.terms.items():
        S = LabelledSet.from_blocks([list(mono)])
        part = QSeries.const(1, T)
        for r in S.directions():
            Sr = S.by_direction(r)
            b = lattice.pairing(r, beta)
            ones = [e for e in Sr if e.label == 1]
            acc = QSeries.zero(T)
            for size in range(len(ones) + 1):
                if size and b == 0:
                    break
                for delta in itertools.combinations(ones, size):
                    drop = {e.uid for e in delta}
                    rest = LabelledSet(tuple(e for e in Sr if e.uid not in drop))
                    if len(rest) % 2:
                        continue
                    label = {e.uid: e.label for e in rest}
                    inner = QSeries.zero(T)
                    for inv in enumerate_fpf(rest, cap):
                        term = QSeries.const(1, T)
                        for pair in inv.pairs:
                            x, y = tuple(pair)
                            term = term * c_coeff(label[x], label[y], T)
                        inner = inner + term
                    acc = acc + inner * (b**size)
            part = part * acc
        total = total + part * pref * coeff
    return total


def current_generating(prob: NPointProblem, direction: int = 1) -> NPointResult:
    """Generating function F_N(a, z_1; ...; a, z_n) from subsets and P_2 pairings.

    Insertion states are ignored; every insertion is the current a_r = a_r[-1].1
    with charge 0.
    """
    lat = prob.lattice
    n = prob.n
    ins = [Insertion(FockState.monomial([(direction, 1)]), lat.zero(), x.z) for x in prob.insertions]
    p = prob.with_insertions(ins)
    p.validate()
    ctx = make_context(p)
    b = lat.pairing(direction, p.beta)
    total = ctx.zero()
    for size in range(n + 1):
        if size and b == 0:
            break
        for delta in itertools.combinations(range(n), size):
            rest = [i for i in range(n) if i not in delta]
            if len(rest) % 2:
                continue
            S = LabelledSet(tuple(LabelledElement(i + 1, direction, 1, i) for i in rest))
            inner = ctx.zero()
            for inv in enumerate_fpf(S):
                term = ctx.one()
                for pair in inv.pairs:
                    x, y = sorted(pair)
                    term = term * ctx.D(1, 1, x, y)
                inner = inner + term
            total = total + inner * (b**size)
    pref = ctx.prefactor(lat.norm(p.beta), lat.rank)
    return NPointResult(ctx.finish(total * pref), ctx.mode, "current generating function")


# -- generating identities ------------------------------------------------------------------


def _basis_weights(order: int):
    """Rank-one partitions as exponent maps {k: e_k}, by total weight."""
    for w in range(order + 1):
        for mono in monomials_of_weight(1, w):
            counts: dict = {}
            for _, k in mono:
                counts[k] = counts.get(k, 0) + 1
            yield w, mono, counts


def exp_zeta_lhs(lattice: LatticeData, beta, order: int, T: int = DEFAULT_TRUNC, direction: int = 1, one_point=None) -> dict:
    """Coefficients of s^w, w <= order, of Z_N(exp(sum a[-m] s^m / m).1)."""
    one_point = one_point or (lambda v, b: onepoint_module(lattice, v, b, T))
    out: dict = {}
    for w, mono, counts in _basis_weights(order):
        weight = Fraction(1)
        for k, e in counts.items():
            weight /= math.factorial(e) * k**e
        mono_r = tuple((direction, k) for _, k in mono)
        val = one_point(FockState.monomial(mono_r), beta) * weight
        out[w] = out[w] + val if w in out else val
    return out


def exp_zeta_rhs(lattice: LatticeData, beta, order: int, T: int = DEFAULT_TRUNC, direction: int = 1) -> dict:
    """q^((beta,beta)/2) exp((a,beta) s) Z_M(exp(sum a[-m] s^m / m).1), by powers of s."""
    zm = exp_zeta_lhs(lattice, lattice.zero(), order, T, direction)
    b = lattice.pairing(direction, beta)
    shift = 12 * lattice.norm(beta)
    out = {}
    for w in range(order + 1):
        acc = QSeries.zero(T + shift)
        for j in range(w + 1):
            if j and b == 0:
                break
            acc = acc + zm[w - j].shift(shift) * (b**j / math.factorial(j))
        out[w] = acc
    return out


def _poly_mul(a: dict, b: dict, max_deg: int) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            if sum(e) <= max_deg:
                out[e] = out[e] + ca * cb if e in out else ca * cb
    return out


def _power_sum_poly(lambdas: Sequence, k: int) -> dict:
    n = len(lambdas)
    out = {}
    for i, lam in enumerate(lambdas):
        if lam:
            e = tuple(k if j == i else 0 for j in range(n))
            out[e] = Fraction(lam) / k
    return out


def exp_prime_lhs(lambdas: Sequence, order: int, T: int = DEFAULT_TRUNC) -> dict:
    """Z_M(exp(sum_m a[-m]/m sum_i lambda_i z_i^m).1) as {exponent tuple: QSeries}, total degree <= order."""
    lat = LatticeData([[2]])
    n = len(lambdas)
    zero = (0,) * n
    out: dict = {}
    for w, mono, counts in _basis_weights(order):
        poly = {zero: Fraction(1)}
        for k, e in counts.items():
            base = _power_sum_poly(lambdas, k)
            for _ in range(e):
                poly = _poly_mul(poly, base, order)
            poly = {x: c / math.factorial(e) for x, c in poly.items()}
        if not poly:
            continue
        z = onepoint_module(lat, FockState.monomial(mono), (0,), T)
        for x, c in poly.items():
            term = z * c
            out[x] = out[x] + term if x in out else term
    return {x: v for x, v in out.items() if not v.is_zero()}


def exp_prime_rhs(lambdas: Sequence, order: int, T: int = DEFAULT_TRUNC) -> dict:
    """(1/eta) prod_{i<j} (K(z_ij)/z_ij)^(lambda_i lambda_j), total degree <= order.

    Uses log(K(z)/z) = -sum_{k>=2} E_k z^k / k and a truncated exponential.
    """
    n = len(lambdas)
    zero = (0,) * n
    X: dict = {}
    for i, j in itertools.combinations(range(n), 2):
        lam = Fraction(lambdas[i]) * Fraction(lambdas[j])
        if lam == 0:
            continue
        for k in range(2, order + 1, 2):
            ek = eisenstein(k, T)
            for a in range(k + 1):
                e = [0] * n
                e[i] += a
                e[j] += k - a
                c = -lam * math.comb(k, a) * (-1) ** (k - a) / k
                x = tuple(e)
                term = ek * c
                X[x] = X[x] + term if x in X else term
    result = {zero: QSeries.const(1, T)}
    power = {zero: QSeries.const(1, T)}
    for m in range(1, order // 2 + 1):
        power = _poly_mul(power, X, order)
        for x, v in power.items():
            term = v * Fraction(1, math.factorial(m))
            result[x] = result[x] + term if x in result else term
    inv_eta = inverse_eta_power(1, T)
    return {x: v * inv_eta for x, v in result.items() if not v.is_zero()}


def propgen_coefficient(lattice: LatticeData, labels: Sequence[int], beta, T: int = DEFAULT_TRUNC, direction: int = 1) -> QSeries:
    """Coefficient of prod z_i^(l_i - 1) in the current generating function, l_i >= 1.

    Each P_2(z_i - z_j) is re-expanded binomially from its Eisenstein series;
    singular parts never produce non-negative exponents in every variable.
    """
    n = len(labels)
    b = lattice.pairing(direction, beta)
    total = QSeries.zero(T)
    for size in range(n + 1):
        if size and b == 0:
            break
        for delta in itertools.combinations(range(n), size):
            if any(labels[i] != 1 for i in delta):
                continue  # a fixed current contributes only to exponent 0
            rest = [i for i in range(n) if i not in delta]
            if len(rest) % 2:
                continue
            S = LabelledSet(tuple(LabelledElement(1, direction, labels[i], i) for i in rest))
            inner = QSeries.zero(T)
            for inv in enumerate_fpf(S):
                term = QSeries.const(1, T)
                for pair in inv.pairs:
                    x, y = sorted(pair)
                    r, s = labels[x], labels[y]
                    k = r + s
                    coeff = (k - 1) * math.comb(k - 2, r - 1) * (-1) ** (s - 1)
                    term = term * eisenstein(k, T).scale(coeff)
                inner = inner + term
            total = total + inner * (b**size)
    pref = inverse_eta_power(lattice.rank, T).shift(12 * lattice.norm(beta))
    return total * pref


# -- theta series ------------------------------------------------------------------------------


def theta_lattice(lattice: LatticeData, alpha, B: int, T: int = DEFAULT_TRUNC, Z: int = DEFAULT_ZORDER) -> ZSeries:
    """sum_{(beta,beta) <= 2B} q^((beta,beta)/2) exp((beta,alpha) z) as a ZSeries."""
    coeffs: dict = {}
    for beta in lattice.vectors_up_to(2 * B):
        e = 12 * lattice.norm(beta)
        x = lattice.inner(beta, alpha)
        for m in range(Z):
            c = Fraction(x) ** m / math.factorial(m)
            if c:
                coeffs.setdefault(m, {})
                coeffs[m][e] = coeffs[m].get(e, 0) + c
    return ZSeries({m: QSeries(v, T) for m, v in coeffs.items()}, Z)


def theta_lattice_numeric(lattice: LatticeData, alpha, z: complex, tau: complex, B: int) -> complex:
    total = 0j
    for beta in lattice.vectors_up_to(2 * B):
        total += cmath.exp(2j * math.pi * complex(tau) * lattice.norm(beta) / 2 + lattice.inner(beta, alpha) * complex(z))
    return total


def module_sum_two_point(lattice: LatticeData, alpha, B: int, tau=FORMAL, z=None, T: int = DEFAULT_TRUNC, Z: int = DEFAULT_ZORDER):
    """sum over modules beta with (beta,beta) <= 2B of the pure-lattice 2-point function of e^alpha, e^-alpha."""
    neg = tuple(-x for x in alpha)
    total = None
    for beta in lattice.vectors_up_to(2 * B):
        pos = (Fraction(1), Fraction(0)) if tau == FORMAL else (complex(z), 0j)
        prob = NPointProblem(
            lattice,
            beta,
            [Insertion(FockState.vacuum(), tuple(alpha), pos[0]), Insertion(FockState.vacuum(), neg, pos[1])],
            tau,
            T,
            Z,
        )
        v = lattice_factor(prob).value
        total = v if total is None else total + v
    return total


def theta_two_point(lattice: LatticeData, alpha, B: int, tau=FORMAL, z=None, T: int = DEFAULT_TRUNC, Z: int = DEFAULT_ZORDER):
    """epsilon(alpha, -alpha) Theta_{alpha,L} / (eta^l K^{(alpha,alpha)})."""
    neg = tuple(-x for x in alpha)
    eps = lattice.cocycle(alpha, neg)
    m = lattice.norm(alpha)
    if tau == FORMAL:
        Zw = Z + m + 2
        th = theta_lattice(lattice, alpha, B, T, Zw)
        K = prime_form_series(Zw + m + 2, T)
        val = th * (K**-m) * inverse_eta_power(lattice.rank, T)
        return (val * eps).truncate(Z)
    th = theta_lattice_numeric(lattice, alpha, z, tau, B)
    return eps * th / (eta_numeric(tau) ** lattice.rank * prime_form_numeric(z, tau) ** m)


# -- recursion residual --------------------------------------------------------------------------


def _remove_factor(state_mono: tuple, rk: tuple):
    lst = list(state_mono)
    count = lst.count(rk)
    if not count:
        return 0, None
    lst.remove(rk)
    return count, tuple(lst)


def zhu_recursion_residual(
    prob: NPointProblem, p: int, direction: int = 1, singleton: str = "all", method: str = "dp"
) -> NPointResult:
    """LHS minus RHS of the mode recursion that strips one a_r[-p] from insertion 1.

    Every F_N on either side is evaluated with :func:`npoint_full`.  Insertion
    states must be single monomials.
    """
    prob.validate()
    ctx = make_context(prob)
    lat = prob.lattice
    monos = []
    for ins in prob.insertions:
        if len(ins.state.terms) != 1:
            raise ValueError("recursion residual needs single-monomial insertions")
        monos.append(next(iter(ins.state.terms)))
    count, rest1 = _remove_factor(monos[0], (direction, p))
    if not count:
        raise ValueError(f"insertion 1 has no factor a_{direction}[-{p}]")

    def F(new_monos):
        inserts = [
            Insertion(FockState.monomial(m), ins.alpha, ins.z) for m, ins in zip(new_monos, prob.insertions)
        ]
        sub = prob.with_insertions(inserts)
        # same context: positions and tau are unchanged
        return q_n_monomials(sub, new_monos, ctx, method, singleton) * _lattice_factor_value(sub, ctx)

    lhs = F(monos)
    rhs = ctx.zero()
    base = [rest1] + monos[1:]
    # pairs inside insertion 1
    for label in sorted({k for r, k in rest1 if r == direction}):
        c, reduced = _remove_factor(rest1, (direction, label))
        rhs = rhs + ctx.C(label, p) * F([reduced] + monos[1:]) * c
    # pairs with other insertions
    for k in range(1, prob.n):
        for label in sorted({kk for r, kk in monos[k] if r == direction}):
            c, reduced = _remove_factor(monos[k], (direction, label))
            new = list(base)
            new[k] = reduced
            rhs = rhs + ctx.D(label, p, k, 0) * F(new) * c
    # the fixed-point term
    weight = ctx.zero()
    if p == 1:
        b = lat.pairing(direction, prob.beta)
        if b:
            weight = weight + ctx.scalar(b)
    a1 = lat.pairing(direction, prob.insertions[0].alpha)
    if a1 and p % 2 == 0:
        weight = weight + ctx.C(p, 0) * a1
    for k in range(1, prob.n):
        ak = lat.pairing(direction, prob.insertions[k].alpha)
        if ak:
            weight = weight + ctx.D(p, 0, 0, k) * ak
    rhs = rhs + weight * F(base)
    return NPointResult(ctx.finish(lhs - rhs), ctx.mode, "recursion residual")


# -- elliptic properties ------------------------------------------------------------------------------


@dataclass
class EllipticReport:
    checks: dict = field(default_factory=dict)  # name -> (residual, expected-description)

    def add(self, name: str, residual: float):
        self.checks[name] = float(residual)

    def passed(self, tol: float) -> bool:
        return all(r <= tol for r in self.checks.values())


def _relative(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _shifted(prob: NPointProblem, i: int, delta: complex) -> NPointProblem:
    ins = [Insertion(x.state, x.alpha, complex(x.z) + (delta if j == i else 0)) for j, x in enumerate(prob.insertions)]
    return prob.with_insertions(ins)


def quasi_period_multiplier(prob: NPointProblem, i: int, general: bool = True) -> complex:
    """Multiplier for z_i -> z_i + 2 pi i tau.

    The literal form is q^((a_i,a_i)/2 + (a_i,beta)) q_i^((a_i,a_i)); the
    general form also carries prod_{j != i} q_j^((a_i,a_j)), which equals 1
    whenever those z_j vanish.
    """
    lat = prob.lattice
    tau = complex(prob.tau)
    ai = prob.insertions[i].alpha
    nrm = lat.norm(ai)
    val = cmath.exp(2j * math.pi * tau * (nrm / 2 + lat.inner(ai, prob.beta))) * cmath.exp(nrm * complex(prob.insertions[i].z))
    if general:
        for j, ins in enumerate(prob.insertions):
            if j != i:
                val *= cmath.exp(lat.inner(ai, ins.alpha) * complex(ins.z))
    return val


def verify_elliptic(prob: NPointProblem, i: int, shift: str, singleton: str = "all") -> EllipticReport:
    """Periodicity (shift '2pi i') or quasi-periodicity ('2pi i tau') in z_i, plus symmetry checks."""
    if prob.formal:
        raise ValueError("elliptic checks need numeric tau and positions")
    tau = complex(prob.tau)
    rep = EllipticReport()
    base = npoint_full(prob, singleton=singleton).value
    if shift == "2pi i":
        moved = npoint_full(_shifted(prob, i, 2j * math.pi), singleton=singleton).value
        rep.add("periodicity", _relative(moved, base))
    elif shift == "2pi i tau":
        moved = npoint_full(_shifted(prob, i, 2j * math.pi * tau), singleton=singleton).value
        rep.add("quasi-periodicity", _relative(moved, quasi_period_multiplier(prob, i) * base))
    else:
        raise ValueError("shift must be '2pi i' or '2pi i tau'")
    c = 0.37 - 0.21j
    trans = prob.with_insertions([Insertion(x.state, x.alpha, complex(x.z) + c) for x in prob.insertions])
    rep.add("translation", _relative(npoint_full(trans, singleton=singleton).value, base))
    for perm in itertools.permutations(range(prob.n)):
        if perm == tuple(range(prob.n)):
            continue
        permuted = prob.with_insertions([prob.insertions[j] for j in perm])
        rep.add(f"permutation {perm}", _relative(npoint_full(permuted, singleton=singleton).value, base))
    return rep


def laurent_leading(prob: NPointProblem) -> tuple[int, QSeries]:
    """Leading z-exponent and coefficient of a formal 2-point function with z_1 - z_2 = z."""
    if not prob.formal or prob.n != 2:
        raise ValueError("Laurent check needs a formal 2-point problem")
    val = npoint_full(prob).value
    v = val.valuation()
    return v, val[v]


def fourier_normalization(prob: NPointProblem, i: int, samples: int = 64, direction: int = 1) -> tuple[complex, complex, float]:
    """Mean of F over z_i -> z_i + 2 pi i s, s in [0,1), versus (a,beta) times the deleted function.

    Returns (integral, expected, richardson_gap) where the gap compares M and 2M samples.
    """
    if prob.formal:
        raise ValueError("Fourier normalization needs numeric positions")
    lat = prob.lattice
    ins = prob.insertions
    tau = complex(prob.tau)
    zi = complex(ins[i].z)
    for j, x in enumerate(ins):
        if j == i:
            continue
        for s in range(256):
            zr, _, _ = lattice_reduce(zi + 2j * math.pi * s / 256 - complex(x.z), tau)
            if abs(zr) < 0.25:
                raise PoleError(f"integration path for z_{i + 1} passes near z_{j + 1}", f"z_{i + 1}{j + 1}")

    def mean(M):
        total = 0j
        for s in range(M):
            total += npoint_full(_shifted(prob, i, 2j * math.pi * s / M)).value
        return total / M

    m1 = mean(samples)
    m2 = mean(2 * samples)
    rest = prob.with_insertions([x for j, x in enumerate(ins) if j != i])
    rest_val = npoint_full(rest).value
    expected = lat.pairing(direction, prob.beta) * rest_val
    return m1, expected, abs(m1 - m2)


# -- reduction to 1-point functions ------------------------------------------------------------------------


def reduction_coefficients(lattice: LatticeData, v1: FockState, v2: FockState, beta, orders: Sequence[int], one_point) -> dict:
    """1-point functions of the z^j coefficients of Y[v1, z] v2, for j in ``orders``."""
    out = {}
    for j in orders:
        state = vertex_coefficient(lattice, v1, v2, j)
        out[j] = one_point(state, beta) if not state.is_zero() else None
    return out
