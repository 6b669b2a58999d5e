"""Lattices, cocycles and Heisenberg Fock states.

Directions r are numbered from 1 to the rank.  A monomial is a sorted tuple
of (direction, mode) pairs with modes k >= 1, meaning prod a_r[-k] (or
a_r(-k) for round-bracket states) applied to the vacuum times e^alpha.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .series import QSeries, is_exact, normalize

Monomial = tuple  # tuple[tuple[int, int], ...]


def _exact_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def exact_cholesky(gram: Sequence[Sequence[int]]) -> list[list[Fraction]] | None:
    """Lower-triangular L with L L^T = gram over Q, or None if a pivot is irrational."""
    n = len(gram)
    L = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = Fraction(gram[i][j]) - sum(L[i][k] * L[j][k] for k in range(j))
            if i == j:
                root = _exact_sqrt(s)
                if root is None or root == 0:
                    return None
                L[i][i] = root
            else:
                L[i][j] = s / L[j][j]
    return L


class LatticeData:
    """Positive-definite even lattice given by its Gram matrix."""

    def __init__(self, gram: Sequence[Sequence[int]], sign_correction: Callable | None = None):
        g = [[int(x) for x in row] for row in gram]
        n = len(g)
        if n == 0 or any(len(row) != n for row in g):
            raise ValueError("gram must be a non-empty square matrix")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise ValueError("gram must be symmetric")
        if any(g[i][i] % 2 for i in range(n)):
            raise ValueError("lattice must be even (diagonal entries even)")
        arr = np.array(g, dtype=float)
        if np.linalg.eigvalsh(arr).min() <= 0:
            raise ValueError("gram must be positive definite")
        self.gram = tuple(tuple(row) for row in g)
        self.rank = n
        exact = exact_cholesky(g)
        if exact is not None:
            self.cholesky = exact
            self.exact = True
        else:
            c = np.linalg.cholesky(arr)
            if np.abs(c @ c.T - arr).max() > 1e-12:
                raise ValueError("Cholesky residual too large")
            self.cholesky = [[float(x) for x in row] for row in c]
            self.exact = False
        self.sign_correction = sign_correction

    def __repr__(self):
        return f"LatticeData(gram={[list(r) for r in self.gram]})"

    def _check(self, v) -> tuple:
        v = tuple(int(x) for x in v)
        if len(v) != self.rank:
            raise ValueError(f"vector {v} has rank {len(v)}, lattice has rank {self.rank}")
        return v

    def zero(self) -> tuple:
        return (0,) * self.rank

    def inner(self, a, b) -> int:
        a, b = self._check(a), self._check(b)
        return sum(a[i] * self.gram[i][j] * b[j] for i in range(self.rank) for j in range(self.rank))

    def norm(self, a) -> int:
        return self.inner(a, a)

    def pairing(self, r: int, v):
        """(a_r, v): the r-th coordinate of L^T v (r from 1)."""
        v = self._check(v)
        if not 1 <= r <= self.rank:
            raise ValueError(f"direction {r} out of range 1..{self.rank}")
        if not any(v):
            return Fraction(0)
        col = r - 1
        total = sum(self.cholesky[i][col] * v[i] for i in range(self.rank))
        return Fraction(total) if self.exact else complex(total)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(np.array(self.gram, dtype=float)).min())

    # -- cocycle --------------------------------------------------------------
    def basis_sign(self, i: int, j: int) -> int:
        """epsilon(b_i, b_j): (-1)^G_ij below the diagonal, +1 on and above it."""
        return (-1) ** (self.gram[i][j] % 2) if i > j else 1

    def cocycle(self, a, b) -> int:
        a, b = self._check(a), self._check(b)
        parity = 0
        for i in range(self.rank):
            for j in range(i):
                parity += self.gram[i][j] * a[i] * b[j]
        eps = -1 if parity % 2 else 1
        if self.sign_correction is not None:
            s = tuple(x + y for x, y in zip(a, b))
            c = self.sign_correction
            eps *= c(a) * c(b) * c(s)  # c(s)^-1 == c(s) for signs
        return eps

    def vectors_up_to(self, bound: int) -> list[tuple]:
        """All lattice vectors with norm <= bound, sorted by (norm, coords)."""
        lam = self.min_eigenvalue()
        box = int(math.floor(math.sqrt(bound / lam) + 1e-9))
        out = []
        for v in itertools.product(range(-box, box + 1), repeat=self.rank):
            nv = self.norm(v)
            if nv <= bound:
                out.append((nv, v))
        out.sort()
        return [v for _, v in out]


# -- Fock states ------------------------------------------------------------------


def canonical(monomial: Iterable[tuple[int, int]]) -> Monomial:
    mono = tuple(sorted((int(r), int(k)) for r, k in monomial))
    for r, k in mono:
        if k < 1 or r < 1:
            raise ValueError(f"bad mode a_{r}[-{k}]")
    return mono


def monomial_weight(mono: Monomial) -> int:
    return sum(k for _, k in mono)


def monomial_from_exponents(triples: Iterable[Sequence[int]]) -> Monomial:
    """(direction, mode, exponent) triples -> monomial."""
    out = []
    for r, k, e in triples:
        if e < 0:
            raise ValueError("exponents must be non-negative")
        out.extend([(r, k)] * e)
    return canonical(out)


def monomial_exponents(mono: Monomial) -> list[list[int]]:
    counts: dict = defaultdict(int)
    for rk in mono:
        counts[rk] += 1
    return [[r, k, e] for (r, k), e in sorted(counts.items())]


class FockState:
    """Finite linear combination of monomials over e^alpha, in square or round brackets."""

    __slots__ = ("terms", "alpha", "bracket")

    def __init__(self, terms: dict | None = None, alpha: tuple | None = None, bracket: str = "square"):
        if bracket not in ("square", "round"):
            raise ValueError("bracket must be 'square' or 'round'")
        clean = {}
        for mono, c in (terms or {}).items():
            c = normalize(c)
            if c != 0:
                mono = canonical(mono)
                clean[mono] = clean.get(mono, 0) + c
        self.terms = {m: c for m, c in clean.items() if c != 0}
        self.alpha = tuple(alpha) if alpha is not None else None
        self.bracket = bracket

    @classmethod
    def vacuum(cls, alpha=None, bracket="square") -> "FockState":
        return cls({(): 1}, alpha, bracket)

    @classmethod
    def monomial(cls, mono: Iterable[tuple[int, int]], coeff=1, alpha=None, bracket="square") -> "FockState":
        return cls({canonical(mono): coeff}, alpha, bracket)

    def __eq__(self, other):
        if not isinstance(other, FockState):
            return NotImplemented
        return self.terms == other.terms and self.alpha == other.alpha and self.bracket == other.bracket

    def __repr__(self):
        body = " + ".join(f"({c})*{m}" for m, c in sorted(self.terms.items())) or "0"
        return f"FockState[{self.bracket}]({body}; alpha={self.alpha})"

    def __add__(self, other: "FockState") -> "FockState":
        if self.bracket != other.bracket:
            raise ValueError("cannot add square and round states")
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return FockState(out, self.alpha, self.bracket)

    def scale(self, x) -> "FockState":
        return FockState({m: c * normalize(x) for m, c in self.terms.items()}, self.alpha, self.bracket)

    def is_zero(self) -> bool:
        return not self.terms

    def weights(self) -> set:
        return {monomial_weight(m) for m in self.terms}


def _remove_one(mono: Monomial, rk: tuple) -> Monomial:
    lst = list(mono)
    lst.remove(rk)
    return tuple(lst)


def mode_apply(lattice: LatticeData, r: int, m: int, v: FockState) -> FockState:
    """Apply the Heisenberg mode a_r[m] (or a_r(m); both obey the same algebra)."""
    out: dict = defaultdict(int)
    if m < 0:
        for mono, c in v.terms.items():
            out[canonical(mono + ((r, -m),))] += c
    elif m == 0:
        alpha = v.alpha if v.alpha is not None else lattice.zero()
        s = lattice.pairing(r, alpha)
        if s != 0:
            for mono, c in v.terms.items():
                out[mono] += c * s
    else:
        for mono, c in v.terms.items():
            e = mono.count((r, m))
            if e:
                out[_remove_one(mono, (r, m))] += c * m * e
    return FockState(dict(out), v.alpha, v.bracket)


# -- square <-> round --------------------------------------------------------------


@lru_cache(maxsize=None)
def square_round_coeff(k: int, j: int) -> Fraction:
    """c(k, j) = [z^(k-1)] e^z (e^z - 1)^(-j-1), so a[-k] = sum_{j >= -k} c(k, j) a(j)."""
    if j < -k:
        return Fraction(0)
    n = k + j + 1  # need [z^(k+j)] of e^z * u^(-j-1), u = (e^z - 1)/z
    u = QSeries({i: Fraction(1, math.factorial(i + 1)) for i in range(n)}, n)
    expz = QSeries({i: Fraction(1, math.factorial(i)) for i in range(n)}, n)
    p = expz * (u ** (-j - 1))
    return p[k + j] if k + j < p.trunc else Fraction(0)


def square_to_round(lattice: LatticeData, v: FockState) -> FockState:
    """Rewrite a square-bracket state in the round-bracket basis."""
    if v.bracket == "round":
        return v
    alpha = v.alpha if v.alpha is not None else lattice.zero()
    total = FockState({}, alpha, "round")
    for mono, c in v.terms.items():
        state = FockState.vacuum(alpha, "round")
        for r, k in reversed(mono):
            acc = FockState({}, alpha, "round")
            top = max((kk for rr, kk in itertools.chain.from_iterable(state.terms)), default=0)
            for j in range(-k, top + 1):
                coeff = square_round_coeff(k, j)
                if coeff:
                    acc = acc + mode_apply(lattice, r, j, state).scale(coeff)
            state = acc
        total = total + state.scale(c)
    return total


# -- normal-ordered mode sums -------------------------------------------------------


def gbinom(n: int, k: int) -> Fraction:
    """Generalised binomial binom(n, k) for any integer n, k >= 0."""
    if k < 0:
        return Fraction(0)
    num = 1
    for i in range(k):
        num *= n - i
    return Fraction(num, math.factorial(k))


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def normal_ordered_action(
    lattice: LatticeData,
    field_mono: Monomial,
    total: int,
    target: Monomial,
    zero_scalars: dict,
    only: Monomial | None = None,
) -> dict:
    """Apply sum_{n_1+...+n_m = total} prod binom(-n_i-1, k_i-1) :prod a_{r_i}(n_i): to a monomial.

    ``field_mono`` lists the (r_i, k_i); ``zero_scalars[r]`` is the value of
    a_r(0) on the target.  Creation modes sit left of annihilation modes.
    Returns {monomial: coefficient}; with ``only`` set, just that output
    monomial is computed (used for diagonal entries).
    """
    out: dict = defaultdict(int)
    m = len(field_mono)
    only_counts = Counter(only) if only is not None else None

    def finish(remaining: Counter, S: int, fac, creators: list):
        need = S - total
        if not creators:
            if need == 0:
                mono = canonical(remaining.elements())
                if only is None or mono == only:
                    out[mono] += fac
            return
        if need < len(creators):
            return
        if only_counts is not None:
            missing = only_counts - remaining
            if sum(remaining.values()) + len(creators) != sum(only_counts.values()):
                return
            if remaining - only_counts:
                return
            if sum(k * e for (_, k), e in missing.items()) != need:
                return
            # creators must supply exactly the missing parts, each in its own direction
            for perm in set(itertools.permutations(list(missing.elements()))):
                cfac = fac
                for i, (r, size) in zip(creators, perm):
                    fr, fk = field_mono[i]
                    if fr != r:
                        cfac = 0
                        break
                    cfac = cfac * gbinom(size - 1, fk - 1)
                if cfac:
                    out[only] += cfac
            return
        base = list(remaining.elements())
        for comp in _compositions(need, len(creators)):
            cfac = fac
            new = list(base)
            for i, size in zip(creators, comp):
                r, k = field_mono[i]
                cfac = cfac * gbinom(size - 1, k - 1)
                if cfac == 0:
                    break
                new.append((r, size))
            if cfac:
                out[canonical(new)] += cfac

    def rec(i: int, remaining: Counter, S: int, fac, creators: list):
        if i == m:
            finish(remaining, S, fac, creators)
            return
        r, k = field_mono[i]
        z = zero_scalars.get(r, 0)
        if z:
            rec(i + 1, remaining, S, fac * z * (-1) ** (k - 1), creators)
        for (pr, pk), c in list(remaining.items()):
            if pr != r or c == 0:
                continue
            remaining[(pr, pk)] -= 1
            if remaining[(pr, pk)] == 0:
                del remaining[(pr, pk)]
            rec(i + 1, remaining, S + pk, fac * c * pk * gbinom(-pk - 1, k - 1), creators)
            remaining[(pr, pk)] += 1
        rec(i + 1, remaining, S, fac, creators + [i])

    rec(0, Counter(target), 0, Fraction(1), [])
    return {mono: c for mono, c in out.items() if c != 0}


def vertex_coefficient(lattice: LatticeData, u: FockState, w: FockState, j: int) -> FockState:
    """Coefficient of z^j in Y(u, z) w for Heisenberg states u in M (w may carry alpha).

    Uses the same normal-ordered mode sum as the zero mode with sum of modes
    equal to -j - wt(u).  Bracket type is inherited: square modes compose the
    square vertex operator, round modes the round one.
    """
    alpha = w.alpha if w.alpha is not None else lattice.zero()
    zs = {r: lattice.pairing(r, alpha) for r in range(1, lattice.rank + 1)}
    out: dict = defaultdict(int)
    for umono, uc in u.terms.items():
        total = -j - monomial_weight(umono)
        for wmono, wc in w.terms.items():
            for mono, c in normal_ordered_action(lattice, umono, total, wmono, zs).items():
                out[mono] += uc * wc * c
    return FockState(dict(out), alpha, w.bracket)


# -- graded bases ----------------------------------------------------------------------


@lru_cache(maxsize=None)
def partitions(n: int, max_part: int | None = None) -> tuple:
    if max_part is None:
        max_part = n
    if n == 0:
        return ((),)
    out = []
    for p in range(min(n, max_part), 0, -1):
        for rest in partitions(n - p, p):
            out.append((p,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def monomials_of_weight(rank: int, w: int) -> tuple:
    """All rank-l partition monomials of total weight w, in a fixed order."""
    if rank == 1:
        return tuple(canonical((1, k) for k in p) for p in partitions(w))
    out = []
    for w1 in range(w, -1, -1):
        for p in partitions(w1):
            head = [(1, k) for k in p]
            for tail in monomials_of_weight(rank - 1, w - w1):
                shifted = [(r + 1, k) for r, k in tail]
                out.append(canonical(head + shifted))
    return tuple(out)
