"""Brute-force graded traces of zero modes on weight-truncated Fock modules.

This route never touches Eisenstein series or involutions: it builds the
module M (x) e^beta weight by weight, realises o(v) as a normal-ordered mode
sum, and reads off diagonal entries.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .errors import SizeCapError
from .series import QSeries
from .voa import (
    FockState,
    LatticeData,
    Monomial,
    monomial_weight,
    monomials_of_weight,
    normal_ordered_action,
    square_to_round,
)

DEFAULT_WEIGHT_CAP = 10


@dataclass
class GradedModuleBasis:
    rank: int
    beta: tuple
    cutoff: int
    basis: list[tuple[Monomial, ...]]  # basis[w] = monomials of weight w
    index: dict = field(default_factory=dict)  # monomial -> (weight, position)

    def dimensions(self) -> list[int]:
        return [len(b) for b in self.basis]

    def to_json(self) -> list:
        return [[[list(p) for p in mono] for mono in level] for level in self.basis]


def build_basis(lattice: LatticeData, beta, W: int, cap: int = DEFAULT_WEIGHT_CAP) -> GradedModuleBasis:
    if W < 0:
        raise ValueError("W must be non-negative")
    if W > cap:
        raise SizeCapError(f"weight cutoff {W} exceeds cap {cap}", "weight cutoff W")
    basis = [monomials_of_weight(lattice.rank, w) for w in range(W + 1)]
    index = {m: (w, i) for w, level in enumerate(basis) for i, m in enumerate(level)}
    return GradedModuleBasis(lattice.rank, tuple(beta), W, basis, index)


@dataclass
class SparseOperator:
    """Weight-preserving operator: action[(w, i)] = {(w, j): coefficient}."""

    action: dict
    weight_shift: int = 0

    def trace_at(self, w: int, size: int):
        return sum(self.action.get((w, i), {}).get((w, i), 0) for i in range(size))

    def respects_grading(self) -> bool:
        return all(
            out[0] == src[0] + self.weight_shift for src, row in self.action.items() for out in row
        )


def zero_mode(lattice: LatticeData, v: FockState, basis: GradedModuleBasis) -> SparseOperator:
    """o(v) on every basis vector of M (x) e^beta, for v in round brackets."""
    if v.bracket != "round":
        raise ValueError("zero_mode expects a round-bracket state; use square_to_round first")
    zs = {r: lattice.pairing(r, basis.beta) for r in range(1, lattice.rank + 1)}
    action: dict = {}
    for w, level in enumerate(basis.basis):
        for i, target in enumerate(level):
            row: dict = defaultdict(int)
            for mono, c in v.terms.items():
                for out, a in _zero_mode_monomial(lattice, mono, target, zs).items():
                    key = basis.index.get(out)
                    if key is None:
                        raise AssertionError("zero mode left the truncated module")
                    row[key] += c * a
            action[(w, i)] = {k: x for k, x in row.items() if x != 0}
    return SparseOperator(action, 0)


_ZM_CACHE: dict = {}


def _zero_mode_monomial(lattice, mono, target, zs, diagonal: bool = False) -> dict:
    key = (lattice.gram, mono, target, tuple(sorted(zs.items())), diagonal)
    hit = _ZM_CACHE.get(key)
    if hit is None:
        hit = normal_ordered_action(lattice, mono, 0, target, zs, only=target if diagonal else None)
        if len(_ZM_CACHE) > 200000:
            _ZM_CACHE.clear()
        _ZM_CACHE[key] = hit
    return hit


def brute_trace(lattice: LatticeData, v: FockState, beta, W: int, cap: int = DEFAULT_WEIGHT_CAP) -> QSeries:
    """Tr_{M (x) e^beta} o(v) q^(L(0) - rank/24), through module weight W.

    The result is a QSeries in t = q^(1/24) whose truncation sits just past
    the last computed weight.
    """
    beta = tuple(beta)
    basis = build_basis(lattice, beta, W, cap)
    vr = square_to_round(lattice, v) if v.bracket == "square" else v
    zs = {r: lattice.pairing(r, beta) for r in range(1, lattice.rank + 1)}
    shift = 12 * lattice.norm(beta) - lattice.rank
    coeffs = {}
    for w, level in enumerate(basis.basis):
        tr = 0
        for target in level:
            for mono, c in vr.terms.items():
                tr += c * _zero_mode_monomial(lattice, mono, target, zs, True).get(target, 0)
        coeffs[24 * w + shift] = tr
    return QSeries(coeffs, 24 * (W + 1) + shift)


def dump_basis(lattice: LatticeData, beta, W: int) -> list:
    return build_basis(lattice, beta, W).to_json()


def weight_of(v: FockState) -> int:
    return max((monomial_weight(m) for m in v.terms), default=0)
