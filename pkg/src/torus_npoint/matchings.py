"""Labelled sets, involutions, fixed-point-free involutions and matchings."""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import SizeCapError

DEFAULT_CAP = 12
HARD_CAP = 16


@dataclass(frozen=True, order=True)
class LabelledElement:
    block: int
    direction: int
    label: int
    uid: int


@dataclass(frozen=True)
class LabelledSet:
    elements: tuple[LabelledElement, ...]

    def __post_init__(self):
        uids = [e.uid for e in self.elements]
        if len(set(uids)) != len(uids):
            raise ValueError("uids must be unique within a labelled set")

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @classmethod
    def from_labels(cls, labels: Iterable[int], block: int = 1, direction: int = 1) -> "LabelledSet":
        return cls(tuple(LabelledElement(block, direction, k, i) for i, k in enumerate(labels)))

    @classmethod
    def from_blocks(cls, blocks: Sequence[Iterable[tuple[int, int]]]) -> "LabelledSet":
        """Blocks are sequences of (direction, label) pairs; blocks are numbered from 1."""
        out = []
        uid = 0
        for b, items in enumerate(blocks, start=1):
            for r, k in items:
                out.append(LabelledElement(b, r, k, uid))
                uid += 1
        return cls(tuple(out))

    def by_block(self, block: int) -> "LabelledSet":
        return LabelledSet(tuple(e for e in self.elements if e.block == block))

    def by_direction(self, r: int) -> "LabelledSet":
        return LabelledSet(tuple(e for e in self.elements if e.direction == r))

    def directions(self) -> list[int]:
        return sorted({e.direction for e in self.elements})

    def blocks(self) -> list[int]:
        return sorted({e.block for e in self.elements})


@dataclass(frozen=True)
class Involution:
    pairs: frozenset  # of frozenset({uid, uid})
    fixed: frozenset  # of uid

    def orbits(self) -> list[tuple[int, ...]]:
        out = [tuple(sorted(p)) for p in self.pairs] + [(u,) for u in self.fixed]
        return sorted(out)

    def covers(self, uids: Iterable[int]) -> bool:
        seen = list(self.fixed)
        for p in self.pairs:
            if len(p) != 2:
                return False
            seen.extend(p)
        return sorted(seen) == sorted(uids)


def check_size(n: int, cap: int = DEFAULT_CAP) -> None:
    if cap > HARD_CAP:
        raise SizeCapError(f"requested cap {cap} exceeds hard limit {HARD_CAP}", "cap")
    if n > cap:
        raise SizeCapError(f"labelled set of size {n} exceeds cap {cap}", "labelled-set size")
    if n > DEFAULT_CAP:
        warnings.warn(f"enumerating involutions of a set of size {n}; this may be slow", stacklevel=3)


def _involutions(uids: tuple, fpf: bool) -> Iterator[tuple[list, list]]:
    if not uids:
        yield [], []
        return
    first, rest = uids[0], uids[1:]
    if not fpf:
        for pairs, fixed in _involutions(rest, fpf):
            yield pairs, [first] + fixed
    for i, other in enumerate(rest):
        remaining = rest[:i] + rest[i + 1 :]
        for pairs, fixed in _involutions(remaining, fpf):
            yield [(first, other)] + pairs, fixed


def enumerate_involutions(S: LabelledSet, cap: int = DEFAULT_CAP) -> Iterator[Involution]:
    """All involutions of the uid set, lazily, smallest unpaired uid first."""
    check_size(len(S), cap)
    uids = tuple(sorted(e.uid for e in S))
    for pairs, fixed in _involutions(uids, fpf=False):
        yield Involution(frozenset(frozenset(p) for p in pairs), frozenset(fixed))


def enumerate_fpf(S: LabelledSet, cap: int = DEFAULT_CAP) -> Iterator[Involution]:
    check_size(len(S), cap)
    if len(S) % 2:
        return
    uids = tuple(sorted(e.uid for e in S))
    for pairs, _ in _involutions(uids, fpf=True):
        yield Involution(frozenset(frozenset(p) for p in pairs), frozenset())


def telephone_number(n: int) -> int:
    a, b = 1, 1
    for k in range(1, n):
        a, b = b, b + k * a
    return b if n >= 1 else 1


def double_factorial_odd(n: int) -> int:
    """(n-1)!! for even n (number of perfect matchings), 0 for odd n."""
    if n % 2:
        return 0
    return math.prod(range(n - 1, 0, -2))


@dataclass(frozen=True)
class Matching:
    """Multiset of unordered label pairs {r, s}."""

    edges: tuple[tuple[tuple[int, int], int], ...] = field(default=())

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "Matching":
        cnt = Counter(tuple(sorted(p)) for p in pairs)
        return cls(tuple(sorted(cnt.items())))

    def degree_profile(self) -> Counter:
        c: Counter = Counter()
        for (r, s), m in self.edges:
            c[r] += m
            c[s] += m
        return c


def aut_order(M: Matching) -> int:
    """prod over edge classes E of m(E)! * |Aut(E)|^m(E), |Aut(E)| = 2 iff labels agree."""
    total = 1
    for (r, s), m in M.edges:
        total *= math.factorial(m) * (2**m if r == s else 1)
    return total


def matching_of(inv: Involution, S: LabelledSet) -> Matching:
    label = {e.uid: e.label for e in S}
    return Matching.from_pairs((label[a], label[b]) for a, b in (tuple(p) for p in inv.pairs))


def matching_classes(profile: dict[int, int]) -> list[Matching]:
    """Isomorphism classes of complete matchings on a label multiset {label: multiplicity}."""
    labels = sorted(k for k, e in profile.items() for _ in range(e))
    out: set = set()

    def rec(remaining: list[int], pairs: list):
        if not remaining:
            out.add(Matching.from_pairs(pairs))
            return
        a = remaining[0]
        seen = set()
        for i in range(1, len(remaining)):
            b = remaining[i]
            if b in seen:
                continue
            seen.add(b)
            rec(remaining[1:i] + remaining[i + 1 :], pairs + [(a, b)])

    if len(labels) % 2 == 0:
        rec(labels, [])
    return sorted(out, key=lambda m: m.edges)
