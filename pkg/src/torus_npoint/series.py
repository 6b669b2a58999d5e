"""Truncated Laurent series in t = q^(1/24) and the arithmetic q-series.

A :class:`QSeries` stores a finite set of coefficients together with a
truncation ``trunc``: every exponent ``>= trunc`` is *unknown*, not zero.
``trunc`` may be ``math.inf`` for series that are exact polynomials.

The class is variable-agnostic; it is also used for one-variable rational
series in z where convenient (e.g. the square/round bracket coefficients).
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Iterable, Mapping

INF = math.inf
DEFAULT_TRUNC = 264  # q^11
DEFAULT_TOL = 1e-10


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def normalize(x):
    """Coerce a scalar into the coefficient field: Fraction or complex."""
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, (float, complex)):
        return complex(x)
    if isinstance(x, Number):
        return complex(x)
    raise TypeError(f"unsupported coefficient type {type(x).__name__}")


def _close(a, b, tol) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


class QSeries:
    """Immutable truncated Laurent series with Fraction or complex coefficients."""

    __slots__ = ("_c", "trunc")

    def __init__(self, coeffs: Mapping[int, Number] | None = None, trunc=INF):
        c = {}
        if coeffs:
            for e, v in coeffs.items():
                if e >= trunc:
                    continue
                v = normalize(v)
                if v != 0:
                    c[int(e)] = v
        self._c = c
        self.trunc = trunc

    # -- construction -----------------------------------------------------
    @classmethod
    def const(cls, x, trunc=INF) -> "QSeries":
        return cls({0: x}, trunc)

    @classmethod
    def monomial(cls, e: int, x=1, trunc=INF) -> "QSeries":
        return cls({e: x}, trunc)

    @classmethod
    def zero(cls, trunc=INF) -> "QSeries":
        return cls({}, trunc)

    # -- inspection -------------------------------------------------------
    @property
    def coeffs(self) -> dict:
        return dict(self._c)

    def items(self):
        return sorted(self._c.items())

    def __getitem__(self, e: int):
        if e >= self.trunc:
            raise IndexError(f"coefficient of t^{e} unknown (trunc={self.trunc})")
        return self._c.get(e, Fraction(0))

    def coefficient(self, e: int):
        return self[e]

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self._c.values())

    @property
    def field(self) -> str:
        return "exact-rational" if self.is_exact else "complex-float"

    def is_zero(self) -> bool:
        return not self._c

    def valuation(self):
        """Lowest stored exponent; ``trunc`` for a (known-to-trunc) zero series."""
        return min(self._c) if self._c else self.trunc

    def leading(self):
        v = self.valuation()
        if v == self.trunc:
            raise ZeroDivisionError("series has no known nonzero term")
        return v, self._c[v]

    def __len__(self):
        return len(self._c)

    def __repr__(self):
        if not self._c:
            body = "0"
        else:
            body = " + ".join(f"({v})*t^{e}" for e, v in self.items()[:6])
            if len(self._c) > 6:
                body += " + ..."
        return f"QSeries({body}; O(t^{self.trunc}))"

    # -- comparison -------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Number):
            other = QSeries.const(other, self.trunc)
        if not isinstance(other, QSeries):
            return NotImplemented
        if self.trunc != other.trunc:
            return False
        if self.is_exact and other.is_exact:
            return self._c == other._c
        return self.agrees_with(other)

    __hash__ = None

    def agrees_with(self, other: "QSeries", tol: float = DEFAULT_TOL, upto=None) -> bool:
        """Coefficientwise agreement below the common truncation (or ``upto``)."""
        bound = min(self.trunc, other.trunc)
        if upto is not None:
            bound = min(bound, upto)
        keys = {e for e in self._c if e < bound} | {e for e in other._c if e < bound}
        zero = Fraction(0)
        for e in keys:
            a, b = self._c.get(e, zero), other._c.get(e, zero)
            if is_exact(a) and is_exact(b):
                if a != b:
                    return False
            elif not _close(complex(a), complex(b), tol):
                return False
        return True

    def max_abs_diff(self, other: "QSeries", upto=None) -> float:
        bound = min(self.trunc, other.trunc)
        if upto is not None:
            bound = min(bound, upto)
        keys = {e for e in self._c if e < bound} | {e for e in other._c if e < bound}
        zero = Fraction(0)
        return max((abs(self._c.get(e, zero) - other._c.get(e, zero)) for e in keys), default=0.0)

    # -- ring operations --------------------------------------------------
    @staticmethod
    def _coerce(x) -> "QSeries":
        if isinstance(x, QSeries):
            return x
        if isinstance(x, Number):
            return QSeries.const(x)
        raise TypeError(f"cannot combine QSeries with {type(x).__name__}")

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        T = min(self.trunc, other.trunc)
        c = {e: v for e, v in self._c.items() if e < T}
        for e, v in other._c.items():
            if e < T:
                c[e] = c.get(e, 0) + v
        return QSeries(c, T)

    __radd__ = __add__

    def __neg__(self):
        return QSeries({e: -v for e, v in self._c.items()}, self.trunc)

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, x) -> "QSeries":
        x = normalize(x)
        if x == 0:
            return QSeries.zero(self.trunc)
        return QSeries({e: v * x for e, v in self._c.items()}, self.trunc)

    def __mul__(self, other):
        if isinstance(other, Number):
            return self.scale(other)
        if not isinstance(other, QSeries):
            return NotImplemented
        va, vb = self.valuation(), other.valuation()
        T = min(va + other.trunc, vb + self.trunc)
        out: dict[int, object] = {}
        for ea, a in self._c.items():
            for eb, b in other._c.items():
                e = ea + eb
                if e < T:
                    out[e] = out.get(e, 0) + a * b
        return QSeries(out, T)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Number):
            return self.scale(Fraction(1) / other if is_exact(other) else 1 / complex(other))
        if isinstance(other, QSeries):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, Number):
            return self.inverse().scale(other)
        return NotImplemented

    def __pow__(self, n):
        if not isinstance(n, int):
            return series_pow(self, n)
        if n < 0:
            return self.inverse() ** (-n)
        result = QSeries.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def shift(self, k: int) -> "QSeries":
        """Multiply by t^k."""
        return QSeries({e + k: v for e, v in self._c.items()}, self.trunc + k)

    def truncate(self, T) -> "QSeries":
        return QSeries(self._c, min(T, self.trunc))

    def scale_variable(self, x) -> "QSeries":
        """Substitute t -> x*t."""
        x = normalize(x)
        return QSeries({e: v * x**e for e, v in self._c.items()}, self.trunc)

    def derivative(self) -> "QSeries":
        return QSeries({e - 1: e * v for e, v in self._c.items() if e != 0}, self.trunc - 1)

    def map(self, fn) -> "QSeries":
        return QSeries({e: fn(v) for e, v in self._c.items()}, self.trunc)

    def to_complex(self) -> "QSeries":
        return self.map(complex)

    def inverse(self) -> "QSeries":
        v, c = self.leading()
        if len(self._c) == 1:
            return QSeries({-v: _recip(c)}, self.trunc - 2 * v if self.trunc != INF else INF)
        if self.trunc == INF:
            raise ValueError("inverse of a multi-term polynomial needs a finite truncation")
        n = self.trunc - v  # unit part known for exponents < n
        inv_c = _recip(c)
        u = {e - v: a * inv_c for e, a in self._c.items()}
        u_terms = sorted((e, a) for e, a in u.items() if e > 0)
        b = {0: Fraction(1)}
        for k in range(1, n):
            s = 0
            for e, a in u_terms:
                if e > k:
                    break
                bk = b.get(k - e)
                if bk is not None:
                    s += a * bk
            if s != 0:
                b[k] = -s
        return QSeries({e - v: x * inv_c for e, x in b.items()}, n - v)

    def evaluate(self, tau: complex, base: int = 24) -> complex:
        """Numeric value at q = exp(2 pi i tau), t = q^(1/base)."""
        w = 2j * cmath.pi * complex(tau) / base
        return sum(complex(v) * cmath.exp(w * e) for e, v in self._c.items())

    def evaluate_at(self, x: complex) -> complex:
        """Numeric value at a given value of the series variable."""
        return sum(complex(v) * complex(x) ** e for e, v in self._c.items())


def _recip(c):
    return Fraction(1) / c if isinstance(c, Fraction) else 1 / complex(c)


# -- exp / log / pow ------------------------------------------------------------


def series_exp(s: QSeries, trunc=None) -> QSeries:
    """exp(s) for a series with no negative exponents.

    A nonzero constant term is allowed only for complex coefficients.
    """
    T = s.trunc if trunc is None else min(trunc, s.trunc)
    if T == INF:
        if s.is_zero():
            return QSeries.const(1)
        raise ValueError("series_exp needs a finite truncation")
    if s.valuation() < 0:
        raise ValueError("series_exp: negative exponents present")
    c0 = s._c.get(0, 0)
    terms = sorted((e, e * a) for e, a in s._c.items() if e > 0)
    f = {0: Fraction(1)}
    for n in range(1, int(T)):
        acc = 0
        for e, ea in terms:
            if e > n:
                break
            fn = f.get(n - e)
            if fn is not None:
                acc += ea * fn
        if acc != 0:
            f[n] = acc / n
    out = QSeries(f, T)
    if c0 != 0:
        if is_exact(c0):
            raise ValueError("series_exp: exact series with nonzero constant term")
        out = out.scale(cmath.exp(c0))
    return out


def series_log(s: QSeries) -> QSeries:
    """log(s) for a series whose leading term is the constant 1 (or any unit if complex)."""
    if s.is_zero() or s.valuation() != 0:
        raise ValueError("series_log: need a nonzero constant term and no negative exponents")
    if s.trunc == INF and len(s) > 1:
        raise ValueError("series_log needs a finite truncation")
    c0 = s._c[0]
    if is_exact(c0) and c0 != 1:
        raise ValueError("series_log: exact series must have constant term 1")
    u = s.scale(_recip(c0))
    terms = sorted((e, a) for e, a in u._c.items() if e > 0)
    g: dict[int, object] = {}
    T = int(s.trunc) if s.trunc != INF else 1
    for n in range(1, T):
        acc = n * u._c.get(n, 0)
        for e, a in terms:
            if e >= n:
                break
            gk = g.get(n - e)
            if gk is not None:
                acc -= (n - e) * gk * a
        if acc != 0:
            g[n] = acc / n
    out = QSeries(g, s.trunc)
    if c0 != 1:
        out = out + cmath.log(complex(c0))
    return out


def series_pow(s: QSeries, r) -> QSeries:
    """s**r for integer or rational r.

    For fractional r the leading term must be c*t^v with v*r integral and
    (in exact mode) c == 1.
    """
    if isinstance(r, int) or (isinstance(r, Fraction) and r.denominator == 1):
        return s ** int(r)
    r = Fraction(r) if not isinstance(r, float) else r
    v, c = s.leading()
    shift = v * r
    if shift != int(shift):
        raise ValueError(f"series_pow: leading exponent {v} times {r} is not integral")
    if is_exact(c) and c != 1:
        raise ValueError("series_pow: fractional power of a non-normalized exact series")
    unit = s.shift(-v)
    if not is_exact(c):
        unit = unit.scale(1 / complex(c))
    out = series_exp(series_log(unit).scale(r)).shift(int(shift))
    if not is_exact(c):
        out = out.scale(complex(c) ** complex(r))
    return out


# -- arithmetic building blocks ------------------------------------------------


@lru_cache(maxsize=None)
def _bernoulli_table(n: int) -> tuple:
    B = [Fraction(1)]
    for m in range(1, n + 1):
        acc = Fraction(0)
        for j in range(m):
            acc += math.comb(m + 1, j) * B[j]
        B.append(-acc / (m + 1))
    return tuple(B)


def bernoulli(k: int) -> Fraction:
    """B_k with B_1 = -1/2, B_2 = 1/6, B_4 = -1/30."""
    if k < 0:
        raise ValueError("k must be non-negative")
    size = max(16, 1 << (k.bit_length()))
    return _bernoulli_table(size)[k]


def sigma(n: int, k: int) -> int:
    """Sum of d**k over the positive divisors d of n."""
    if n < 1:
        raise ValueError("n must be positive")
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d**k
            e = n // d
            if e != d:
                total += e**k
        d += 1
    return total


@lru_cache(maxsize=None)
def eisenstein(k: int, T=DEFAULT_TRUNC) -> QSeries:
    """E_k(tau) as a series in t = q^(1/24); zero for odd k."""
    if k < 1:
        raise ValueError("k must be positive")
    if k % 2:
        return QSeries.zero(T)
    c = {0: -bernoulli(k) / math.factorial(k)}
    scale = Fraction(2, math.factorial(k - 1))
    n = 1
    while 24 * n < T:
        c[24 * n] = scale * sigma(n, k - 1)
        n += 1
    return QSeries(c, T)


@lru_cache(maxsize=None)
def euler_product(T=DEFAULT_TRUNC) -> QSeries:
    """prod_{n>=1} (1 - q^n) in t = q^(1/24), known below t^T."""
    out = QSeries.const(1, T)
    n = 1
    while 24 * n < T:
        out = out * QSeries({0: 1, 24 * n: -1}, T)
        n += 1
    return out


@lru_cache(maxsize=None)
def eta(T=DEFAULT_TRUNC) -> QSeries:
    """Dedekind eta: t * prod (1 - q^n), known below t^T."""
    if T < 1:
        raise ValueError("T must be at least 1")
    return euler_product(T - 1).shift(1)


@lru_cache(maxsize=None)
def inverse_eta_power(l: int, T=DEFAULT_TRUNC) -> QSeries:
    """eta^(-l), known below t^T."""
    p = euler_product(T + l) ** l
    return p.inverse().shift(-l).truncate(T)


def partition_function(T=DEFAULT_TRUNC) -> QSeries:
    """1/eta, the partition function of a single free boson."""
    return inverse_eta_power(1, T)


def q_power(x, T=INF) -> QSeries:
    """q^x as a t-monomial; 24*x must be an integer."""
    e = Fraction(x) * 24
    if e.denominator != 1:
        raise ValueError(f"q^{x} is not an integral power of t")
    return QSeries.monomial(int(e), 1, T)


def eisenstein_numeric(k: int, tau: complex) -> complex:
    """E_k(tau) evaluated numerically via the Lambert series."""
    if k % 2:
        return 0j
    q = cmath.exp(2j * cmath.pi * complex(tau))
    aq = abs(q)
    if aq >= 1:
        raise ValueError("tau must lie in the upper half plane")
    total = complex(-bernoulli(k) / math.factorial(k))
    lg = math.lgamma(k)
    d = 1
    qd = q
    while True:
        mag = math.exp((k - 1) * math.log(d) - lg + d * math.log(aq))
        term = 2 * math.exp((k - 1) * math.log(d) - lg) * qd / (1 - qd)
        total += term
        if mag < 1e-18 * max(abs(total), 1e-300) and d > k / max(1e-9, -math.log(aq)):
            break
        if mag == 0.0 and d > 2:
            break
        d += 1
        qd *= q
        if d > 100000:
            break
    return total


def dp_partition_counts(n: int) -> list[int]:
    """p(0..n) by the coin-change recurrence (independent of eta)."""
    p = [1] + [0] * n
    for part in range(1, n + 1):
        for m in range(part, n + 1):
            p[m] += p[m - part]
    return p


def polynomial_series(coeffs: Iterable[Number], trunc=INF) -> QSeries:
    return QSeries(dict(enumerate(coeffs)), trunc)
