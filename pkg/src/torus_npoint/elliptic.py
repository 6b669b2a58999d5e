"""Elliptic functions on the torus C/(2 pi i Z + 2 pi i tau Z).

Formal objects are :class:`ZSeries`: Laurent series in one variable z whose
coefficients are :class:`QSeries` in t = q^(1/24).  Numeric evaluation
works with plain complex numbers.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Mapping

from .errors import MathDomainError, PoleError
from .series import (
    DEFAULT_TOL,
    DEFAULT_TRUNC,
    INF,
    QSeries,
    eisenstein,
    eisenstein_numeric,
    eta,
    normalize,
    series_exp,
)

DEFAULT_ZORDER = 12
POLE_RADIUS = 1e-6


class ZSeries:
    """Truncated Laurent series in z with QSeries coefficients.

    ``log_coeff = c`` records an extra term ``c * (-log z)``; it is only used
    for P_0 and is turned into ``z**c`` by :meth:`exp` of the negated series.
    """

    __slots__ = ("_c", "ztrunc", "log_coeff")

    def __init__(self, coeffs: Mapping[int, object] | None = None, ztrunc=INF, log_coeff: int = 0):
        c = {}
        if coeffs:
            for m, v in coeffs.items():
                if m >= ztrunc:
                    continue
                if not isinstance(v, QSeries):
                    v = QSeries.const(v)
                if not v.is_zero():
                    c[int(m)] = v
        self._c = c
        self.ztrunc = ztrunc
        self.log_coeff = int(log_coeff)

    @classmethod
    def const(cls, x, ztrunc=INF) -> "ZSeries":
        return cls({0: x}, ztrunc)

    @classmethod
    def monomial(cls, m: int, x=1, ztrunc=INF) -> "ZSeries":
        return cls({m: x}, ztrunc)

    # -- inspection -------------------------------------------------------
    def __getitem__(self, m: int) -> QSeries:
        if m >= self.ztrunc:
            raise IndexError(f"coefficient of z^{m} unknown (ztrunc={self.ztrunc})")
        return self._c.get(m, QSeries.zero(self.qtrunc))

    coefficient = __getitem__

    def items(self):
        return sorted(self._c.items())

    @property
    def qtrunc(self):
        return min((v.trunc for v in self._c.values()), default=INF)

    @property
    def is_exact(self) -> bool:
        return all(v.is_exact for v in self._c.values())

    def is_zero(self) -> bool:
        return not self._c and self.log_coeff == 0

    def valuation(self):
        return min(self._c) if self._c else self.ztrunc

    def principal_part(self) -> dict:
        return {m: v for m, v in self._c.items() if m < 0}

    def __repr__(self):
        head = ", ".join(f"z^{m}: {v!r}" for m, v in self.items()[:4])
        log = f"{self.log_coeff}*(-log z) + " if self.log_coeff else ""
        return f"ZSeries({log}{head}{' ...' if len(self._c) > 4 else ''}; O(z^{self.ztrunc}))"

    # -- comparison -------------------------------------------------------
    def agrees_with(self, other: "ZSeries", tol: float = DEFAULT_TOL, zupto=None, qupto=None) -> bool:
        if self.log_coeff != other.log_coeff:
            return False
        bound = min(self.ztrunc, other.ztrunc)
        if zupto is not None:
            bound = min(bound, zupto)
        keys = {m for m in self._c if m < bound} | {m for m in other._c if m < bound}
        for m in keys:
            a = self._c.get(m, QSeries.zero())
            b = other._c.get(m, QSeries.zero())
            if not a.agrees_with(b, tol, upto=qupto):
                return False
        return True

    def max_abs_diff(self, other: "ZSeries", zupto=None, qupto=None) -> float:
        bound = min(self.ztrunc, other.ztrunc)
        if zupto is not None:
            bound = min(bound, zupto)
        keys = {m for m in self._c if m < bound} | {m for m in other._c if m < bound}
        zero = QSeries.zero()
        return max(
            (self._c.get(m, zero).max_abs_diff(other._c.get(m, zero), upto=qupto) for m in keys),
            default=0.0,
        )

    def __eq__(self, other):
        if not isinstance(other, ZSeries):
            return NotImplemented
        if self.ztrunc != other.ztrunc or self.log_coeff != other.log_coeff:
            return False
        if self._c.keys() != other._c.keys():
            return False
        return all(self._c[m] == other._c[m] for m in self._c)

    __hash__ = None

    # -- ring operations --------------------------------------------------
    @staticmethod
    def _coerce(x) -> "ZSeries":
        if isinstance(x, ZSeries):
            return x
        if isinstance(x, (QSeries, Number)):
            return ZSeries.const(x)
        raise TypeError(f"cannot combine ZSeries with {type(x).__name__}")

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        Z = min(self.ztrunc, other.ztrunc)
        c = {m: v for m, v in self._c.items() if m < Z}
        for m, v in other._c.items():
            if m < Z:
                c[m] = c[m] + v if m in c else v
        return ZSeries(c, Z, self.log_coeff + other.log_coeff)

    __radd__ = __add__

    def __neg__(self):
        return ZSeries({m: -v for m, v in self._c.items()}, self.ztrunc, -self.log_coeff)

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, x) -> "ZSeries":
        if self.log_coeff:
            raise ValueError("cannot scale a series carrying a log term")
        if isinstance(x, QSeries):
            return ZSeries({m: v * x for m, v in self._c.items()}, self.ztrunc)
        return ZSeries({m: v.scale(x) for m, v in self._c.items()}, self.ztrunc)

    def __mul__(self, other):
        if isinstance(other, (Number, QSeries)):
            if self.log_coeff:
                raise ValueError("cannot multiply a series carrying a log term")
            return self.scale(other)
        if not isinstance(other, ZSeries):
            return NotImplemented
        if self.log_coeff or other.log_coeff:
            raise ValueError("cannot multiply series carrying log terms")
        va, vb = self.valuation(), other.valuation()
        Z = min(va + other.ztrunc, vb + self.ztrunc)
        out: dict[int, QSeries] = {}
        for ma, a in self._c.items():
            for mb, b in other._c.items():
                m = ma + mb
                if m < Z:
                    p = a * b
                    out[m] = out[m] + p if m in out else p
        return ZSeries(out, Z)

    def __rmul__(self, other):
        if isinstance(other, (Number, QSeries)):
            return self.scale(other)
        return NotImplemented

    def shift(self, k: int) -> "ZSeries":
        """Multiply by z^k."""
        if self.log_coeff:
            raise ValueError("cannot shift a series carrying a log term")
        return ZSeries({m + k: v for m, v in self._c.items()}, self.ztrunc + k)

    def truncate(self, Z=INF, T=INF) -> "ZSeries":
        return ZSeries(
            {m: v.truncate(T) for m, v in self._c.items()}, min(Z, self.ztrunc), self.log_coeff
        )

    def inverse(self) -> "ZSeries":
        if self.log_coeff:
            raise ValueError("cannot invert a series carrying a log term")
        v = self.valuation()
        if v == self.ztrunc:
            raise ZeroDivisionError("series has no known nonzero z-term")
        lead_inv = self._c[v].inverse()
        if len(self._c) == 1:
            Z = self.ztrunc - 2 * v if self.ztrunc != INF else INF
            return ZSeries({-v: lead_inv}, Z)
        if self.ztrunc == INF:
            raise ValueError("inverse of a multi-term z-polynomial needs a finite ztrunc")
        n = int(self.ztrunc - v)
        u = {m - v: c * lead_inv for m, c in self._c.items() if m > v}
        b: dict[int, QSeries] = {0: QSeries.const(1, self.qtrunc)}
        for k in range(1, n):
            acc = None
            for j, uj in u.items():
                if j <= k and (k - j) in b:
                    term = uj * b[k - j]
                    acc = term if acc is None else acc + term
            if acc is not None and not acc.is_zero():
                b[k] = -acc
        return ZSeries({k - v: x * lead_inv for k, x in b.items()}, n - v)

    def __truediv__(self, other):
        if isinstance(other, Number):
            return self.scale(Fraction(1) / other if isinstance(other, (int, Fraction)) else 1 / complex(other))
        if isinstance(other, QSeries):
            return self.scale(other.inverse())
        if isinstance(other, ZSeries):
            return self * other.inverse()
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("ZSeries powers must be integers")
        if n < 0:
            return self.inverse() ** (-n)
        result = ZSeries.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def exp(self) -> "ZSeries":
        """exp of a series with no negative z-powers; a log term becomes z**(-log_coeff)."""
        if self.principal_part():
            raise ValueError("exp: negative z-powers present")
        if self.ztrunc == INF and any(m > 0 for m in self._c):
            raise ValueError("exp needs a finite ztrunc")
        c0 = self._c.get(0)
        n = int(self.ztrunc) if self.ztrunc != INF else 1
        terms = sorted((m, v.scale(m)) for m, v in self._c.items() if m > 0)
        f: dict[int, QSeries] = {0: QSeries.const(1, self.qtrunc)}
        for k in range(1, n):
            acc = None
            for m, mv in terms:
                if m > k:
                    break
                if (k - m) in f:
                    term = mv * f[k - m]
                    acc = term if acc is None else acc + term
            if acc is not None and not acc.is_zero():
                f[k] = acc.scale(Fraction(1, k))
        out = ZSeries(f, self.ztrunc)
        if c0 is not None:
            out = out.scale(series_exp(c0))
        if self.log_coeff:
            out = out.shift(-self.log_coeff)
        return out

    def scale_variable(self, c) -> "ZSeries":
        """Substitute z -> c*z."""
        if self.log_coeff:
            raise ValueError("cannot rescale a series carrying a log term")
        c = normalize(c)
        if c == 0:
            raise PoleError("z -> 0*z substitution", "z coefficient")
        return ZSeries({m: v.scale(c**m) for m, v in self._c.items()}, self.ztrunc)

    def derivative(self) -> "ZSeries":
        out = {m - 1: v.scale(m) for m, v in self._c.items() if m != 0}
        if self.log_coeff:
            out[-1] = out.get(-1, QSeries.zero()) - self.log_coeff
        return ZSeries(out, self.ztrunc - 1)

    def map(self, fn) -> "ZSeries":
        return ZSeries({m: fn(v) for m, v in self._c.items()}, self.ztrunc, self.log_coeff)

    def evaluate(self, z: complex, tau: complex) -> complex:
        """Numeric value of the truncated series (principal branch for log terms)."""
        total = sum(v.evaluate(tau) * complex(z) ** m for m, v in self._c.items())
        if self.log_coeff:
            total -= self.log_coeff * cmath.log(z)
        return total

    def as_qseries(self) -> QSeries:
        """The z^0 coefficient of a z-independent series."""
        if self.log_coeff or any(m != 0 for m in self._c):
            raise ValueError("series depends on z")
        return self._c.get(0, QSeries.zero(self.qtrunc))


def zseries_of(q: QSeries, ztrunc=INF) -> ZSeries:
    return ZSeries({0: q}, ztrunc)


# -- formal special functions ----------------------------------------------------


@lru_cache(maxsize=None)
def p0_series(Z: int = DEFAULT_ZORDER, T=DEFAULT_TRUNC) -> ZSeries:
    """P_0 = -log z + sum_{k>=2} E_k z^k / k, known below z^Z."""
    if Z < 2:
        raise ValueError("Z must be at least 2")
    return ZSeries({k: eisenstein(k, T).scale(Fraction(1, k)) for k in range(2, Z)}, Z, log_coeff=1)


@lru_cache(maxsize=None)
def pn_series(n: int, Z: int = DEFAULT_ZORDER, T=DEFAULT_TRUNC) -> ZSeries:
    """P_n = z^-n + (-1)^n sum_{k>=2} binom(k-1, n-1) E_k z^(k-n), known below z^Z."""
    if n < 1:
        raise ValueError("n must be positive")
    sign = -1 if n % 2 else 1
    c = {-n: QSeries.const(1, T)}
    for k in range(2, Z + n):
        if k % 2 == 0:
            c[k - n] = eisenstein(k, T).scale(sign * math.comb(k - 1, n - 1))
    return ZSeries(c, Z)


def weierstrass_p_series(Z: int = DEFAULT_ZORDER, T=DEFAULT_TRUNC) -> ZSeries:
    return pn_series(2, Z, T) - eisenstein(2, T)


def weierstrass_zeta_series(Z: int = DEFAULT_ZORDER, T=DEFAULT_TRUNC) -> ZSeries:
    return pn_series(1, Z, T) + ZSeries({1: eisenstein(2, T)}, Z)


def _cd_multiplier(r: int, s: int) -> int:
    if r < 1:
        raise ValueError("r must be positive")
    if s < 0:
        raise ValueError("s must be non-negative")
    sign = 1 if r % 2 else -1
    if s == 0:
        return sign
    return sign * math.factorial(r + s - 1) // (math.factorial(r - 1) * math.factorial(s - 1))


def c_coeff(r: int, s: int, T=DEFAULT_TRUNC) -> QSeries:
    """C(r, s): a signed binomial multiple of E_{r+s} (s = 0 gives +-E_r)."""
    return eisenstein(r + s, T).scale(_cd_multiplier(r, s))


def d_coeff(r: int, s: int, Z: int = DEFAULT_ZORDER, T=DEFAULT_TRUNC) -> ZSeries:
    """D(r, s, z) as a formal series: the same multiple of P_{r+s}(z)."""
    return pn_series(r + s, Z, T).scale(_cd_multiplier(r, s))


def d_coeff_numeric(r: int, s: int, z: complex, tau: complex) -> complex:
    return _cd_multiplier(r, s) * pn_numeric(r + s, z, tau)


def c_coeff_numeric(r: int, s: int, tau: complex) -> complex:
    return _cd_multiplier(r, s) * eisenstein_numeric(r + s, tau)


@lru_cache(maxsize=None)
def prime_form_series(Z: int = DEFAULT_ZORDER, T=DEFAULT_TRUNC) -> ZSeries:
    """K = exp(-P_0) = z exp(-sum E_k z^k / k), known below z^Z."""
    inner = p0_series(Z, T)  # known below z^Z; after exp and the z-shift, below z^(Z+1)
    return (-inner).exp().truncate(Z)


@lru_cache(maxsize=None)
def minus_i_theta1_series(Z: int = DEFAULT_ZORDER, T=DEFAULT_TRUNC) -> ZSeries:
    """-i * theta_1 as an exact series: 2 sum_{n>=0} (-1)^n t^(3(2n+1)^2) sinh((n+1/2) z)."""
    c: dict[int, dict] = {}
    n = 0
    while 3 * (2 * n + 1) ** 2 < T:
        e = 3 * (2 * n + 1) ** 2
        half = Fraction(2 * n + 1, 2)
        for m in range(1, Z, 2):
            c.setdefault(m, {})[e] = 2 * (-1) ** n * half**m / math.factorial(m)
        n += 1
    return ZSeries({m: QSeries(v, T) for m, v in c.items()}, Z)


def prime_form_theta_route(Z: int = DEFAULT_ZORDER, T=DEFAULT_TRUNC) -> ZSeries:
    """-i theta_1 / eta^3, an independent route to the prime form."""
    eta3 = eta(T + 3) ** 3  # leading t^3, known below t^(T+3)
    return minus_i_theta1_series(Z, T + 3).scale(eta3.inverse())


# -- numeric evaluation ---------------------------------------------------------


def _check_tau(tau: complex) -> complex:
    tau = complex(tau)
    if tau.imag <= 0:
        raise MathDomainError(f"tau must have positive imaginary part, got {tau}", "tau")
    return tau


def eta_numeric(tau: complex) -> complex:
    tau = _check_tau(tau)
    q = cmath.exp(2j * cmath.pi * tau)
    prod = 1 + 0j
    qn = q
    while abs(qn) > 1e-18:
        prod *= 1 - qn
        qn *= q
    return cmath.exp(2j * cmath.pi * tau / 24) * prod


def theta1_derivatives(z: complex, tau: complex, order: int = 0) -> list[complex]:
    """theta_1 and its first ``order`` z-derivatives by direct summation.

    Terms exp(pi i tau (n+1/2)^2 + (n+1/2)(z + i pi)); the sum is cut once the
    Gaussian tail falls below 1e-17 relative to the largest term.
    """
    tau = _check_tau(tau)
    z = complex(z)
    a = math.pi * tau.imag
    # term magnitude: exp(-a x^2 + x Re(z) - x pi Re... ) ; peak near x = Re(z)/(2a)
    x0 = z.real / (2 * a)
    out = [0j] * (order + 1)

    def term(n):
        x = n + 0.5
        return x, cmath.exp(1j * math.pi * tau * x * x + x * (z + 1j * math.pi))

    centre = int(round(x0 - 0.5))
    peak = None
    for direction in (1, -1):
        n = centre if direction == 1 else centre - 1
        while True:
            x, w = term(n)
            mag = abs(w)
            if peak is None or mag > peak:
                peak = mag
            xp = 1.0
            for j in range(order + 1):
                out[j] += xp * w
                xp *= x
            if (direction == 1 and x > x0 or direction == -1 and x < x0) and mag * (1 + abs(x)) ** order < 1e-17 * peak:
                break
            n += direction
    return out


def theta1_numeric(z: complex, tau: complex) -> complex:
    return theta1_derivatives(z, tau, 0)[0]


def lattice_reduce(z: complex, tau: complex) -> tuple[complex, int, int]:
    """Write z = z' + 2 pi i (m + n tau) with z' the nearest-to-zero representative."""
    tau = _check_tau(tau)
    w = complex(z) / (2j * math.pi)
    y = w.imag / tau.imag
    x = w.real - y * tau.real
    best = None
    for n in (math.floor(y), math.floor(y) + 1):
        for dn in (-1, 0, 1):
            nn = n + dn
            xr = w.real - nn * tau.real
            for m in (math.floor(xr), math.floor(xr) + 1):
                zr = complex(z) - 2j * math.pi * (m + nn * tau)
                if best is None or abs(zr) < abs(best[0]) - 1e-15:
                    best = (zr, m, nn)
    return best


def _log_derivatives(z: complex, tau: complex, order: int) -> list[complex]:
    """d^j/dz^j (theta_1'/theta_1) for j = 0..order-1."""
    f = theta1_derivatives(z, tau, order)
    g: list[complex] = []
    # f^(m+1) = sum_i binom(m, i) f^(i) g^(m-i)
    for m in range(order):
        acc = f[m + 1]
        for i in range(1, m + 1):
            acc -= math.comb(m, i) * f[i] * g[m - i]
        g.append(acc / f[0])
    return g


def pn_numeric(n: int, z: complex, tau: complex) -> complex:
    """P_n(z, tau) numerically.

    z is reduced to its nearest-to-zero lattice representative z'; for n >= 2
    P_n is elliptic, and P_1(z' + 2 pi i (m + k tau)) = P_1(z') - k.
    P_1 = theta_1'/theta_1 and P_{n+1} = -P_n'/n.
    """
    if n < 1:
        raise ValueError("n must be positive")
    zr, _, k = lattice_reduce(z, tau)
    if abs(zr) < POLE_RADIUS:
        raise PoleError(f"P_{n} evaluated at a lattice point (z={complex(z)})", "z")
    g = _log_derivatives(zr, tau, n)
    val = g[n - 1] * (-1) ** (n - 1) / math.factorial(n - 1)
    if n == 1:
        val -= k
    return val


def pn_numeric_series(n: int, z: complex, tau: complex, kmax: int = 120) -> complex:
    """P_n by summing its z-expansion; only valid for |z| below the shortest period."""
    tau = _check_tau(tau)
    z = complex(z)
    if abs(z) < POLE_RADIUS:
        raise PoleError(f"P_{n} at z=0", "z")
    sign = (-1) ** n
    total = z**-n
    for k in range(2, kmax, 2):
        total += sign * math.comb(k - 1, n - 1) * eisenstein_numeric(k, tau) * z ** (k - n)
    return total


def prime_form_numeric(z: complex, tau: complex) -> complex:
    """K(z, tau) = -i theta_1 / eta^3."""
    return -1j * theta1_numeric(z, tau) / eta_numeric(tau) ** 3


def weierstrass_p_numeric(z: complex, tau: complex) -> complex:
    return pn_numeric(2, z, tau) - eisenstein_numeric(2, tau)


def weierstrass_zeta_numeric(z: complex, tau: complex) -> complex:
    return pn_numeric(1, z, tau) + eisenstein_numeric(2, tau) * complex(z)
