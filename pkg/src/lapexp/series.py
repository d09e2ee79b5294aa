"""Formal radial power series: partial ordinary Bell polynomials and inversion.

Given ``u**nu = rho**nu * sum_j a_j rho**j`` with ``a_0 > 0``, the inverse
series ``rho**q = u**q * sum_j b_j u**j`` has

    b_j = q/(j+q) * a_0**(-(j+q)/nu) * sum_{r=1..j} C(-(j+q)/nu, r) a_0**(-r) a_j^(r)

where ``a_j^(r)`` is the partial ordinary Bell value: the sum of all ordered
r-fold products of a_1, a_2, ... whose subscripts add to j (equivalently the
coefficient of x^j in (a_1 x + a_2 x^2 + ...)^r).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import HypothesisViolationError
from .exact import ExactValue, rational_pow, to_float
from .multiindex import gen_binomial


def bell_values(coeffs: Sequence, m_max: int) -> dict[tuple[int, int], object]:
    """Bottom-up table of partial ordinary Bell values.

    ``coeffs[i]`` holds the series coefficient with subscript i+1 (a_1, a_2,
    ...).  The returned dict maps (m, r) for 1 <= r <= m <= m_max to a_m^(r),
    computed by the recursion  a_m^(r) = sum_j a_{m-j} a_j^(r-1).  Entries may
    be any type closed under + and * (rationals, floats, numpy arrays,
    polynomials).
    """
    if m_max > len(coeffs):
        raise ValueError("coefficient list too short for requested order")
    table: dict[tuple[int, int], object] = {}
    for m in range(1, m_max + 1):
        table[(m, 1)] = coeffs[m - 1]
    for r in range(2, m_max + 1):
        for m in range(r, m_max + 1):
            acc = None
            for j in range(r - 1, m):
                term = coeffs[m - j - 1] * table[(j, r - 1)]
                acc = term if acc is None else acc + term
            table[(m, r)] = acc
    return table


def bell(coeffs: Sequence, m: int, r: int):
    """Partial ordinary Bell value a_m^(r); 0 when r > m, a_m when r = 1."""
    if r < 1 or m < 1:
        raise ValueError("bell requires m >= 1 and r >= 1")
    if r > m:
        return 0
    return bell_values(coeffs, m)[(m, r)]


@dataclass(frozen=True)
class ScalarSeries:
    """Truncated series ``u**nu = rho**nu * (a_0 + a_1 rho + ... + a_N rho**N)``."""

    coeffs: tuple
    nu: Fraction

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        nu = self.nu if isinstance(self.nu, float) else Fraction(self.nu)
        object.__setattr__(self, "nu", nu)
        if not self.coeffs:
            raise ValueError("series needs at least the leading coefficient")
        if nu == 0:
            raise HypothesisViolationError("leading exponent nu must be nonzero")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def a0(self):
        return self.coeffs[0]


@dataclass(frozen=True)
class InvertedSeries:
    """Coefficients of ``rho**q = u**q * sum_j b_j u**j``.

    Internally each b_j is kept factored as ``reduced[j] * a0**(-(j+q)/nu)``
    with ``reduced[j]`` exact whenever the input coefficients are; the split
    lets downstream checks stay in rational arithmetic even when the a0 power
    is irrational.
    """

    q: Fraction
    nu: Fraction
    a0: object
    reduced: tuple = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.reduced) - 1

    def coeff(self, j: int):
        """b_j, exact (ExactValue) when possible, float otherwise."""
        scale = self._a0_power(j)
        red = self.reduced[j]
        if isinstance(scale, ExactValue) and not isinstance(red, float):
            return scale * Fraction(red)
        return to_float(scale) * to_float(red)

    def coeff_float(self, j: int) -> float:
        return to_float(self.coeff(j))

    @property
    def coeffs(self) -> tuple:
        return tuple(self.coeff(j) for j in range(len(self.reduced)))

    def _a0_power(self, j: int):
        exp = -(Fraction(j) + self.q) / self.nu if not isinstance(self.nu, float) else None
        if exp is not None and isinstance(self.a0, (int, Fraction)):
            return rational_pow(Fraction(self.a0), exp)
        return float(self.a0) ** (-(float(j) + float(self.q)) / float(self.nu))


def invert(series: ScalarSeries, q) -> InvertedSeries:
    """Series inversion: coefficients of rho**q as a series in u.

    Requires a_0 > 0 and q > 0; each b_j depends only on a_0..a_j, and
    b_0 = a_0**(-q/nu).
    """
    q = q if isinstance(q, float) else Fraction(q)
    if q <= 0:
        raise HypothesisViolationError("inversion exponent q must be positive")
    a0 = series.a0
    if not isinstance(a0, float):
        a0 = Fraction(a0)
    if a0 <= 0:
        raise HypothesisViolationError("series inversion requires a_0 > 0")
    nu = series.nu
    n = series.order
    table = bell_values(series.coeffs[1:], n) if n >= 1 else {}
    reduced = [Fraction(1) if not isinstance(a0, float) else 1.0]
    for j in range(1, n + 1):
        exp = -(Fraction(j) + q) / nu if not isinstance(nu, float) and not isinstance(q, float) else \
            -(float(j) + float(q)) / float(nu)
        s = None
        for r in range(1, j + 1):
            term = gen_binomial(exp, r) * table[(j, r)] * a0 ** (-r)
            s = term if s is None else s + term
        front = q / (Fraction(j) + q) if not isinstance(q, float) else float(q) / (j + float(q))
        reduced.append(front * s)
    return InvertedSeries(q=q, nu=nu, a0=series.a0, reduced=tuple(reduced))


# -- formal composition check -------------------------------------------------

def _series_mul(a: list, b: list, n: int) -> list:
    out = [Fraction(0)] * (n + 1)
    for i, ai in enumerate(a):
        if ai == 0 or i > n:
            continue
        for j, bj in enumerate(b):
            if i + j > n:
                break
            out[i + j] += ai * bj
    return out


def _binomial_series(hat: list, exponent: Fraction, n: int) -> list:
    """(1 + hat(rho))**exponent through order n, hat having zero constant term."""
    out = [Fraction(1)] + [Fraction(0)] * n
    power = [Fraction(1)] + [Fraction(0)] * n  # hat**r
    for r in range(1, n + 1):
        power = _series_mul(power, hat, n)
        c = gen_binomial(exponent, r)
        for i in range(r, n + 1):
            out[i] += c * power[i]
    return out


def compose_check(series: ScalarSeries, inv: InvertedSeries):
    """Largest residual coefficient of rho(u(rho)) - rho through order N+1.

    Only defined for q = 1 (the inverse of the map itself).  With rational
    input coefficients the irrational powers of a_0 cancel identically between
    b_j and u(rho)**(j+1), so the residual is computed in exact arithmetic and
    is exactly 0 for a correct inversion.
    """
    if Fraction(inv.q) != 1:
        raise ValueError("compose_check is defined for q = 1")
    if inv.order != series.order:
        raise ValueError("series and inverse must share the truncation order")
    n = series.order
    a0 = series.a0
    exact = not isinstance(a0, float) and all(not isinstance(c, float) for c in series.coeffs) \
        and all(not isinstance(c, float) for c in inv.reduced) and not isinstance(series.nu, float)
    if exact:
        a0 = Fraction(a0)
        hat = [Fraction(0)] + [Fraction(c) / a0 for c in series.coeffs[1:]]
        residual = [Fraction(0)] * (n + 2)
        residual[1] -= Fraction(1)
        for j in range(0, n + 1):
            # b_j * u**(j+1) = reduced_j * rho**(j+1) * (1 + hat)**((j+1)/nu)
            b = _binomial_series(hat, Fraction(j + 1) / Fraction(series.nu), n + 1 - (j + 1))
            rj = Fraction(inv.reduced[j])
            for i, ci in enumerate(b):
                residual[j + 1 + i] += rj * ci
        return max((abs(c) for c in residual), default=Fraction(0))
    # floating fallback: same computation in floats
    a0f = float(a0)
    hat = [0.0] + [to_float(c) / a0f for c in series.coeffs[1:]]
    residual = [0.0] * (n + 2)
    residual[1] -= 1.0
    for j in range(0, n + 1):
        exp = (j + 1) / float(series.nu)
        b = [1.0] + [0.0] * (n - j)
        power = [1.0] + [0.0] * (n - j)
        for r in range(1, n - j + 1):
            power = _series_mul(power, hat, n - j)
            c = gen_binomial(exp, r)
            for i in range(r, n - j + 1):
                b[i] += c * power[i]
        rj = to_float(inv.reduced[j])
        for i, ci in enumerate(b):
            residual[j + 1 + i] += rj * ci
    return max(abs(c) for c in residual)
