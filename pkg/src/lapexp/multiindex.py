"""Multi-index arithmetic, enumeration, and monomial moments over the unit sphere.

A multi-index is a plain tuple of nonnegative ints ``alpha = (a1, ..., ad)``;
``x**alpha`` means ``prod x_m**a_m``.  This module also owns the angular
quadrature rules used everywhere a sphere integral is evaluated numerically.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .exact import ExactValue, double_factorial

MultiIndex = tuple[int, ...]


def validate_multi_index(alpha: Sequence[int]) -> MultiIndex:
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) < 1:
        raise ValueError("multi-index needs dimension >= 1")
    if any(a < 0 for a in alpha):
        raise ValueError(f"negative entry in multi-index {alpha}")
    return alpha


def order(alpha: MultiIndex) -> int:
    return sum(alpha)


def enumerate_multi_indices(d: int, n: int) -> list[MultiIndex]:
    """All alpha with dimension d and |alpha| = n, in graded-lex order.

    Within the fixed total order n this is descending lexicographic, e.g.
    (2,0), (1,1), (0,2).  The count is C(n+d-1, d-1).
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if n < 0:
        raise ValueError("order must be >= 0")
    if d == 1:
        return [(n,)]
    out: list[MultiIndex] = []
    for first in range(n, -1, -1):
        for rest in enumerate_multi_indices(d - 1, n - first):
            out.append((first,) + rest)
    return out


def multi_factorial(alpha: MultiIndex) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


def multi_double_factorial_minus_one(alpha: MultiIndex) -> int:
    """prod (a_m - 1)!! with (-1)!! = 1."""
    out = 1
    for a in alpha:
        out *= double_factorial(a - 1)
    return out


def is_even(alpha: MultiIndex) -> bool:
    return all(a % 2 == 0 for a in alpha)


def factorial_data(alpha: Sequence[int]) -> tuple[int, int, int]:
    """(alpha!, (alpha-1)!!, even(alpha)) for a multi-index."""
    alpha = validate_multi_index(alpha)
    return multi_factorial(alpha), multi_double_factorial_minus_one(alpha), int(is_even(alpha))


@lru_cache(maxsize=None)
def sphere_moment(alpha: MultiIndex) -> ExactValue:
    """Exact monomial moment  w_alpha = integral over S^{d-1} of Omega**alpha.

    Nonzero only when every entry is even, in which case

        w_alpha = (2*pi)^(d/2) * {1 if d even, sqrt(2/pi) if d odd}
                  * (alpha-1)!! / (|alpha|+d-2)!!

    For d = 1 the sphere S^0 = {-1, +1} carries counting measure of total
    mass 2, so w_(j) = 2 if j is even and 0 otherwise.
    """
    alpha = validate_multi_index(alpha)
    d = len(alpha)
    if not is_even(alpha):
        return ExactValue(Fraction(0))
    n = order(alpha)
    num = multi_double_factorial_minus_one(alpha)
    den = double_factorial(n + d - 2)
    if d % 2 == 0:
        pref = ExactValue(Fraction(2) ** (d // 2), pi_half=d)
    else:
        pref = ExactValue(Fraction(2) ** ((d + 1) // 2), pi_half=d - 1)
    return pref * Fraction(num, den)


def sphere_moment_float(alpha: Sequence[int]) -> float:
    return float(sphere_moment(validate_multi_index(alpha)))


def sphere_surface_area(d: int) -> ExactValue:
    return sphere_moment((0,) * d)


def gen_binomial(x, r: int):
    """Generalized binomial coefficient: x(x-1)...(x-r+1) / r!.

    Exact for int/Fraction x; r = 0 gives 1.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    if isinstance(x, int):
        x = Fraction(x)
    num = Fraction(1) if isinstance(x, Fraction) else 1.0
    for i in range(r):
        num *= x - i
    return num / math.factorial(r)


# ---------------------------------------------------------------------------
# Angular quadrature on S^{d-1}
# ---------------------------------------------------------------------------

def sphere_rule(d: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes/weights for integrals over S^{d-1}.

    Returns ``(nodes, weights)`` with ``nodes`` of shape (M, d); the rule is
    exact for spherical polynomials of degree < n (d = 2, 3) and the weights
    sum to the surface area.  d = 1 returns the two-point counting rule on
    S^0 = {+1, -1}, which is exact for every integrand.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 2:
        theta = 2.0 * np.pi * np.arange(n) / n
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return nodes, np.full(n, 2.0 * np.pi / n)
    if d == 3:
        t, wt = leggauss(n)
        phi = 2.0 * np.pi * np.arange(2 * n) / (2 * n)
        s = np.sqrt(1.0 - t**2)
        nodes = np.empty((n * 2 * n, 3))
        nodes[:, 0] = np.repeat(t, 2 * n)
        nodes[:, 1] = np.repeat(s, 2 * n) * np.tile(np.cos(phi), n)
        nodes[:, 2] = np.repeat(s, 2 * n) * np.tile(np.sin(phi), n)
        weights = np.repeat(wt, 2 * n) * (2.0 * np.pi / (2 * n))
        return nodes, weights
    # d >= 4: split Omega = (t, sqrt(1-t^2) * Omega'), weight (1-t^2)^((d-3)/2)
    from scipy.special import roots_jacobi

    a = (d - 3) / 2.0
    t, wt = roots_jacobi(n, a, a)
    sub_nodes, sub_w = sphere_rule(d - 1, n)
    s = np.sqrt(1.0 - t**2)
    m_sub = len(sub_w)
    nodes = np.empty((n * m_sub, d))
    nodes[:, 0] = np.repeat(t, m_sub)
    nodes[:, 1:] = np.repeat(s, m_sub)[:, None] * np.tile(sub_nodes, (n, 1))
    weights = np.repeat(wt, m_sub) * np.tile(sub_w, n)
    return nodes, weights


def sphere_rule_levels(d: int) -> Iterator[int]:
    """Resolution ladder used for node-doubling convergence checks."""
    if d == 1:
        yield 1
        return
    n = 16 if d >= 3 else 32
    for _ in range(6):
        yield n
        n *= 2
