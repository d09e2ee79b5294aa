"""Exact scalar arithmetic for expansion coefficients.

Closed-form expansion coefficients are rational multiples of sqrt(r) * pi^(p/2)
for a positive rational r and integer p (e.g. (2*pi)^(d/2), sqrt(2*pi), 4*pi/3,
plain rationals).  :class:`ExactValue` keeps that structure so golden values can
be compared exactly; conversion to ``float`` happens once, at the accessor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Number = Union[int, Fraction, float]

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def _split_square(n: int) -> tuple[int, int]:
    """Best-effort factorization n = s^2 * m; returns (s, m)."""
    s = 1
    for p in _SMALL_PRIMES:
        pp = p * p
        while n % pp == 0:
            n //= pp
            s *= p
    r = math.isqrt(n)
    if r * r == n:
        return s * r, 1
    return s, n


def _reduce_root(rat: Fraction, root: Fraction) -> tuple[Fraction, Fraction]:
    """Pull perfect-square factors of the radicand into the rational part."""
    sn, mn = _split_square(root.numerator)
    sd, md = _split_square(root.denominator)
    return rat * Fraction(sn, sd), Fraction(mn, md)


@dataclass(frozen=True)
class ExactValue:
    """The number ``rat * sqrt(root) * pi**(pi_half / 2)``.

    ``root`` is a positive rational; ``pi_half`` counts half-powers of pi.
    Multiplication and division are closed; addition requires both operands to
    share the same irrational part and raises :class:`ValueError` otherwise
    (callers fall back to floating point).
    """

    rat: Fraction
    root: Fraction = Fraction(1)
    pi_half: int = 0

    def __post_init__(self):
        rat = Fraction(self.rat)
        root = Fraction(self.root)
        if root <= 0:
            raise ValueError("radicand must be positive")
        if rat == 0:
            rat, root, pi_half = Fraction(0), Fraction(1), 0
        else:
            rat, root = _reduce_root(rat, root)
            pi_half = self.pi_half
        object.__setattr__(self, "rat", rat)
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "pi_half", pi_half)

    # -- constructors ------------------------------------------------------
    @classmethod
    def of(cls, x: Number) -> "ExactValue":
        if isinstance(x, ExactValue):
            return x
        if isinstance(x, float):
            raise TypeError("ExactValue.of expects an exact number")
        return cls(Fraction(x))

    @classmethod
    def sqrt(cls, x: Number) -> "ExactValue":
        x = Fraction(x)
        if x <= 0:
            raise ValueError("sqrt of non-positive rational")
        return cls(Fraction(1), root=x)

    @classmethod
    def pi_power_half(cls, pi_half: int, rat: Number = 1) -> "ExactValue":
        return cls(Fraction(rat), pi_half=pi_half)

    @classmethod
    def two_pi_pow_half(cls, d: int) -> "ExactValue":
        """(2*pi)**(d/2) for integer d >= 0."""
        j, rem = divmod(d, 2)
        return cls(Fraction(2) ** j, root=Fraction(2) if rem else Fraction(1), pi_half=d)

    # -- predicates --------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.root == 1 and self.pi_half == 0

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is not rational")
        return self.rat

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other) -> "ExactValue":
        if isinstance(other, ExactValue):
            return other
        if isinstance(other, (int, Fraction)):
            return ExactValue(Fraction(other))
        return NotImplemented  # type: ignore[return-value]

    def __mul__(self, other):
        if isinstance(other, float):
            return float(self) * other
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return ExactValue(self.rat * o.rat, self.root * o.root if self.rat * o.rat != 0 else Fraction(1),
                          self.pi_half + o.pi_half if self.rat * o.rat != 0 else 0)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, float):
            return float(self) / other
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o.rat == 0:
            raise ZeroDivisionError
        return ExactValue(self.rat / o.rat / o.root, self.root * o.root, self.pi_half - o.pi_half)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o / self

    def __neg__(self):
        return ExactValue(-self.rat, self.root, self.pi_half)

    def __add__(self, other):
        if isinstance(other, float):
            return float(self) + other
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if self.rat == 0:
            return o
        if o.rat == 0:
            return self
        if self.pi_half != o.pi_half:
            raise ValueError("cannot add exact values with different pi powers")
        ratio = o.root / self.root
        rn = math.isqrt(ratio.numerator)
        rd = math.isqrt(ratio.denominator)
        if rn * rn != ratio.numerator or rd * rd != ratio.denominator:
            raise ValueError("cannot add exact values with incompatible radicands")
        return ExactValue(self.rat + o.rat * Fraction(rn, rd), self.root, self.pi_half)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return float(self) - other if isinstance(other, float) else NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    # -- comparisons / conversion -------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExactValue(Fraction(other))
        if not isinstance(other, ExactValue):
            return NotImplemented
        if self.rat == 0 and other.rat == 0:
            return True
        return (
            self.pi_half == other.pi_half
            and (self.rat > 0) == (other.rat > 0)
            and self.rat * self.rat * self.root == other.rat * other.rat * other.root
        )

    def __hash__(self):
        if self.rat == 0:
            return hash(0)
        sign = 1 if self.rat > 0 else -1
        return hash((sign, self.rat * self.rat * self.root, self.pi_half))

    def __float__(self) -> float:
        return float(self.rat) * math.sqrt(float(self.root)) * math.pi ** (self.pi_half / 2.0)

    def __bool__(self) -> bool:
        return self.rat != 0

    def __str__(self) -> str:
        if self.rat == 0:
            return "0"
        parts = []
        inside = self.root
        pi_int, pi_odd = divmod(self.pi_half, 2)
        if pi_odd and self.pi_half < 0:
            # keep the radicand rational: push the stray pi**(-1/2) as 1/sqrt(pi)
            pi_int += 1
            parts_tail = "/sqrt(pi)"
        else:
            parts_tail = ""
        if self.rat != 1 or (inside == 1 and not pi_odd and pi_int == 0):
            parts.append(str(self.rat))
        if pi_odd and self.pi_half > 0:
            if inside == 1:
                parts.append("sqrt(pi)")
            else:
                parts.append(f"sqrt({inside}*pi)")
        elif inside != 1:
            parts.append(f"sqrt({inside})")
        if pi_int == 1:
            parts.append("pi")
        elif pi_int != 0:
            parts.append(f"pi**{pi_int}")
        return "*".join(parts) + parts_tail

    def __repr__(self) -> str:
        return f"ExactValue({self.rat!r}, root={self.root!r}, pi_half={self.pi_half})"


ZERO = ExactValue(Fraction(0))


def _int_nth_root(n: int, k: int) -> int | None:
    if n < 0:
        return None
    r = round(n ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


def fraction_nth_root(x: Fraction, k: int) -> Fraction | None:
    """Exact k-th root of a positive rational, or None."""
    rn = _int_nth_root(x.numerator, k)
    rd = _int_nth_root(x.denominator, k)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd)


def rational_pow(base: Fraction, exp: Fraction) -> ExactValue | float:
    """base**exp, exactly when the result lives in Q(sqrt(Q)); float otherwise."""
    base = Fraction(base)
    exp = Fraction(exp)
    if base <= 0:
        raise ValueError("rational_pow requires a positive base")
    if exp.denominator == 1:
        return ExactValue(base**exp.numerator)
    if exp.denominator == 2:
        j, rem = divmod(exp.numerator, 2)
        return ExactValue(base**j, root=base if rem else Fraction(1))
    root = fraction_nth_root(base, exp.denominator)
    if root is not None:
        return ExactValue(root**exp.numerator)
    return float(base) ** float(exp)


def double_factorial(n: int) -> int:
    """n!! with (-1)!! = 0!! = 1."""
    if n < -1:
        raise ValueError("double factorial undefined below -1")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def gamma_exact(x: Fraction) -> ExactValue | None:
    """Gamma(x) for positive integer and half-integer x; None otherwise."""
    x = Fraction(x)
    if x <= 0:
        return None
    if x.denominator == 1:
        return ExactValue(Fraction(math.factorial(x.numerator - 1)))
    if x.denominator == 2:
        m = (x.numerator - 1) // 2  # x = m + 1/2
        return ExactValue(Fraction(double_factorial(2 * m - 1), 2**m), pi_half=1)
    return None


def gamma_value(x: Number) -> ExactValue | float:
    """Gamma(x): exact for (half-)integers, platform gamma otherwise."""
    if isinstance(x, (int, Fraction)):
        g = gamma_exact(Fraction(x))
        if g is not None:
            return g
        return math.gamma(float(x))
    return math.gamma(x)


def to_float(x) -> float:
    if isinstance(x, ExactValue):
        return float(x)
    return float(x)


def exact_sum(terms) -> ExactValue | float:
    """Sum a sequence of ExactValue/Fraction/float terms.

    Stays exact when every term is exact and the radicands merge; otherwise
    falls back to compensated floating summation (math.fsum) over the terms in
    their given order.
    """
    terms = list(terms)
    if not terms:
        return ZERO
    acc: ExactValue | None = ZERO
    for t in terms:
        if isinstance(t, float) or acc is None:
            acc = None
            break
        try:
            acc = acc + (t if isinstance(t, ExactValue) else ExactValue(Fraction(t)))
        except ValueError:
            acc = None
            break
    if acc is not None:
        return acc
    return math.fsum(to_float(t) for t in terms)
