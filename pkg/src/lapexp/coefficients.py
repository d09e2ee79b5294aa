"""Assembly of Laplace-type expansion coefficients zeta_j.

The asymptotic expansion is

    integral over R of exp(-k f) g  ~  sum_j zeta_j * k**(-(j+lambda)/nu)

where near the minimum f ~ rho**nu (f_0(Omega) + f_1(Omega) rho + ...) and
g ~ rho**(lambda-d) (g_0(Omega) + ...).  Five pathways compute the zeta_j,
from fully general (angular quadrature of the closed-form integrand) to fully
explicit (Taylor data of a nondegenerate minimum, no quadrature at all); on
shared inputs they agree, which the test suite exploits heavily.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import AccuracyError, HypothesisViolationError, PathwayMismatchError
from .exact import ExactValue, double_factorial, exact_sum, gamma_value, rational_pow, to_float
from .multiindex import (
    enumerate_multi_indices,
    gen_binomial,
    is_even,
    multi_double_factorial_minus_one,
    sphere_rule,
    sphere_rule_levels,
)
from .series import bell_values
from .taylor import (
    RadialCoeffs,
    TaylorPoly,
    hessian_normalize,
    integrate_poly_sphere,
    layer_as_poly,
    layer_constant_value,
    radialize,
    substitute_linear,
)

PATHWAYS = ("general", "f0-const", "taylor", "nondegenerate", "one-dim")


def _as_param(x):
    return x if isinstance(x, float) else Fraction(x)


@dataclass(frozen=True)
class ExpansionParams:
    """Shape parameters of the expansion: dimension, leading exponent nu of f,
    amplitude exponent lambda of g, and truncation order N."""

    dim: int
    nu: object
    lam: object
    order: int

    def __post_init__(self):
        object.__setattr__(self, "nu", _as_param(self.nu))
        object.__setattr__(self, "lam", _as_param(self.lam))
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if to_float(self.nu) <= 0:
            raise HypothesisViolationError("nu must be positive")
        if to_float(self.lam) <= 0:
            raise HypothesisViolationError("lambda must be positive")
        if self.order < 0:
            raise ValueError("order must be >= 0")

    def power(self, j: int):
        """Exponent p with term zeta_j * k**(-p)."""
        if isinstance(self.nu, float) or isinstance(self.lam, float):
            return (j + to_float(self.lam)) / to_float(self.nu)
        return (Fraction(j) + self.lam) / self.nu


@dataclass(frozen=True)
class ExpansionTerm:
    j: int
    power: object  # Fraction or float
    zeta: object  # ExactValue or float

    @property
    def exact(self) -> bool:
        return isinstance(self.zeta, ExactValue)

    @property
    def zeta_float(self) -> float:
        return to_float(self.zeta)

    @property
    def power_float(self) -> float:
        return to_float(self.power)


@dataclass
class Expansion:
    """Computed expansion: ordered (power, zeta) pairs plus provenance."""

    params: ExpansionParams
    terms: tuple
    pathway: str
    remainder_exponent: object
    det_hessian: object | None = None
    transform: tuple | None = None
    quadrature_nodes: int | None = None

    def __post_init__(self):
        self.terms = tuple(self.terms)
        if self.pathway not in PATHWAYS:
            raise ValueError(f"unknown pathway {self.pathway!r}")
        powers = [t.power_float for t in self.terms]
        if any(b <= a for a, b in zip(powers, powers[1:])):
            raise ValueError("term powers must increase strictly")

    def zeta(self, j: int):
        for t in self.terms:
            if t.j == j:
                return t.zeta
        return Fraction(0)

    def partial_sum(self, k: float, n_terms: int | None = None) -> float:
        use = self.terms if n_terms is None else self.terms[:n_terms]
        return math.fsum(t.zeta_float * k ** (-t.power_float) for t in use)

    # -- serialization -------------------------------------------------------
    def to_json_obj(self) -> dict:
        def num(x):
            return str(x) if isinstance(x, Fraction) else float(x)

        terms = []
        for t in self.terms:
            entry = {
                "j": t.j,
                "power": num(t.power),
                "zeta": str(t.zeta) if t.exact else float(t.zeta),
                "zeta_float": t.zeta_float,
                "exact": t.exact,
            }
            if t.exact:
                entry["zeta_exact"] = {
                    "rat": str(t.zeta.rat),
                    "root": str(t.zeta.root),
                    "pi_half": t.zeta.pi_half,
                }
            terms.append(entry)
        out = {
            "dim": self.params.dim,
            "nu": num(self.params.nu),
            "lambda": num(self.params.lam),
            "order": self.params.order,
            "pathway": self.pathway,
            "remainder_exponent": num(self.remainder_exponent),
            "terms": terms,
        }
        if self.det_hessian is not None:
            out["det_hessian"] = num(self.det_hessian)
        if self.transform is not None:
            out["transform"] = [[num(x) for x in row] for row in self.transform]
        if self.quadrature_nodes is not None:
            out["quadrature_nodes"] = self.quadrature_nodes
        return out

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Expansion":
        from .taylor import parse_number

        params = ExpansionParams(
            dim=int(obj["dim"]),
            nu=parse_number(obj["nu"]),
            lam=parse_number(obj["lambda"]),
            order=int(obj["order"]),
        )
        terms = []
        for entry in obj["terms"]:
            if entry.get("exact") and "zeta_exact" in entry:
                ze = entry["zeta_exact"]
                zeta = ExactValue(Fraction(ze["rat"]), root=Fraction(ze["root"]),
                                  pi_half=int(ze["pi_half"]))
            else:
                zeta = float(entry["zeta_float"])
            terms.append(ExpansionTerm(int(entry["j"]), parse_number(entry["power"]), zeta))
        det = obj.get("det_hessian")
        transform = obj.get("transform")
        return cls(
            params=params,
            terms=tuple(terms),
            pathway=obj["pathway"],
            remainder_exponent=parse_number(obj["remainder_exponent"]),
            det_hessian=parse_number(det) if det is not None else None,
            transform=tuple(tuple(parse_number(x) for x in row) for row in transform)
            if transform is not None else None,
            quadrature_nodes=obj.get("quadrature_nodes"),
        )


def compositions(m: int, r: int) -> Iterator[tuple[int, ...]]:
    """Ordered tuples of r positive integers summing to m."""
    if r == 0:
        if m == 0:
            yield ()
        return
    for first in range(1, m - r + 2):
        for rest in compositions(m - first, r - 1):
            yield (first,) + rest


def _mul(*values):
    """Product keeping exactness while every factor is exact."""
    out: ExactValue | float = ExactValue(Fraction(1))
    for v in values:
        if isinstance(out, float) or isinstance(v, float):
            out = to_float(out) * to_float(v)
        elif isinstance(v, ExactValue):
            out = out * v
        else:
            out = out * Fraction(v)
    return out


def _check_matching(f: RadialCoeffs, g: RadialCoeffs, params: ExpansionParams | None):
    if f.dim != g.dim:
        raise ValueError("f and g disagree on dimension")
    if f.order != g.order:
        raise ValueError("f and g must be truncated at the same order")
    d = f.dim
    nu = f.offset
    lam = g.offset + d
    n = f.order
    if params is not None:
        if params.dim != d or params.order > n:
            raise ValueError("params inconsistent with radial data")
        nu, lam, n = params.nu, params.lam, params.order
        if to_float(nu) != to_float(f.offset) or to_float(lam) != to_float(g.offset) + d:
            raise ValueError("params exponents inconsistent with radial data")
    return ExpansionParams(d, nu, lam, n)


# ---------------------------------------------------------------------------
# General pathway: angular quadrature of the closed-form integrand
# ---------------------------------------------------------------------------

def general_coeffs(f: RadialCoeffs, g: RadialCoeffs,
                   params: ExpansionParams | None = None, *,
                   rtol: float = 1e-10) -> Expansion:
    """zeta_j by numerical integration over the sphere.

    For each j,

        zeta_j = Gamma((j+lam)/nu)/nu * integral over S^{d-1} of
                 f0^(-(j+lam)/nu) * sum_m g_{j-m} * sum_r C(-(j+lam)/nu, r) f_m^(r) / f0^r

    with the m = 0 inner sum equal to 1.  The Bell values f_m^(r)(Omega) are
    built pointwise at the quadrature nodes, so layers may be arbitrary
    sampled functions.  Nodes are doubled until the coefficient vector is
    stable to ``rtol``; failure to converge raises :class:`AccuracyError`.
    """
    p = _check_matching(f, g, params)
    d, n = p.dim, p.order

    def compute(level: int) -> list[float]:
        nodes, w = sphere_rule(d, level)
        f0 = f.layer_values(0, nodes)
        if np.min(f0) <= 0.0:
            raise HypothesisViolationError(
                "hypothesis f0(Omega) > 0 violated at a quadrature node "
                f"(min {np.min(f0):.3e})")
        fv = [f.layer_values(j, nodes) for j in range(1, n + 1)]
        gv = [g.layer_values(j, nodes) for j in range(n + 1)]
        table = bell_values(fv, n) if n >= 1 else {}
        out = []
        for j in range(n + 1):
            s = to_float(p.power(j))
            eta = gv[j].astype(float).copy()
            for m in range(1, j + 1):
                inner = np.zeros_like(eta)
                for r in range(1, m + 1):
                    inner += to_float(gen_binomial(-p.power(j), r)) * table[(m, r)] / f0**r
                eta += gv[j - m] * inner
            eta *= f0 ** (-s)
            out.append(to_float(gamma_value(p.power(j))) / to_float(p.nu) * float(np.dot(w, eta)))
        return out

    zetas, nodes_used = _converged_quadrature(compute, d, rtol)
    terms = tuple(ExpansionTerm(j, p.power(j), zetas[j]) for j in range(n + 1))
    return Expansion(p, terms, "general", _remainder_little_o(p),
                     quadrature_nodes=nodes_used)


def _converged_quadrature(compute, d: int, rtol: float):
    prev: list[float] | None = None
    last_level = None
    for level in sphere_rule_levels(d):
        cur = compute(level)
        last_level = level
        if d == 1:
            return cur, 2  # two-point rule on S^0 is exact
        if prev is not None:
            scale = max(max((abs(z) for z in cur), default=0.0), 1e-30)
            if all(abs(a - b) <= rtol * scale for a, b in zip(prev, cur)):
                return cur, level
        prev = cur
    raise AccuracyError(
        f"angular quadrature did not converge to rtol={rtol} by level {last_level}",
        best=prev)


def _remainder_little_o(p: ExpansionParams):
    if isinstance(p.nu, float) or isinstance(p.lam, float):
        return (p.order + to_float(p.lam)) / to_float(p.nu)
    return (Fraction(p.order) + p.lam) / p.nu


# ---------------------------------------------------------------------------
# Constant-f0 pathway
# ---------------------------------------------------------------------------

def f0const_coeffs(f: RadialCoeffs, g: RadialCoeffs,
                   params: ExpansionParams | None = None, *,
                   rtol: float = 1e-10) -> Expansion:
    """zeta_j with the leading radial coefficient constant, factored out:

        zeta_j = Gamma((j+lam)/nu)/nu * f0^(-(j+lam)/nu) *
                 sum_m sum_r C(-(j+lam)/nu, r) f0^(-r) * integral(g_{j-m} f_m^(r))

    Polynomial layers are integrated exactly through monomial moments (the
    result is exact for rational data); sampled layers fall back to the same
    node-doubling quadrature as the general pathway.
    """
    p = _check_matching(f, g, params)
    d, n = p.dim, p.order
    f0 = f.leading_constant()
    if f0 is None:
        raise PathwayMismatchError(
            "constant-f0 pathway requires the leading radial coefficient to be constant")
    if to_float(f0) <= 0:
        raise HypothesisViolationError("hypothesis f0 > 0 violated")

    exact_route = (f.is_polynomial() and g.is_polynomial()
                   and not isinstance(p.nu, float) and not isinstance(p.lam, float))
    if exact_route:
        f_polys = [layer_as_poly(l, d) for l in f.layers[: n + 1]]
        g_polys = [layer_as_poly(l, d) for l in g.layers[: n + 1]]
        table = bell_values(f_polys[1:], n) if n >= 1 else {}
        f0x = f0 if isinstance(f0, float) else Fraction(f0)
        zetas = []
        for j in range(n + 1):
            s = p.power(j)
            parts = [integrate_poly_sphere(g_polys[j])]
            for m in range(1, j + 1):
                for r in range(1, m + 1):
                    c = gen_binomial(-s, r) * f0x ** (-r)
                    parts.append(_mul(c, integrate_poly_sphere(g_polys[j - m] * table[(m, r)])))
            total = exact_sum(parts)
            f0pow = (rational_pow(f0x, -s) if not isinstance(f0x, float)
                     else f0x ** -to_float(s))
            zetas.append(_mul(gamma_value(s), f0pow, total) / p.nu)
        terms = tuple(ExpansionTerm(j, p.power(j), zetas[j]) for j in range(n + 1))
        return Expansion(p, terms, "f0-const", _remainder_little_o(p))

    def compute(level: int) -> list[float]:
        nodes, w = sphere_rule(d, level)
        fv = [f.layer_values(j, nodes) for j in range(1, n + 1)]
        gv = [g.layer_values(j, nodes) for j in range(n + 1)]
        table = bell_values(fv, n) if n >= 1 else {}
        f0f = to_float(f0)
        out = []
        for j in range(n + 1):
            s = to_float(p.power(j))
            acc = float(np.dot(w, gv[j]))
            for m in range(1, j + 1):
                for r in range(1, m + 1):
                    c = to_float(gen_binomial(-p.power(j), r)) * f0f ** (-r)
                    acc += c * float(np.dot(w, gv[j - m] * table[(m, r)]))
            out.append(to_float(gamma_value(p.power(j))) / to_float(p.nu) * f0f ** (-s) * acc)
        return out

    zetas, nodes_used = _converged_quadrature(compute, d, rtol)
    terms = tuple(ExpansionTerm(j, p.power(j), zetas[j]) for j in range(n + 1))
    return Expansion(p, terms, "f0-const", _remainder_little_o(p),
                     quadrature_nodes=nodes_used)


# ---------------------------------------------------------------------------
# Taylor closed form (constant f0, even nu, lambda = d)
# ---------------------------------------------------------------------------

def _coeffs_by_order(poly: TaylorPoly, lo: int, hi: int) -> dict[int, list]:
    out: dict[int, list] = {k: [] for k in range(lo, hi + 1)}
    for alpha in sorted(poly.terms, key=lambda a: (sum(a), tuple(-x for x in a))):
        k = sum(alpha)
        if lo <= k <= hi:
            out[k].append((alpha, poly.terms[alpha]))
    return out


def _require_data_order(poly: TaylorPoly, needed: int, what: str):
    if poly.order is not None and poly.order < needed:
        raise HypothesisViolationError(
            f"{what} Taylor data truncated at order {poly.order}, need {needed}")


def taylor_coeffs(f: TaylorPoly, g: TaylorPoly, params: ExpansionParams) -> Expansion:
    """Closed-form zeta_j from Taylor coefficients, no quadrature.

    Requires lambda = d, even integer nu >= 2, and the order-nu layer of f
    constant on the sphere (value f0 > 0).  Writing c_alpha for the monomial
    coefficients (c_alpha = D^alpha f(0)/alpha!),

        zeta_j = Gamma((d+j)/nu)/nu * f0^(-(j+d)/nu) * sum_{m,r} C(-(d+j)/nu, r) f0^(-r)
                 * sum_{|beta|=j-m} sum_{n_1+...+n_r=m} sum_{|alpha_i|=n_i+nu}
                   w_{beta+alpha_1+...+alpha_r} * c_beta^g * prod_i c_{alpha_i}^f

    where w is the sphere monomial moment.  Coefficients with odd j vanish
    identically (every moment index has odd total order).  Exact for rational
    input data; the error term is O(k^(-(N+d+1)/nu)).
    """
    d = f.dim
    if g.dim != d:
        raise ValueError("f and g disagree on dimension")
    if to_float(params.lam) != d:
        raise PathwayMismatchError("Taylor pathway requires lambda = d")
    nu_f = to_float(params.nu)
    if nu_f != int(nu_f) or int(nu_f) % 2 or int(nu_f) < 2:
        raise PathwayMismatchError("Taylor pathway requires even integer nu >= 2")
    nu = int(nu_f)
    n = params.order
    if f.is_zero() or f.min_order() < nu:
        raise HypothesisViolationError(
            f"f must vanish to order {nu} at the origin")
    f0 = layer_constant_value(f.homogeneous_layer(nu), d)
    if f0 is None:
        raise PathwayMismatchError(
            "order-nu layer of f is not constant on the sphere; "
            "normalize the quadratic form first or use the general pathway")
    if to_float(f0) <= 0:
        raise HypothesisViolationError("hypothesis f0 > 0 violated")
    _require_data_order(f, n + nu, "f")
    _require_data_order(g, n, "g")

    cf = _coeffs_by_order(f, nu + 1, n + nu)
    cg = _coeffs_by_order(g, 0, n)
    f0x = f0 if isinstance(f0, float) else Fraction(f0)

    zeros = (0,) * d
    zetas = []
    for j in range(n + 1):
        s = Fraction(d + j, nu)
        parts = []
        for beta, cb in cg[j]:
            w = _moment(beta)
            if w.rat != 0:
                parts.append(_mul(w, cb))
        for m in range(1, j + 1):
            for r in range(1, m + 1):
                cr = gen_binomial(-s, r) * (f0x ** (-r) if not isinstance(f0x, float)
                                            else to_float(f0x) ** (-r))
                for beta, cb in cg[j - m]:
                    for ns in compositions(m, r):
                        _accumulate_moment_terms(parts, beta, cb, ns, nu, cf, cr, zeros)
        total = exact_sum(parts)
        f0pow = (rational_pow(f0x, -s) if not isinstance(f0x, float)
                 else to_float(f0x) ** float(-s))
        zetas.append(_mul(gamma_value(s), f0pow, total) / Fraction(nu))
    terms = tuple(ExpansionTerm(j, params.power(j), zetas[j]) for j in range(n + 1))
    remainder = Fraction(n + d + 1, nu)
    return Expansion(params, terms, "taylor", remainder)


def _moment(alpha):
    from .multiindex import sphere_moment

    return sphere_moment(alpha)


def _accumulate_moment_terms(parts, beta, cb, ns, nu, cf, cr, zeros):
    """Append cr * w_gamma * cb * prod(cf) over all alpha tuples for one composition."""
    stack = [(beta, cb, 0)]
    r = len(ns)
    while stack:
        gamma, prod, i = stack.pop()
        if i == r:
            w = _moment(gamma)
            if w.rat != 0:
                parts.append(_mul(w, cr, prod))
            continue
        for alpha, ca in cf[ns[i] + nu]:
            stack.append((tuple(x + y for x, y in zip(gamma, alpha)), prod * ca, i + 1))


# ---------------------------------------------------------------------------
# Nondegenerate-minimum pathway (normalize, then explicit combinatorial sum)
# ---------------------------------------------------------------------------

def nondegenerate_coeffs(f: TaylorPoly, g: TaylorPoly, order: int) -> Expansion:
    """Even-index coefficients for a nondegenerate minimum of f at the origin.

    Normalizes the quadratic form (y = P x with P = sqrt(D) Q) and evaluates,
    with derivatives taken in y-coordinates and c_alpha the monomial
    coefficients of the transformed polynomials,

        zeta_2j = (2 pi)^(d/2) / sqrt(det H) * sum_{m=0}^{2j} sum_{r=1}^{m} (-1)^r / r!
                  * sum_{|beta|=2j-m} sum_{n_1+..+n_r=m} sum_{|alpha_i|=n_i+2}
                    even(gamma) (gamma - 1)!! * c_beta^g * prod_i c_{alpha_i}^f

    with gamma = beta + alpha_1 + ... + alpha_r and the m = 0 sum collapsing to
    sum_{|beta|=2j} even(beta) (beta-1)!! c_beta^g.  Only even-index terms are
    returned (odd ones vanish identically); the error term is
    O(k^(-((N+d)/2 - 1))).
    """
    d = f.dim
    if g.dim != d:
        raise ValueError("f and g disagree on dimension")
    if order < 0:
        raise ValueError("order must be >= 0")
    _require_data_order(f, order + 2, "f")
    _require_data_order(g, order, "g")
    decomp, f_t, p_inv = hessian_normalize(f)
    g_t = substitute_linear(g, p_inv)
    pref = _mul(ExactValue.two_pi_pow_half(d), decomp.det_sqrt_inverse())

    cf = _coeffs_by_order(f_t, 3, order + 2)
    cg = _coeffs_by_order(g_t, 0, order)
    params = ExpansionParams(d, 2, d, order)
    terms = []
    for twoj in range(0, order + 1, 2):
        parts = []
        for beta, cb in cg[twoj]:
            if is_even(beta):
                parts.append(_mul(Fraction(multi_double_factorial_minus_one(beta)), cb))
        for m in range(1, twoj + 1):
            for r in range(1, m + 1):
                sign = Fraction((-1) ** r, math.factorial(r))
                for beta, cb in cg[twoj - m]:
                    for ns in compositions(m, r):
                        _accumulate_dfact_terms(parts, beta, cb, ns, cf, sign)
        s_val = exact_sum(parts)
        terms.append(ExpansionTerm(twoj, params.power(twoj), _mul(pref, s_val)))
    remainder = Fraction(order + d, 2) - 1
    return Expansion(params, tuple(terms), "nondegenerate", remainder,
                     det_hessian=decomp.det_hessian,
                     transform=tuple(tuple(row) for row in decomp.p_matrix()))


def _accumulate_dfact_terms(parts, beta, cb, ns, cf, sign):
    stack = [(beta, cb, 0)]
    r = len(ns)
    while stack:
        gamma, prod, i = stack.pop()
        if i == r:
            if is_even(gamma):
                parts.append(_mul(sign * multi_double_factorial_minus_one(gamma), prod))
            continue
        for alpha, ca in cf[ns[i] + 2]:
            stack.append((tuple(x + y for x, y in zip(gamma, alpha)), prod * ca, i + 1))


# ---------------------------------------------------------------------------
# One-dimensional closed form
# ---------------------------------------------------------------------------

def oned_coeffs(a: Sequence, b: Sequence, nu, order: int) -> Expansion:
    """Coefficients for d = 1 with f = x**nu (a0 + a1 x + ...), g = b0 + b1 x + ...:

        zeta_2j = (2/nu) Gamma((2j+1)/nu) a0^(-(2j+1)/nu)
                  * sum_m b_{2j-m} sum_r C(-(2j+1)/nu, r) a0^(-r) a_m^(r)

    Odd-index coefficients are exactly zero.  Exact for rational data.
    """
    nu = _as_param(nu)
    if to_float(nu) <= 0:
        raise HypothesisViolationError("nu must be positive")
    a = [c if isinstance(c, float) else Fraction(c) for c in a]
    b = [c if isinstance(c, float) else Fraction(c) for c in b]
    if not a:
        raise ValueError("need at least the leading coefficient a0")
    if to_float(a[0]) <= 0:
        raise HypothesisViolationError("hypothesis a0 > 0 violated")
    a = a + [Fraction(0)] * max(0, order + 1 - len(a))
    b = b + [Fraction(0)] * max(0, order + 1 - len(b))
    a0 = a[0]
    table = bell_values(a[1:], order) if order >= 1 else {}
    params = ExpansionParams(1, nu, 1, order)
    terms = []
    exact_nu = not isinstance(nu, float)
    for j in range(order + 1):
        if j % 2:
            terms.append(ExpansionTerm(j, params.power(j), ExactValue(Fraction(0))))
            continue
        s = params.power(j)
        inner = b[j]
        for m in range(1, j + 1):
            if b[j - m] == 0:
                continue
            acc = None
            for r in range(1, m + 1):
                t = gen_binomial(-s, r) * table[(m, r)] * (
                    a0 ** (-r) if not isinstance(a0, float) else to_float(a0) ** (-r))
                acc = t if acc is None else acc + t
            inner = inner + b[j - m] * acc
        a0pow = (rational_pow(a0, -s) if exact_nu and not isinstance(a0, float)
                 else to_float(a0) ** -to_float(s))
        zeta = _mul(Fraction(2), gamma_value(s), a0pow, inner) / nu
        terms.append(ExpansionTerm(j, s, zeta))
    return Expansion(params, tuple(terms), "one-dim", _remainder_little_o(params))


# ---------------------------------------------------------------------------
# Stirling series
# ---------------------------------------------------------------------------

def stirling_series(n_terms: int) -> list[Fraction]:
    """Exact coefficients s_j of  k! ~ k^k e^-k sqrt(2 pi k) * sum_j s_j k^-j.

    With a_i = 1/(i+2),

        s_j = sum_{r=0}^{2j} (-1)^r / r! * (2j+2r-1)!! * a_{2j}^(r) ,

    where a_m^(r) is the partial ordinary Bell value.  The r = 0 term is the
    empty product: it contributes only at j = 0, where it equals 1 (the
    leading Stirling coefficient).  First terms: 1, 1/12, 1/288, -139/51840.
    """
    if n_terms < 1:
        raise ValueError("need at least one term")
    out = [Fraction(1)]
    if n_terms == 1:
        return out
    m_max = 2 * (n_terms - 1)
    a = [Fraction(1, i + 2) for i in range(1, m_max + 1)]
    table = bell_values(a, m_max)
    for j in range(1, n_terms):
        s = Fraction(0)
        for r in range(1, 2 * j + 1):
            s += Fraction((-1) ** r, math.factorial(r)) * double_factorial(2 * j + 2 * r - 1) \
                * table[(2 * j, r)]
        out.append(s)
    return out


# ---------------------------------------------------------------------------
# Convenience: build radial layers and expansions straight from Taylor data
# ---------------------------------------------------------------------------

def radial_from_taylor(f: TaylorPoly, g: TaylorPoly, order: int):
    """Radialize Taylor data: returns (f_radial, g_radial, params) with nu the
    minimal order of f and lambda = d."""
    d = f.dim
    if f.is_zero() or f.constant_term() != 0:
        raise HypothesisViolationError("f must vanish at the origin")
    nu = f.min_order()
    fr = radialize(f, nu)
    gr = radialize(g, 0)
    # align truncation orders
    f_layers = list(fr.layers[: order + 1])
    g_layers = list(gr.layers[: order + 1])
    f_layers += [Fraction(0)] * (order + 1 - len(f_layers))
    g_layers += [Fraction(0)] * (order + 1 - len(g_layers))
    _require_data_order(f, order + nu, "f")
    _require_data_order(g, order, "g")
    fr = RadialCoeffs(d, tuple(f_layers), Fraction(nu))
    gr = RadialCoeffs(d, tuple(g_layers), Fraction(0))
    params = ExpansionParams(d, nu, d, order)
    return fr, gr, params


def oned_from_taylor(f: TaylorPoly, g: TaylorPoly, order: int):
    """Extract scalar series (a, b, nu) from 1-D Taylor data."""
    if f.dim != 1 or g.dim != 1:
        raise ValueError("oned_from_taylor requires dimension 1")
    if f.is_zero() or f.constant_term() != 0:
        raise HypothesisViolationError("f must vanish at the origin")
    nu = f.min_order()
    a = [f.coeff((nu + j,)) for j in range(order + 1)]
    b = [g.coeff((j,)) for j in range(order + 1)]
    return a, b, nu
