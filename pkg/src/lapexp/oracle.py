"""Direct numerical evaluation of integral(exp(-k f) g) and empirical order checks.

This module is the ground truth the coefficient pathways are verified
against: it never touches the expansion machinery.  Box domains use
tensor-product Gauss-Legendre with node doubling; ball domains use a radial
Gauss-Jacobi rule (weight rho^(d-1)) crossed with the angular rule of
:mod:`lapexp.multiindex`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from .coefficients import Expansion
from .errors import AccuracyError, HypothesisViolationError
from .multiindex import sphere_rule
from .taylor import TaylorPoly

Evaluable = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Box:
    bounds: tuple  # ((lo, hi), ...) per axis

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", b)
        for lo, hi in b:
            if not lo < hi:
                raise ValueError("box bounds must satisfy lo < hi")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def contains_origin(self) -> bool:
        return all(lo < 0.0 < hi for lo, hi in self.bounds)

    def scaled(self, factor: float) -> "Box":
        return Box(tuple((lo * factor, hi * factor) for lo, hi in self.bounds))


@dataclass(frozen=True)
class Ball:
    dim: int
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    def contains_origin(self) -> bool:
        return True

    def scaled(self, factor: float) -> "Ball":
        return Ball(self.dim, self.radius * factor)


Domain = Box | Ball


@dataclass
class IntegrandSpec:
    """Evaluable integrand data: dimension, f, g, and the integration region.

    f must attain its minimum value 0 at the origin and stay positive
    elsewhere; this is spot-checked on a sample grid at construction.
    """

    dim: int
    f: Evaluable
    g: Evaluable
    domain: Domain

    def __post_init__(self):
        if isinstance(self.domain, Box) and self.domain.dim != self.dim:
            raise ValueError("domain dimension mismatch")
        if isinstance(self.domain, Ball) and self.domain.dim != self.dim:
            raise ValueError("domain dimension mismatch")
        if not self.domain.contains_origin():
            raise HypothesisViolationError("domain must contain the origin in its interior")
        f0 = float(np.asarray(self.f(np.zeros((1, self.dim))))[0])
        if abs(f0) > 1e-12:
            raise HypothesisViolationError(f"f(0) = {f0:.3e}, expected 0")
        pts = self._sample_grid()
        vals = np.asarray(self.f(pts), dtype=float)
        radii = np.linalg.norm(pts, axis=1)
        bad = vals[radii > 1e-9] <= 0.0
        if np.any(bad):
            raise HypothesisViolationError(
                "f must be positive away from the origin on the domain "
                f"({int(np.sum(bad))} sample points violate this)")

    def _sample_grid(self, per_axis: int = 9) -> np.ndarray:
        if isinstance(self.domain, Box):
            axes = [np.linspace(lo, hi, per_axis) for lo, hi in self.domain.bounds]
            grids = np.meshgrid(*axes, indexing="ij")
            return np.stack([g.ravel() for g in grids], axis=-1)
        nodes, _ = sphere_rule(self.dim, 8 if self.dim >= 3 else 16)
        radii = np.linspace(0.0, self.domain.radius, per_axis)[1:]
        return (radii[:, None, None] * nodes[None, :, :]).reshape(-1, self.dim)


@dataclass(frozen=True)
class IntegrateResult:
    value: float
    error: float
    nodes: int
    converged: bool

    def __float__(self):
        return self.value


_BOX_LEVELS = {1: (16, 32, 64, 128, 256, 512), 2: (16, 32, 64, 128), 3: (16, 32, 64, 128)}
_BALL_LEVELS = (8, 16, 32, 64, 128)


def _box_rule(bounds, n: int):
    pts1, wts1 = [], []
    for lo, hi in bounds:
        x, w = leggauss(n)
        pts1.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        wts1.append(0.5 * (hi - lo) * w)
    grids = np.meshgrid(*pts1, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    w = wts1[0]
    for wi in wts1[1:]:
        w = np.multiply.outer(w, wi)
    return pts, w.ravel()


def _ball_rule(dim: int, radius: float, n: int):
    # rho = R (1+t)/2 turns the radial weight rho^(d-1) into (1+t)^(d-1)
    t, wt = roots_jacobi(n, 0.0, dim - 1.0)
    rho = radius * (t + 1.0) / 2.0
    wr = wt * (radius / 2.0) ** dim
    ang_nodes, ang_w = sphere_rule(dim, max(n, 8))
    pts = (rho[:, None, None] * ang_nodes[None, :, :]).reshape(-1, dim)
    w = (wr[:, None] * ang_w[None, :]).ravel()
    return pts, w


def integrate(spec: IntegrandSpec, k: float, *, rtol: float = 1e-12,
              levels: Sequence[int] | None = None) -> IntegrateResult:
    """Evaluate integral(exp(-k f) g) over the domain with node doubling.

    Stops when two successive refinements agree to ``rtol`` relative; the
    returned error is the last doubling delta.  Raises :class:`AccuracyError`
    (with the best value attached) when the node cap is reached without
    convergence.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    if levels is None:
        levels = _BOX_LEVELS.get(spec.dim, _BOX_LEVELS[3]) if isinstance(spec.domain, Box) \
            else _BALL_LEVELS

    def value(n: int) -> tuple[float, int]:
        if isinstance(spec.domain, Box):
            pts, w = _box_rule(spec.domain.bounds, n)
        else:
            pts, w = _ball_rule(spec.dim, spec.domain.radius, n)
        fv = np.asarray(spec.f(pts), dtype=float)
        gv = np.asarray(spec.g(pts), dtype=float)
        return float(np.sum(np.exp(-k * fv) * gv * w)), len(w)

    prev = None
    delta = math.inf
    nodes = 0
    for n in levels:
        cur, nodes = value(n)
        if prev is not None:
            delta = abs(cur - prev)
            if delta <= rtol * max(abs(cur), 1e-300):
                return IntegrateResult(cur, delta, nodes, True)
        prev = cur
    raise AccuracyError(
        f"quadrature did not converge at k={k} (last delta {delta:.3e})",
        best=prev, error=delta)


# ---------------------------------------------------------------------------
# Empirical order verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TermCheck:
    """Slope check for the residual after keeping terms up to index ``j``."""

    j: int
    target_exponent: float
    fitted_slope: float | None
    floor_limited: bool
    passed: bool


@dataclass
class QuadratureReport:
    k_values: tuple
    integrals: tuple
    errors: tuple
    residuals: dict = field(repr=False)  # j -> tuple of residuals
    checks: tuple = ()
    slope_tolerance: float = 0.25

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json_obj(self) -> dict:
        return {
            "k_values": list(self.k_values),
            "integrals": list(self.integrals),
            "quadrature_errors": list(self.errors),
            "residuals": {str(j): list(r) for j, r in sorted(self.residuals.items())},
            "slope_tolerance": self.slope_tolerance,
            "checks": [
                {
                    "level_j": c.j,
                    "target_exponent": c.target_exponent,
                    "fitted_slope": c.fitted_slope,
                    "floor_limited": c.floor_limited,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
            "passed": self.passed,
        }


def default_k_grid(k_min: float = 1e2, k_max: float = 1e5, points: int = 7) -> list[float]:
    """Geometric k grid; below ~1e2 higher-order terms pollute the slope fit,
    above ~1e5 residuals hit the double-precision quadrature floor."""
    if points < 5:
        raise ValueError("slope fits require at least 5 grid points")
    return list(np.geomspace(k_min, k_max, points))


def verify_order(spec: IntegrandSpec, expansion: Expansion,
                 k_values: Sequence[float] | None = None, *,
                 slope_tolerance: float = 0.25, threads: int = 1,
                 rtol: float = 1e-12) -> QuadratureReport:
    """Fit empirical decay rates of expansion residuals against the contract.

    For each truncation level (terms up to index j), the residual
    |I(k) - partial sum| should decay like the next retained power, or, at the
    last level, at least like the expansion's contractual remainder exponent.
    A least-squares slope on log-log data must not exceed the target by more
    than ``slope_tolerance``.  Residuals below 10x the quadrature error
    estimate are reported as floor-limited instead of fitted (the expansion is
    exact to working precision there).
    """
    ks = list(k_values) if k_values is not None else default_k_grid()
    if len(ks) < 5:
        raise ValueError("k grid must have at least 5 points")
    ks = sorted(float(k) for k in ks)

    def one(k: float):
        res = integrate(spec, k, rtol=rtol)
        return res.value, res.error

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, ks))
    else:
        results = [one(k) for k in ks]
    integrals = tuple(v for v, _ in results)
    errors = tuple(e for _, e in results)

    terms = expansion.terms
    residuals: dict[int, tuple] = {}
    checks = []
    log_k = np.log(np.asarray(ks))
    for lvl in range(len(terms)):
        partial = [expansion.partial_sum(k, lvl + 1) for k in ks]
        resid = tuple(abs(i - p) for i, p in zip(integrals, partial))
        residuals[terms[lvl].j] = resid
        if lvl + 1 < len(terms):
            target = terms[lvl + 1].power_float
        else:
            target = float(expansion.remainder_exponent)
        usable = [i for i, r in enumerate(resid)
                  if r > 10.0 * max(errors[i], 1e-300) and r > 0.0]
        if len(usable) < 5:
            checks.append(TermCheck(terms[lvl].j, target, None, True, True))
            continue
        slope = float(np.polyfit(log_k[usable], np.log(np.asarray(resid)[usable]), 1)[0])
        passed = slope <= -target + slope_tolerance
        checks.append(TermCheck(terms[lvl].j, target, slope, False, passed))
    return QuadratureReport(tuple(ks), integrals, errors, residuals, tuple(checks),
                            slope_tolerance)


# ---------------------------------------------------------------------------
# High-precision reference values (independent of the coefficient machinery)
# ---------------------------------------------------------------------------

def reference_log_factorial(k: float, dps: int = 40):
    """ln(k!) to `dps` significant digits via mpmath's loggamma."""
    with mpmath.workdps(dps):
        return mpmath.loggamma(mpmath.mpf(k) + 1)


def reference_factorial_integral(k: float, dps: int = 40) -> float:
    """Exact value of integral over (-1, inf) of exp(-k (x - ln(1+x))):
    k! * e^k / k^(k+1), via high-precision log-gamma."""
    with mpmath.workdps(dps):
        kk = mpmath.mpf(k)
        val = mpmath.e ** (mpmath.loggamma(kk + 1) + kk - (kk + 1) * mpmath.log(kk))
        return float(val)


# ---------------------------------------------------------------------------
# Built-in named integrands
# ---------------------------------------------------------------------------

@dataclass
class Builtin:
    """A named integrand with both evaluable callables and expansion data."""

    name: str
    dim: int
    f: Evaluable
    g: Evaluable
    domain: Domain
    taylor_f: object | None = None  # TaylorPoly, possibly truncated
    taylor_g: object | None = None

    def spec(self) -> IntegrandSpec:
        return IntegrandSpec(self.dim, self.f, self.g, self.domain)


def make_builtin(name: str, dim: int | None = None, order: int = 4,
                 params: dict | None = None) -> Builtin:
    """Construct a named integrand.

    Supported names: ``gaussian`` (any d), ``quartic`` (d=1, f = x^2/2 + c x^4),
    ``cubic2d`` (d=2, f = |x|^2/2 + c x1^3), ``logshift`` (d=1,
    f = x - ln(1+x) on (-0.99, 20)).
    """
    params = dict(params or {})
    if name == "gaussian":
        d = dim or 1
        half = Fraction(1, 2)
        tf = TaylorPoly(d, {tuple(2 if i == m else 0 for i in range(d)): half
                            for m in range(d)})
        tg = TaylorPoly(d, {(0,) * d: Fraction(1)})
        return Builtin(
            name, d,
            f=lambda X: 0.5 * np.sum(np.asarray(X, dtype=float) ** 2, axis=1),
            g=lambda X: np.ones(len(X)),
            domain=Box(tuple((-8.0, 8.0) for _ in range(d))),
            taylor_f=tf, taylor_g=tg)
    if name == "quartic":
        if dim not in (None, 1):
            raise ValueError("quartic is one-dimensional")
        raw = params.get("c", 1)
        c = raw if isinstance(raw, float) else Fraction(raw)
        cf = float(c)
        tf = TaylorPoly(1, {(2,): Fraction(1, 2), (4,): c})
        tg = TaylorPoly(1, {(0,): Fraction(1)})
        return Builtin(
            name, 1,
            f=lambda X: 0.5 * X[:, 0] ** 2 + cf * X[:, 0] ** 4,
            g=lambda X: np.ones(len(X)),
            domain=Box(((-6.0, 6.0),)),
            taylor_f=tf, taylor_g=tg)
    if name == "cubic2d":
        if dim not in (None, 2):
            raise ValueError("cubic2d is two-dimensional")
        raw = params.get("c", Fraction(1, 4))
        c = raw if isinstance(raw, float) else Fraction(raw)
        cf = float(c)
        if not abs(cf) < 0.5:
            raise ValueError("cubic2d needs |c| < 1/2 to keep f positive on the unit box")
        tf = TaylorPoly(2, {(2, 0): Fraction(1, 2), (0, 2): Fraction(1, 2), (3, 0): c})
        tg = TaylorPoly(2, {(0, 0): Fraction(1)})
        return Builtin(
            name, 2,
            f=lambda X: 0.5 * (X[:, 0] ** 2 + X[:, 1] ** 2) + cf * X[:, 0] ** 3,
            g=lambda X: np.ones(len(X)),
            domain=Box(((-1.0, 1.0), (-1.0, 1.0))),
            taylor_f=tf, taylor_g=tg)
    if name == "logshift":
        if dim not in (None, 1):
            raise ValueError("logshift is one-dimensional")
        tf = TaylorPoly(
            1,
            {(nn,): Fraction((-1) ** nn, nn) for nn in range(2, order + 3)},
            order=order + 2)
        tg = TaylorPoly(1, {(0,): Fraction(1)})
        return Builtin(
            name, 1,
            f=lambda X: X[:, 0] - np.log1p(X[:, 0]),
            g=lambda X: np.ones(len(X)),
            domain=Box(((-0.99, 20.0),)),
            taylor_f=tf, taylor_g=tg)
    raise ValueError(f"unknown builtin integrand {name!r}")
