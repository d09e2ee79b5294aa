"""Multivariate Taylor polynomials, linear substitution, and quadratic-form
normalization.

A :class:`TaylorPoly` stores monomial coefficients c_alpha = D^alpha h(0) /
alpha!, so the polynomial is ``sum_alpha c_alpha x**alpha``.  Coefficients are
``fractions.Fraction`` for exact data or ``float`` after an inexact transform.

``hessian_normalize`` realizes the linear change of variables y = P x with
P = sqrt(D) Q from the eigendecomposition H = Q^T D Q of the Hessian at the
minimum, after which the quadratic layer is |y|^2 / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np

from .errors import DegenerateMinimumError, HypothesisViolationError, InvalidMinimumError
from .exact import ExactValue, fraction_nth_root, to_float
from .multiindex import (
    MultiIndex,
    is_even,
    sphere_moment,
    sphere_rule,
    validate_multi_index,
)

Coeff = Union[Fraction, float]


def _coerce_coeff(c) -> Coeff:
    if isinstance(c, float):
        return c
    return Fraction(c)


@dataclass
class TaylorPoly:
    """Sparse polynomial ``sum c_alpha x**alpha`` in d variables.

    ``order`` is the truncation order of the underlying Taylor data: ``None``
    means the polynomial is exact (all omitted coefficients are zero), an int
    means coefficients above that total order are unknown.
    """

    dim: int
    terms: dict[MultiIndex, Coeff] = field(default_factory=dict)
    order: int | None = None

    def __post_init__(self):
        clean: dict[MultiIndex, Coeff] = {}
        for alpha, c in self.terms.items():
            alpha = validate_multi_index(alpha)
            if len(alpha) != self.dim:
                raise ValueError(f"multi-index {alpha} does not match dimension {self.dim}")
            c = _coerce_coeff(c)
            if c != 0:
                clean[alpha] = c
        self.terms = clean
        if self.order is not None and self.degree() > self.order:
            raise ValueError("terms exceed the declared truncation order")

    # -- basic queries -------------------------------------------------------
    def degree(self) -> int:
        return max((sum(a) for a in self.terms), default=0)

    def min_order(self) -> int:
        return min((sum(a) for a in self.terms), default=0)

    def coeff(self, alpha: Sequence[int]) -> Coeff:
        return self.terms.get(tuple(alpha), Fraction(0))

    def constant_term(self) -> Coeff:
        return self.terms.get((0,) * self.dim, Fraction(0))

    def gradient_at_zero(self) -> list[Coeff]:
        out = []
        for m in range(self.dim):
            e = tuple(1 if i == m else 0 for i in range(self.dim))
            out.append(self.terms.get(e, Fraction(0)))
        return out

    def homogeneous_layer(self, n: int) -> "TaylorPoly":
        return TaylorPoly(self.dim, {a: c for a, c in self.terms.items() if sum(a) == n})

    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.terms.values())

    def is_zero(self) -> bool:
        return not self.terms

    # -- ring operations -----------------------------------------------------
    def __add__(self, other: "TaylorPoly") -> "TaylorPoly":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        terms = dict(self.terms)
        for a, c in other.terms.items():
            terms[a] = terms.get(a, Fraction(0)) + c
        return TaylorPoly(self.dim, terms)

    def __mul__(self, other):
        if isinstance(other, TaylorPoly):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            terms: dict[MultiIndex, Coeff] = {}
            for a, ca in self.terms.items():
                for b, cb in other.terms.items():
                    g = tuple(x + y for x, y in zip(a, b))
                    terms[g] = terms.get(g, Fraction(0)) + ca * cb
            return TaylorPoly(self.dim, terms)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c) -> "TaylorPoly":
        c = _coerce_coeff(c)
        return TaylorPoly(self.dim, {a: v * c for a, v in self.terms.items()}, self.order)

    def power(self, k: int) -> "TaylorPoly":
        out = TaylorPoly(self.dim, {(0,) * self.dim: Fraction(1)})
        for _ in range(k):
            out = out * self
        return out

    # -- evaluation ----------------------------------------------------------
    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at points of shape (M, d)."""
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[None, :]
        out = np.zeros(points.shape[0])
        for a, c in self.terms.items():
            term = np.full(points.shape[0], float(c))
            for m, e in enumerate(a):
                if e:
                    term = term * points[:, m] ** e
            out += term
        return out

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.evaluate(points)

    # -- serialization ---------------------------------------------------------
    def to_json_terms(self) -> dict[str, str | float]:
        out: dict[str, str | float] = {}
        for a in sorted(self.terms, key=lambda a: (sum(a), tuple(-x for x in a))):
            c = self.terms[a]
            key = ",".join(str(x) for x in a)
            out[key] = str(c) if isinstance(c, Fraction) else float(c)
        return out

    @classmethod
    def from_json_terms(cls, dim: int, data: dict, order: int | None = None) -> "TaylorPoly":
        terms: dict[MultiIndex, Coeff] = {}
        for key, val in data.items():
            alpha = tuple(int(p) for p in str(key).split(","))
            if len(alpha) != dim:
                raise ValueError(f"exponent key '{key}' does not match dimension {dim}")
            terms[alpha] = parse_number(val)
        return cls(dim, terms, order)


def parse_number(val) -> Coeff:
    """Parse a JSON number: ints and 'p/q' strings exactly, floats inexactly."""
    if isinstance(val, bool):
        raise ValueError(f"not a number: {val!r}")
    if isinstance(val, int):
        return Fraction(val)
    if isinstance(val, float):
        return val
    if isinstance(val, str):
        s = val.strip()
        try:
            return Fraction(s)
        except ValueError:
            return float(s)
    raise ValueError(f"not a number: {val!r}")


# ---------------------------------------------------------------------------
# Linear substitution
# ---------------------------------------------------------------------------

def substitute_linear(p: TaylorPoly, matrix) -> TaylorPoly:
    """Coefficients of p(M y): the substitution x = M y.

    ``matrix`` is a d x d nested sequence (Fractions stay exact) or ndarray.
    Exact for polynomial inputs; preserves the truncation order tag.
    """
    d = p.dim
    rows = [[_coerce_coeff(matrix[i][j]) for j in range(d)] for i in range(d)]
    if len(rows) != d:
        raise ValueError("matrix dimension mismatch")
    lin = [TaylorPoly(d, {tuple(1 if k == j else 0 for k in range(d)): rows[i][j]
                          for j in range(d)}) for i in range(d)]
    out = TaylorPoly(d, {})
    for alpha, c in p.terms.items():
        term = TaylorPoly(d, {(0,) * d: c})
        for m, e in enumerate(alpha):
            if e:
                term = term * lin[m].power(e)
        out = out + term
    out.order = p.order
    return out


# ---------------------------------------------------------------------------
# Symmetric eigendecomposition (cyclic Jacobi) and Hessian normalization
# ---------------------------------------------------------------------------

def jacobi_eigh(h: np.ndarray, *, tol_factor: float = 1e-14, max_sweeps: int = 50):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues descending, eigenvectors as rows) so that
    ``h == vecs.T @ diag(vals) @ vecs`` up to roundoff.  Each eigenvector's
    first nonzero component is made positive for determinism.
    """
    a = np.array(h, dtype=float)
    d = a.shape[0]
    if a.shape != (d, d):
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ValueError("matrix must be symmetric")
    v = np.eye(d)
    norm = np.linalg.norm(a)
    thresh = tol_factor * max(norm, 1e-300)
    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, sum(a[p, q] ** 2 for p in range(d) for q in range(d) if p != q)))
        if off <= thresh:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if abs(apq) <= thresh / max(d, 1):
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(d)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    vals = np.diag(a).copy()
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = v[:, order].T
    for i in range(d):
        row = vecs[i]
        nz = np.nonzero(np.abs(row) > 1e-12 * max(1.0, np.abs(row).max()))[0]
        if len(nz) and row[nz[0]] < 0:
            vecs[i] = -row
    return vals, vecs


@dataclass
class SpectralDecomp:
    """Eigendecomposition H = Q^T D Q of a positive definite symmetric matrix.

    ``q_rows`` holds eigenvectors as rows; ``eigenvalues`` are descending.  The
    normalizing map is  P = sqrt(D) Q  and ``det_hessian`` equals the product
    of eigenvalues.  When the input is rational and diagonal everything is
    exact (Fractions); otherwise entries are floats.
    """

    hessian: tuple
    eigenvalues: tuple
    q_rows: tuple
    det_hessian: object

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def exact(self) -> bool:
        return all(isinstance(x, Fraction) for x in self.eigenvalues) and all(
            isinstance(x, Fraction) for row in self.q_rows for x in row
        )

    def p_matrix(self) -> list[list]:
        """P = sqrt(D) Q (rows scaled by sqrt eigenvalue)."""
        out = []
        for i, lam in enumerate(self.eigenvalues):
            s = _sqrt_scalar(lam)
            out.append([s * x for x in self.q_rows[i]])
        return out

    def p_inverse(self) -> list[list]:
        """P^{-1} = Q^T D^{-1/2} (columns of Q^T scaled by 1/sqrt eigenvalue)."""
        d = self.dim
        out = [[None] * d for _ in range(d)]
        invs = [_inv_sqrt_scalar(lam) for lam in self.eigenvalues]
        for i in range(d):
            for j in range(d):
                out[i][j] = self.q_rows[j][i] * invs[j]
        return out

    def det_sqrt_inverse(self) -> ExactValue | float:
        """det(H)^(-1/2), the Jacobian factor of the normalizing map."""
        det = self.det_hessian
        if isinstance(det, Fraction):
            return ExactValue(Fraction(1), root=1 / det)
        return 1.0 / math.sqrt(det)


def _sqrt_scalar(x):
    if isinstance(x, Fraction):
        r = fraction_nth_root(x, 2)
        if r is not None:
            return r
        return math.sqrt(float(x))
    return math.sqrt(x)


def _inv_sqrt_scalar(x):
    s = _sqrt_scalar(x)
    if isinstance(s, Fraction):
        return 1 / s
    return 1.0 / s


def hessian_of(p: TaylorPoly) -> list[list]:
    """Hessian at 0 recovered from monomial coefficients: H_mn = (1+delta_mn) c(e_m+e_n)."""
    d = p.dim
    h = [[None] * d for _ in range(d)]
    for m in range(d):
        for n in range(d):
            alpha = [0] * d
            alpha[m] += 1
            alpha[n] += 1
            c = p.coeff(tuple(alpha))
            h[m][n] = (2 if m == n else 1) * c
    return h


def spectral_decompose(h: Sequence[Sequence], *, pd_tol: float = 1e-10) -> SpectralDecomp:
    """Decompose a symmetric positive definite matrix.

    Rational diagonal matrices are decomposed exactly; anything else goes
    through :func:`jacobi_eigh`.  Raises :class:`DegenerateMinimumError` when
    the smallest eigenvalue does not exceed ``pd_tol`` times the largest.
    """
    d = len(h)
    rows = [list(r) for r in h]
    exact = all(isinstance(x, (int, Fraction)) for r in rows for x in r)
    diagonal = exact and all(i == j or rows[i][j] == 0 for i in range(d) for j in range(d))
    if diagonal:
        diag = [Fraction(rows[i][i]) for i in range(d)]
        order = sorted(range(d), key=lambda i: (-diag[i], i))
        vals = tuple(diag[i] for i in order)
        q = tuple(tuple(Fraction(1) if j == order[i] else Fraction(0) for j in range(d))
                  for i in range(d))
        det = math.prod(vals, start=Fraction(1))
        if vals[-1] <= 0 or float(vals[-1]) <= pd_tol * float(vals[0]):
            raise DegenerateMinimumError(
                "quadratic form is not positive definite: eigenvalues "
                f"{[float(v) for v in vals]}")
        hess = tuple(tuple(Fraction(x) for x in r) for r in rows)
        return SpectralDecomp(hess, vals, q, det)
    arr = np.array([[to_float(x) for x in r] for r in rows], dtype=float)
    vals, vecs = jacobi_eigh(arr)
    if vals[-1] <= 0 or vals[-1] <= pd_tol * vals[0]:
        raise DegenerateMinimumError(
            f"quadratic form is not positive definite: eigenvalues {vals.tolist()}")
    det = float(np.prod(vals))
    return SpectralDecomp(tuple(tuple(float(x) for x in r) for r in arr),
                          tuple(float(v) for v in vals),
                          tuple(tuple(float(x) for x in row) for row in vecs),
                          det)


def hessian_normalize(f: TaylorPoly):
    """Normalize a nondegenerate minimum: returns (decomp, f_tilde, p_inverse).

    Requires f(0) = 0 and grad f(0) = 0.  ``f_tilde(y) = f(P^{-1} y)`` has
    identity Hessian, so its quadratic layer is |y|^2 / 2 and the leading
    radial coefficient is the constant 1/2.  Apply the returned ``p_inverse``
    to g with :func:`substitute_linear` for the matching transform; the
    Jacobian factor of the change of variables is det(H)^(-1/2).
    """
    if f.constant_term() != 0:
        raise InvalidMinimumError("f must vanish at the origin")
    if any(c != 0 for c in f.gradient_at_zero()):
        raise InvalidMinimumError("origin is not a critical point of f")
    decomp = spectral_decompose(hessian_of(f))
    f_tilde = substitute_linear(f, decomp.p_inverse())
    return decomp, f_tilde, decomp.p_inverse()


# ---------------------------------------------------------------------------
# Radial layers
# ---------------------------------------------------------------------------

Layer = Union[Fraction, float, TaylorPoly, Callable[[np.ndarray], np.ndarray]]


@dataclass
class RadialCoeffs:
    """Angular layers h_j(Omega) of ``h = rho**offset * sum_j h_j(Omega) rho**j``.

    ``offset`` is the leading exponent: nu for the exponent function, lambda-d
    for the amplitude.  Each layer is a constant, a polynomial in Omega, or a
    callable sampled at quadrature nodes.
    """

    dim: int
    layers: tuple
    offset: object  # Fraction or float

    def __post_init__(self):
        self.layers = tuple(self.layers)
        if not isinstance(self.offset, float):
            self.offset = Fraction(self.offset)

    @property
    def order(self) -> int:
        return len(self.layers) - 1

    def layer(self, j: int) -> Layer:
        return self.layers[j]

    def layer_values(self, j: int, nodes: np.ndarray) -> np.ndarray:
        return layer_values(self.layers[j], nodes)

    def is_polynomial(self) -> bool:
        return all(isinstance(l, (Fraction, float, int, TaylorPoly)) for l in self.layers)

    def is_exact(self) -> bool:
        for l in self.layers:
            if isinstance(l, TaylorPoly):
                if not l.is_exact():
                    return False
            elif isinstance(l, float):
                return False
            elif not isinstance(l, (int, Fraction)):
                return False
        return True

    def leading_constant(self):
        """Value of layer 0 if it is constant on the sphere, else None."""
        return layer_constant_value(self.layers[0], self.dim)

    def check_leading_positive(self, nodes: np.ndarray | None = None) -> None:
        c = self.leading_constant()
        if c is not None:
            if to_float(c) <= 0:
                raise HypothesisViolationError("leading radial coefficient must be positive")
            return
        if nodes is None:
            nodes, _ = sphere_rule(self.dim, 64 if self.dim == 2 else 24)
        vals = self.layer_values(0, nodes)
        if np.min(vals) <= 0:
            raise HypothesisViolationError(
                "leading radial coefficient must be positive on the sphere "
                f"(min sampled value {np.min(vals):.3e})")


def layer_values(layer: Layer, nodes: np.ndarray) -> np.ndarray:
    if isinstance(layer, TaylorPoly):
        return layer.evaluate(nodes)
    if isinstance(layer, (int, float, Fraction)):
        return np.full(nodes.shape[0], float(layer))
    vals = np.asarray(layer(nodes), dtype=float)
    if vals.shape != (nodes.shape[0],):
        raise ValueError("sampled layer must return one value per node")
    return vals


def layer_as_poly(layer: Layer, dim: int) -> TaylorPoly | None:
    if isinstance(layer, TaylorPoly):
        return layer
    if isinstance(layer, (int, Fraction)):
        return TaylorPoly(dim, {(0,) * dim: Fraction(layer)})
    if isinstance(layer, float):
        return TaylorPoly(dim, {(0,) * dim: layer})
    return None


def layer_constant_value(layer: Layer, dim: int):
    """The constant a layer equals on the unit sphere, or None.

    A homogeneous polynomial of even degree 2k is constant on the sphere
    exactly when it equals c * (|x|^2)^k as a polynomial.
    """
    if isinstance(layer, (int, float, Fraction)):
        return layer if isinstance(layer, float) else Fraction(layer)
    if not isinstance(layer, TaylorPoly):
        return None
    if layer.is_zero():
        return Fraction(0)
    deg = layer.degree()
    if deg == 0:
        return layer.constant_term()
    if deg % 2 or layer.min_order() != deg:
        return None
    k = deg // 2
    probe = tuple([2 * k] + [0] * (dim - 1))
    c = layer.coeff(probe)
    norm_pow = TaylorPoly(dim, {tuple(2 if i == m else 0 for i in range(dim)): Fraction(1)
                                for m in range(dim)}).power(k)
    diff = layer + norm_pow.scale(-1 * c)
    if all((to_float(v) == 0 or abs(to_float(v)) < 1e-14) for v in diff.terms.values()):
        return c
    return None


def radialize(p: TaylorPoly, nu: int) -> RadialCoeffs:
    """Split a Taylor polynomial into angular layers of ``rho**nu * sum_j h_j rho**j``.

    Layer j collects the homogeneous part of total order j + nu, read as a
    function of the direction Omega.  Terms of order below nu are rejected.
    """
    if nu < 0:
        raise ValueError("nu must be >= 0")
    if p.min_order() < nu and not p.is_zero():
        raise HypothesisViolationError(
            f"polynomial has terms of order {p.min_order()} below the leading order {nu}")
    top = (p.order if p.order is not None else p.degree())
    n_layers = max(top - nu, 0)
    layers = []
    for j in range(n_layers + 1):
        layer = p.homogeneous_layer(j + nu)
        const = layer_constant_value(layer, p.dim)
        layers.append(const if const is not None else layer)
    return RadialCoeffs(p.dim, tuple(layers), Fraction(nu))


def integrate_poly_sphere(p: TaylorPoly):
    """Exact integral of a polynomial over S^{d-1} via monomial moments."""
    if p.is_exact():
        total = ExactValue(Fraction(0))
        for alpha in sorted(p.terms, key=lambda a: (sum(a), tuple(-x for x in a))):
            w = sphere_moment(alpha)
            if w.rat != 0:
                total = total + w * p.terms[alpha]
        return total
    return math.fsum(
        float(sphere_moment(a)) * to_float(c) for a, c in sorted(p.terms.items()) if is_even(a)
    )
