"""Command-line front end.

Commands
--------
expand         compute expansion coefficients for a problem spec (JSON file)
verify         integrate numerically and check empirical decay rates
stirling       exact Stirling-series coefficients
moments        exact monomial moments over the unit sphere
invert-series  coefficients of an inverted (reverted) power series

Exit codes: 0 success, 2 unparseable input, 3 violated expansion hypothesis,
4 failed verification checks, 5 quadrature accuracy failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .coefficients import (
    Expansion,
    ExpansionParams,
    ExpansionTerm,
    f0const_coeffs,
    general_coeffs,
    nondegenerate_coeffs,
    oned_coeffs,
    oned_from_taylor,
    radial_from_taylor,
    stirling_series,
    taylor_coeffs,
)
from .errors import AccuracyError, HypothesisViolationError, LapexpError, SpecError
from .exact import to_float
from .multiindex import sphere_moment, validate_multi_index
from .oracle import Ball, Box, Builtin, IntegrandSpec, default_k_grid, make_builtin, verify_order
from .series import ScalarSeries, invert
from .taylor import (
    RadialCoeffs,
    TaylorPoly,
    hessian_of,
    layer_constant_value,
    parse_number,
    spectral_decompose,
)

METHODS = ("auto", "general", "f0-const", "taylor", "nondegenerate", "one-dim")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_HYPOTHESIS = 3
EXIT_VERIFY_FAILED = 4
EXIT_ACCURACY = 5


# ---------------------------------------------------------------------------
# Problem specification
# ---------------------------------------------------------------------------

@dataclass
class Problem:
    dim: int
    order: int
    pathway: str
    f_poly: TaylorPoly | None = None
    g_poly: TaylorPoly | None = None
    f_radial: RadialCoeffs | None = None
    g_radial: RadialCoeffs | None = None
    builtin: Builtin | None = None
    domain: Box | Ball | None = None
    domain_defaulted: bool = False

    @property
    def has_taylor(self) -> bool:
        return self.f_poly is not None


def _parse_layers(dim: int, entries, what: str) -> list:
    layers = []
    for i, entry in enumerate(entries):
        if isinstance(entry, dict):
            if set(entry) != {"poly"}:
                raise SpecError(f"{what} layer {i}: expected a number or {{'poly': ...}}")
            layers.append(TaylorPoly.from_json_terms(dim, entry["poly"]))
        else:
            layers.append(parse_number(entry))
    return layers


def _parse_domain(dim: int, obj) -> Box | Ball:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise SpecError("domain must be {'box': [[lo, hi], ...]} or {'ball': radius}")
    if "box" in obj:
        bounds = obj["box"]
        if len(bounds) != dim:
            raise SpecError(f"box has {len(bounds)} axes, expected {dim}")
        return Box(tuple((float(lo), float(hi)) for lo, hi in bounds))
    if "ball" in obj:
        return Ball(dim, float(obj["ball"]))
    raise SpecError("domain must be {'box': ...} or {'ball': ...}")


def parse_problem(obj: dict, *, order: int | None = None,
                  method: str | None = None) -> Problem:
    """Build a Problem from a spec dict; CLI flags override file fields."""
    if not isinstance(obj, dict):
        raise SpecError("problem spec must be a JSON object")
    try:
        dim = int(obj["dim"])
    except KeyError:
        raise SpecError("problem spec is missing 'dim'") from None
    n = order if order is not None else int(obj.get("order", 4))
    pathway = method if method is not None else str(obj.get("pathway", "auto"))
    if pathway not in METHODS:
        raise SpecError(f"unknown pathway {pathway!r}; choose from {METHODS}")

    problem = Problem(dim=dim, order=n, pathway=pathway)
    if "builtin" in obj:
        spec = obj["builtin"]
        problem.builtin = make_builtin(spec["name"], dim=dim, order=n,
                                       params=spec.get("params"))
        problem.f_poly = problem.builtin.taylor_f
        problem.g_poly = problem.builtin.taylor_g
        problem.domain = problem.builtin.domain
    else:
        for side in ("f", "g"):
            if side not in obj:
                raise SpecError(f"problem spec is missing '{side}'")
            body = obj[side]
            if not isinstance(body, dict) or len(body) != 1:
                raise SpecError(f"'{side}' must have exactly one representation")
            kind, payload = next(iter(body.items()))
            if kind == "taylor":
                poly = TaylorPoly.from_json_terms(dim, payload)
                setattr(problem, f"{side}_poly", poly)
            elif kind == "radial":
                exp_key = "nu" if side == "f" else "lambda"
                if exp_key not in payload:
                    raise SpecError(f"radial '{side}' needs '{exp_key}'")
                expo = parse_number(payload[exp_key])
                offset = expo if side == "f" else (expo - dim if isinstance(expo, float)
                                                   else Fraction(expo) - dim)
                layers = _parse_layers(dim, payload.get("layers", []), side)
                setattr(problem, f"{side}_radial",
                        RadialCoeffs(dim, tuple(layers), offset))
            else:
                raise SpecError(f"unknown {side}-representation {kind!r}")
        mixed = (problem.f_poly is None) != (problem.g_poly is None)
        if mixed:
            raise SpecError("f and g must both be 'taylor' or both be 'radial'")
    if "domain" in obj:
        problem.domain = _parse_domain(dim, obj["domain"])
    if problem.domain is None:
        problem.domain = Ball(dim, 1.0)
        problem.domain_defaulted = True
    return problem


def _pad_radial(rc: RadialCoeffs, order: int) -> RadialCoeffs:
    layers = list(rc.layers[: order + 1])
    layers += [Fraction(0)] * (order + 1 - len(layers))
    return RadialCoeffs(rc.dim, tuple(layers), rc.offset)


def resolve_pathway(problem: Problem) -> str:
    """Most specific applicable pathway for 'auto'."""
    if problem.pathway != "auto":
        return problem.pathway
    if problem.has_taylor:
        f = problem.f_poly
        if f.is_zero() or f.constant_term() != 0:
            raise HypothesisViolationError(
                "hypothesis violated: f must attain its minimum value 0 at the origin")
        nu_hat = f.min_order()
        if nu_hat == 2:
            try:
                spectral_decompose(hessian_of(f))
                return "nondegenerate"
            except HypothesisViolationError:
                pass
        f0 = layer_constant_value(f.homogeneous_layer(nu_hat), f.dim)
        if f0 is not None and nu_hat % 2 == 0:
            return "taylor"
        return "general"
    f0 = problem.f_radial.leading_constant()
    return "f0-const" if f0 is not None else "general"


def build_expansion(problem: Problem) -> Expansion:
    method = resolve_pathway(problem)
    n = problem.order
    if problem.has_taylor:
        f, g = problem.f_poly, problem.g_poly
        if method == "nondegenerate":
            return nondegenerate_coeffs(f, g, n)
        if method == "taylor":
            if f.is_zero() or f.constant_term() != 0:
                raise HypothesisViolationError(
                    "hypothesis violated: f must attain its minimum value 0 at the origin")
            params = ExpansionParams(f.dim, f.min_order(), f.dim, n)
            return taylor_coeffs(f, g, params)
        if method == "one-dim":
            a, b, nu = oned_from_taylor(f, g, n)
            return oned_coeffs(a, b, nu, n)
        fr, gr, params = radial_from_taylor(f, g, n)
        if method == "f0-const":
            return f0const_coeffs(fr, gr, params)
        return general_coeffs(fr, gr, params)
    if method in ("taylor", "nondegenerate", "one-dim"):
        raise HypothesisViolationError(
            f"the {method} pathway requires Taylor data, got radial layers")
    fr = _pad_radial(problem.f_radial, n)
    gr = _pad_radial(problem.g_radial, n)
    if method == "f0-const":
        return f0const_coeffs(fr, gr)
    return general_coeffs(fr, gr)


def _radial_evaluable(rc: RadialCoeffs):
    layers = rc.layers
    offset = to_float(rc.offset)

    def fn(points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        rho = np.linalg.norm(points, axis=1)
        safe = np.where(rho > 0, rho, 1.0)
        omega = points / safe[:, None]
        out = np.zeros(len(points))
        for j, layer in enumerate(layers):
            from .taylor import layer_values

            out += layer_values(layer, omega) * rho ** (offset + j)
        return np.where(rho > 0, out, 0.0 if offset > 0 else out)

    return fn


def build_integrand(problem: Problem) -> IntegrandSpec:
    if problem.builtin is not None:
        b = problem.builtin
        return IntegrandSpec(b.dim, b.f, b.g, problem.domain or b.domain)
    if problem.has_taylor:
        return IntegrandSpec(problem.dim, problem.f_poly.evaluate,
                             problem.g_poly.evaluate, problem.domain)
    return IntegrandSpec(problem.dim, _radial_evaluable(problem.f_radial),
                         _radial_evaluable(problem.g_radial), problem.domain)


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _emit(text: str, output: str | None):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        print(text)


def _expansion_table(exp: Expansion) -> str:
    lines = [
        f"pathway: {exp.pathway}   dim: {exp.params.dim}   nu: {exp.params.nu}   "
        f"lambda: {exp.params.lam}   order: {exp.params.order}",
        f"remainder exponent: {exp.remainder_exponent}",
    ]
    if exp.det_hessian is not None:
        lines.append(f"det Hessian: {exp.det_hessian}")
    rows = [("j", "k-power", "zeta (exact)", "zeta (float)")]
    for t in exp.terms:
        rows.append((str(t.j), f"-{t.power}", str(t.zeta) if t.exact else "-",
                     f"{t.zeta_float:.17g}"))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    for r in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return "\n".join(lines)


def _report_table(report) -> str:
    lines = [f"k grid: {', '.join(f'{k:g}' for k in report.k_values)}"]
    rows = [("level j", "target", "fitted slope", "status")]
    for c in report.checks:
        status = "floor-limited" if c.floor_limited else ("pass" if c.passed else "FAIL")
        slope = "-" if c.fitted_slope is None else f"{c.fitted_slope:.3f}"
        rows.append((str(c.j), f"-{c.target_exponent:g}", slope, status))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    for r in rows:
        lines.append("  ".join(col.ljust(w) for col, w in zip(r, widths)).rstrip())
    lines.append(f"overall: {'pass' if report.passed else 'FAIL'}")
    return "\n".join(lines)


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_expand(args) -> int:
    problem = parse_problem(_load_json(args.input), order=args.order, method=args.method)
    expansion = build_expansion(problem)
    if args.format == "json":
        _emit(json.dumps(expansion.to_json_obj(), indent=2, sort_keys=True), args.output)
    else:
        _emit(_expansion_table(expansion), args.output)
    return EXIT_OK


def _corrupt(expansion: Expansion) -> Expansion:
    """Fault injection: add 1 to the j=2 coefficient (or the last term)."""
    terms = list(expansion.terms)
    idx = next((i for i, t in enumerate(terms) if t.j == 2), len(terms) - 1)
    t = terms[idx]
    terms[idx] = ExpansionTerm(t.j, t.power, t.zeta_float + 1.0)
    return Expansion(expansion.params, tuple(terms), expansion.pathway,
                     expansion.remainder_exponent, expansion.det_hessian,
                     expansion.transform, expansion.quadrature_nodes)


def _cmd_verify(args) -> int:
    problem = parse_problem(_load_json(args.input), order=args.order, method=args.method)
    if problem.domain_defaulted:
        print("warning: no domain given; defaulting to the unit ball "
              "(f must stay positive away from the origin there)", file=sys.stderr)
    if args.expansion:
        expansion = Expansion.from_json_obj(_load_json(args.expansion))
    else:
        expansion = build_expansion(problem)
    if args.inject_error:
        expansion = _corrupt(expansion)
    spec = build_integrand(problem)
    ks = default_k_grid(args.k_min, args.k_max, args.points)
    report = verify_order(spec, expansion, ks, threads=args.threads)
    if args.format == "json":
        _emit(json.dumps(report.to_json_obj(), indent=2, sort_keys=True), args.output)
    else:
        _emit(_report_table(report), args.output)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def _cmd_stirling(args) -> int:
    if args.terms < 1:
        raise SpecError("--terms must be >= 1")
    coeffs = stirling_series(args.terms)
    lines = [f"{c}  ({float(c):.15g})" for c in coeffs]
    _emit("\n".join(lines), args.output)
    return EXIT_OK


def _cmd_moments(args) -> int:
    alpha = validate_multi_index(int(p) for p in args.alpha.split(","))
    if len(alpha) != args.dim:
        raise SpecError(f"--alpha has {len(alpha)} entries, expected {args.dim}")
    w = sphere_moment(alpha)
    _emit(f"{w}  ({float(w):.15g})", args.output)
    return EXIT_OK


def _cmd_invert_series(args) -> int:
    coeffs = [parse_number(c) for c in args.coeffs.split(",")]
    coeffs += [Fraction(0)] * (args.order + 1 - len(coeffs))
    series = ScalarSeries(tuple(coeffs[: args.order + 1]), parse_number(args.nu))
    inv = invert(series, parse_number(args.q))
    lines = []
    for j in range(inv.order + 1):
        b = inv.coeff(j)
        shown = str(b) if not isinstance(b, float) else "-"
        lines.append(f"b[{j}] = {shown}  ({to_float(b):.15g})")
    _emit("\n".join(lines), args.output)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lapexp",
        description="Coefficients of Laplace-type asymptotic expansions "
                    "integral(exp(-k f) g) ~ sum_j zeta_j k^(-(j+lambda)/nu).")
    sub = parser.add_subparsers(dest="command", required=True)

    p_exp = sub.add_parser("expand", help="compute expansion coefficients")
    p_exp.add_argument("input", help="problem spec (JSON file)")
    p_exp.add_argument("--order", type=int, default=None, help="truncation order N")
    p_exp.add_argument("--method", choices=METHODS, default=None)
    p_exp.add_argument("--format", choices=("table", "json"), default="table")
    p_exp.add_argument("--output", default=None)
    p_exp.set_defaults(func=_cmd_expand)

    p_ver = sub.add_parser("verify", help="check empirical decay rates against quadrature")
    p_ver.add_argument("input", help="problem spec (JSON file)")
    p_ver.add_argument("--order", type=int, default=None)
    p_ver.add_argument("--method", choices=METHODS, default=None)
    p_ver.add_argument("--k-min", type=float, default=1e2)
    p_ver.add_argument("--k-max", type=float, default=1e5)
    p_ver.add_argument("--points", type=int, default=7)
    p_ver.add_argument("--expansion", default=None,
                       help="re-ingest a previously emitted expansion JSON")
    p_ver.add_argument("--inject-error", action="store_true",
                       help="corrupt one coefficient to exercise the failure path")
    p_ver.add_argument("--threads", type=int, default=1)
    p_ver.add_argument("--format", choices=("table", "json"), default="table")
    p_ver.add_argument("--output", default=None)
    p_ver.set_defaults(func=_cmd_verify)

    p_st = sub.add_parser("stirling", help="exact Stirling-series coefficients")
    p_st.add_argument("--terms", type=int, required=True)
    p_st.add_argument("--output", default=None)
    p_st.set_defaults(func=_cmd_stirling)

    p_mom = sub.add_parser("moments", help="monomial moments over the unit sphere")
    p_mom.add_argument("--dim", type=int, required=True)
    p_mom.add_argument("--alpha", required=True, help="comma-separated exponents")
    p_mom.add_argument("--output", default=None)
    p_mom.set_defaults(func=_cmd_moments)

    p_inv = sub.add_parser("invert-series", help="invert a radial power series")
    p_inv.add_argument("--nu", required=True)
    p_inv.add_argument("--q", required=True)
    p_inv.add_argument("--coeffs", required=True, help="comma-separated a0,a1,...")
    p_inv.add_argument("--order", type=int, required=True)
    p_inv.add_argument("--output", default=None)
    p_inv.set_defaults(func=_cmd_invert_series)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except AccuracyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except HypothesisViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (ValueError, KeyError, TypeError, LapexpError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
