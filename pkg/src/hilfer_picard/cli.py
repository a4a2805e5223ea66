"""Problem-file loading, CLI commands, and CSV emission.

Problem files are JSON documents::

    {"a": 0.0, "b": 1.0, "alpha": 0.6, "beta": 0.4, "y_a": 1.0,
     "rhs": "y", "lipschitz": 1.0,
     "solver": {"q": 0.5, "nodes": 256, "tol": 1e-8, "max_iter": 200}}

``rhs`` is either expression text or a builtin name (``zero``,
``linear:L``).  ``lipschitz`` and ``solver`` are optional; a missing
Lipschitz constant is estimated by sampling, with a warning.

Exit codes: 0 ok, 1 input/validation error, 2 non-convergence,
3 verification or bound failure.  Human-readable summaries go to
standard output, data to files, diagnostics to standard error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .bounds import (
    BoundCertificate,
    ic_perturbation_certificate,
    order_perturbation_envelope,
)
from .errors import (
    HilferError,
    PicardConvergenceError,
    RhsNameError,
    RhsSyntaxError,
    ValidationError,
)
from .fracops import DEFAULT_TOL_QUAD, FracOrder, residual as differential_residual
from .meshes import Mesh, read_solution_csv, write_solution_csv
from .picard import ProblemSpec, SolverConfig, solve, volterra_residual
from .rhs import EXPR_SYNTAX, builtin_rhs, estimate_lipschitz, parse_rhs
from .special import MlParams, mittag_leffler

__all__ = ["load_problem", "main"]

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_CONVERGENCE = 2
EXIT_CHECK_FAILED = 3

# Differential residuals are dominated by grid differentiation; this is
# the documented acceptance level at default resolution.
DEFAULT_RESIDUAL_TOL = 1e-2


def _require_number(doc: dict, field: str) -> float:
    if field not in doc:
        raise ValidationError(f"missing required field '{field}'", field=field)
    v = doc[field]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"field '{field}' must be a number, got {v!r}", field=field)
    return float(v)


def load_problem(path: str) -> tuple[ProblemSpec, SolverConfig]:
    """Parse and validate a JSON problem file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as err:
        raise ValidationError(f"cannot read problem file: {err}") from err
    except json.JSONDecodeError as err:
        raise ValidationError(f"problem file is not valid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise ValidationError("problem file must be a JSON object")

    a = _require_number(doc, "a")
    b = _require_number(doc, "b")
    alpha = _require_number(doc, "alpha")
    beta = _require_number(doc, "beta")
    y_a = _require_number(doc, "y_a")
    if not a < b:
        raise ValidationError(f"need a < b, got a={a}, b={b}", field="b")
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}", field="alpha")
    if not 0.0 <= beta <= 1.0:
        raise ValidationError(f"beta must lie in [0, 1], got {beta}", field="beta")

    rhs_text = doc.get("rhs")
    if not isinstance(rhs_text, str):
        raise ValidationError("field 'rhs' must be expression text", field="rhs")
    expr = builtin_rhs(rhs_text)
    if expr is None:
        try:
            expr = parse_rhs(rhs_text)
        except (RhsSyntaxError, RhsNameError) as err:
            raise ValidationError(f"field 'rhs': {err}", field="rhs") from err

    ord_ = FracOrder(alpha, beta)
    solver_doc = doc.get("solver", {})
    if not isinstance(solver_doc, dict):
        raise ValidationError("field 'solver' must be an object", field="solver")
    known = {"q", "nodes", "tol", "max_iter"}
    unknown = set(solver_doc) - known
    if unknown:
        raise ValidationError(
            f"unknown solver option(s): {sorted(unknown)}", field="solver"
        )
    try:
        cfg = SolverConfig(
            contraction_q=float(solver_doc.get("q", 0.5)),
            nodes_per_interval=int(solver_doc.get("nodes", 256)),
            tol_picard=float(solver_doc.get("tol", 1e-8)),
            max_iter=int(solver_doc.get("max_iter", 200)),
        )
    except ValueError as err:
        raise ValidationError(f"field 'solver': {err}", field="solver") from err

    estimated = False
    if "lipschitz" in doc:
        lipschitz = _require_number(doc, "lipschitz")
        if lipschitz <= 0.0:
            raise ValidationError(
                f"lipschitz must be > 0, got {lipschitz}", field="lipschitz"
            )
    else:
        g = ord_.gamma_w
        from .special import gamma as gamma_fn

        sample_x = np.linspace(a + (b - a) / 64.0, b, 65)
        y0 = y_a / gamma_fn(g) * (sample_x - a) ** (g - 1.0)
        lo, hi = float(np.min(y0)), float(np.max(y0))
        span = max(hi - lo, abs(y_a), 1.0)
        try:
            lipschitz = estimate_lipschitz(
                expr, (a, b), (lo - 2.0 * span, hi + 2.0 * span)
            )
        except HilferError as err:
            raise ValidationError(
                f"cannot estimate a Lipschitz constant: {err}", field="lipschitz"
            ) from err
        lipschitz = max(lipschitz, 1e-12)
        estimated = True
        print(
            f"warning: no 'lipschitz' field; sampled estimate {lipschitz:.6g} "
            "is a heuristic, not a proof",
            file=sys.stderr,
        )

    spec = ProblemSpec(a, b, ord_, y_a, expr, lipschitz, lipschitz_estimated=estimated)
    return spec, cfg


def _write_certificate_csv(cert: BoundCertificate, path: str) -> None:
    lines = ["x,bound,observed,satisfied"]
    slack = cert.slack if cert.slack is not None else np.zeros_like(cert.bound)
    for i, x in enumerate(cert.xs):
        if cert.observed is None:
            obs, sat = "", ""
        else:
            obs = format(cert.observed[i], ".17g")
            sat = str(bool(cert.observed[i] <= cert.bound[i] + slack[i])).lower()
        lines.append(f"{format(x, '.17g')},{format(cert.bound[i], '.17g')},{obs},{sat}")
    data = "\n".join(lines) + "\n"
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _print_report(report) -> None:
    bps = ", ".join(f"{v:.6g}" for v in report.breakpoints)
    print(f"subinterval breakpoints: [{bps}]")
    print(f"theoretical contraction factor: {report.contraction_factor:.6g}")
    print(f"iterations per subinterval: {report.iterations}")
    incs = ", ".join(f"{v:.3e}" for v in report.final_increment)
    print(f"final increments: [{incs}]")
    bounds = ", ".join(f"{v:.3e}" for v in report.apriori_bounds)
    print(f"a-priori increment bounds: [{bounds}]")
    if report.lipschitz_estimated:
        print("note: Lipschitz constant was estimated by sampling (heuristic)")
    if report.residual is not None:
        print(f"differential residual: {report.residual:.6e}")


def _cmd_solve(args) -> int:
    spec, cfg = load_problem(args.problem)
    try:
        solution, report = solve(spec, cfg)
    except PicardConvergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        print(f"last increment: {err.last_increment:.6e}", file=sys.stderr)
        print(
            f"theoretical contraction factor: {err.contraction_factor:.6g}",
            file=sys.stderr,
        )
        return EXIT_NO_CONVERGENCE
    write_solution_csv(solution, args.output)
    _print_report(report)
    print(f"solution written to {args.output}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    spec, cfg = load_problem(args.problem)
    try:
        stored = read_solution_csv(
            args.solution, spec.ord.gamma_w, curve_power=spec.ord.alpha
        )
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    if abs(stored.mesh.a - spec.a) > 1e-12 or abs(stored.mesh.b - spec.b) > 1e-12:
        print(
            f"error: stored mesh [{stored.mesh.a}, {stored.mesh.b}] does not "
            f"match the problem interval [{spec.a}, {spec.b}]",
            file=sys.stderr,
        )
        return EXIT_INPUT
    vres = volterra_residual(spec, stored)
    dres = differential_residual(spec, stored)
    vtol = max(10.0 * cfg.tol_picard, 2.0 * DEFAULT_TOL_QUAD)
    dtol = DEFAULT_RESIDUAL_TOL
    print(f"integral-form residual: {vres:.6e} (tolerance {vtol:.1e})")
    print(f"differential residual:  {dres:.6e} (tolerance {dtol:.1e})")
    if vres <= vtol and dres <= dtol:
        print("verification passed")
        return EXIT_OK
    print("verification FAILED")
    return EXIT_CHECK_FAILED


def _cmd_bounds(args) -> int:
    spec, cfg = load_problem(args.problem)
    if (args.ic is None) == (args.order is None):
        print("error: choose exactly one of --ic or --order", file=sys.stderr)
        return EXIT_INPUT
    grid = Mesh.uniform(spec.a, spec.b, 129)
    if args.ic is not None:
        cert = ic_perturbation_certificate(spec, args.ic, grid, cfg)
        label = f"initial-value shift epsilon={args.ic}"
    else:
        if args.yhat is None:
            print("error: --order requires --yhat", file=sys.stderr)
            return EXIT_INPUT
        try:
            cert = order_perturbation_envelope(
                spec, args.order, args.yhat, grid, cfg
            )
        except ValueError as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_INPUT
        label = f"order shift delta={args.order}, perturbed data {args.yhat}"
    if args.output:
        _write_certificate_csv(cert, args.output)
        print(f"certificate written to {args.output}")
    worst = float(np.max(cert.observed - cert.bound))
    print(f"{label}: max(observed - bound) = {worst:.6e}")
    print(f"certificate satisfied: {cert.satisfied}")
    return EXIT_OK if cert.satisfied else EXIT_CHECK_FAILED


def _cmd_ml(args) -> int:
    try:
        value = mittag_leffler(MlParams(args.alpha, args.beta), args.z)
    except (ValueError, HilferError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    print(f"{value:.15g}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hilfer-picard",
        description=(
            "Solve Cauchy-type problems for Hilfer fractional differential "
            "equations by successive approximations and evaluate "
            "continuous-dependence certificates."
        ),
        epilog=f"Right-hand side expression syntax: {EXPR_SYNTAX}",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a problem file, write x,w,y CSV")
    p_solve.add_argument("problem", help="JSON problem file")
    p_solve.add_argument("-o", "--output", required=True, help="output CSV path")

    p_verify = sub.add_parser("verify", help="recompute residuals of a stored solution")
    p_verify.add_argument("problem", help="JSON problem file")
    p_verify.add_argument("solution", help="solution CSV written by 'solve'")

    p_bounds = sub.add_parser("bounds", help="dependence-bound certificates")
    p_bounds.add_argument("problem", help="JSON problem file")
    p_bounds.add_argument("--ic", type=float, help="initial-value shift epsilon")
    p_bounds.add_argument("--order", type=float, help="order shift delta")
    p_bounds.add_argument("--yhat", type=float, help="perturbed weighted initial value")
    p_bounds.add_argument("-o", "--output", help="certificate CSV path")

    p_ml = sub.add_parser("ml", help="evaluate the two-parameter Mittag-Leffler function")
    p_ml.add_argument("--alpha", type=float, required=True)
    p_ml.add_argument("--beta", type=float, required=True)
    p_ml.add_argument("--z", type=float, required=True)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "solve": _cmd_solve,
        "verify": _cmd_verify,
        "bounds": _cmd_bounds,
        "ml": _cmd_ml,
    }
    try:
        code = handlers[args.command](args)
    except ValidationError as err:
        field = f" (field: {err.field})" if err.field else ""
        print(f"error: {err}{field}", file=sys.stderr)
        code = EXIT_INPUT
    except PicardConvergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        code = EXIT_NO_CONVERGENCE
    except HilferError as err:
        print(f"error: {err}", file=sys.stderr)
        code = EXIT_INPUT
    if argv is None:
        sys.exit(code)
    return code


if __name__ == "__main__":
    main()
