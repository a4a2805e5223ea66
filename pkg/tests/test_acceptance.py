"""Acceptance suite: one check per shipped guarantee, at pinned tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion.
"""

import math

import numpy as np
import pytest

from hilfer_picard import (
    FracOrder,
    Mesh,
    MlParams,
    ProblemSpec,
    SolverConfig,
    WeightedGridFunction,
    apriori_error_bound,
    builtin_rhs,
    eval_y,
    gamma,
    gronwall_envelope,
    hilfer_derivative,
    ic_perturbation_bound,
    mittag_leffler,
    order_perturbation_envelope,
    rl_integral,
    solve,
    weighted_distance,
    weighted_norm,
)
from conftest import LINEAR_FAMILY, linear_problem, series_companion


def _report(num: int, desc: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[criterion {num:2d}] {status}: {desc}{detail}")
    assert ok, f"criterion {num} failed: {desc}{detail}"


def _power_error(order: float, sigma: float, n: int) -> float:
    mesh = Mesh.uniform(0.0, 1.0, n)
    g = WeightedGridFunction(mesh, sigma, np.ones(n))
    out = rl_integral(order, g)
    x = mesh.nodes
    exact = np.zeros_like(x)
    exact[1:] = gamma(sigma) / gamma(sigma + order) * x[1:] ** (sigma + order - 1.0)
    yv = x[1:] ** (out.gamma_w - 1.0) * out.w[1:] if out.gamma_w < 1.0 else out.w[1:]
    return float(np.max(np.abs(yv - exact[1:]) * x[1:] ** (1.0 - out.gamma_w)))


def test_criterion_01_power_function_exactness():
    worst = 0.0
    worst_ratio = 0.0
    for order in (0.3, 0.5, 0.8):
        for sigma in (0.5, 0.75, 1.0):
            e1 = _power_error(order, sigma, 1024)
            e2 = _power_error(order, sigma, 2048)
            worst = max(worst, e1)
            # roundoff-floor cases halve trivially
            if e1 > 1e-12:
                worst_ratio = max(worst_ratio, e2 / e1)
    ok = worst <= 5e-4 and worst_ratio <= 0.5
    _report(
        1,
        "fractional integral reproduces power functions",
        ok,
        f" (max weighted err {worst:.2e}, refinement ratio {worst_ratio:.2f})",
    )


def test_criterion_02_linear_problem_closed_form(linear_family_solves):
    worst = 0.0
    for (lam, al, be), (spec, sol, _rep) in linear_family_solves.items():
        oracle = series_companion(al, spec.ord.gamma_w, lam, sol.mesh.nodes)
        worst = max(worst, float(np.max(np.abs(sol.w - oracle))))
    ok = worst <= 1e-3
    _report(
        2,
        "solver matches the resolvent series on the linear family",
        ok,
        f" (max weighted err {worst:.2e} over {len(linear_family_solves)} problems)",
    )


def test_criterion_03_contraction_condition_honored(linear_family_solves):
    q = SolverConfig().contraction_q
    cond_ok = True
    worst_ratio = 0.0
    for (lam, al, be), (spec, _sol, rep) in linear_family_solves.items():
        g = spec.ord.gamma_w
        steps = np.diff(np.asarray(rep.breakpoints))
        cond = spec.lipschitz_A * gamma(g) / gamma(g + al) * steps**al
        cond_ok = cond_ok and bool(np.all(cond <= q + 1e-12))
        for incs in rep.increments:
            for a, b in zip(incs, incs[1:]):
                if a > 0.0:
                    worst_ratio = max(worst_ratio, b / a)
    ok = cond_ok and worst_ratio <= q + 0.05
    _report(
        3,
        "subinterval steps satisfy the contraction condition",
        ok,
        f" (worst measured increment ratio {worst_ratio:.3f} vs q={q})",
    )


def test_criterion_04_apriori_bound_validity(linear_family_solves):
    worst_excess = -np.inf
    for (lam, al, be), (spec, _sol, rep) in linear_family_solves.items():
        h = rep.breakpoints[1] - rep.breakpoints[0]
        for M, incs in zip(rep.interval_m, rep.increments):
            for m, inc in enumerate(incs, start=1):
                bound = apriori_error_bound(M, spec.lipschitz_A, spec.ord, h, m)
                worst_excess = max(worst_excess, inc - bound)
    ok = worst_excess <= 1e-6
    _report(
        4,
        "measured increments stay below the geometric a-priori bound",
        ok,
        f" (worst excess {worst_excess:.2e})",
    )


def test_criterion_05_type_parameter_reductions(linear_family_solves):
    worst = 0.0
    for al in (0.4, 0.9):
        # beta = 0: y = y_a x^{al-1} E_{al,al}(x^al); beta = 1: y = y_a E_{al,1}(x^al)
        for be, g in ((0.0, al), (1.0, 1.0)):
            spec, sol, _ = linear_family_solves[(1.0, al, be)]
            assert spec.ord.gamma_w == g
            oracle = series_companion(al, g, 1.0, sol.mesh.nodes)
            worst = max(worst, float(np.max(np.abs(sol.w - oracle))))
    ok = worst <= 1e-3
    _report(
        5,
        "type 0 and type 1 reduce to the one-parameter closed forms",
        ok,
        f" (max weighted err {worst:.2e})",
    )


def test_criterion_06_ic_perturbation_domination():
    cfg = SolverConfig(nodes_per_interval=512, compute_residual=False)
    worst_excess = -np.inf
    worst_tight = 0.0
    for lam, al, be in ((1.0, 0.6, 0.4), (1.0, 0.9, 1.0), (-1.0, 0.6, 0.4)):
        ordd = FracOrder(al, be)
        g = ordd.gamma_w
        base = linear_problem(lam, al, be)
        y0, _ = solve(base, cfg)
        for eps in (0.01, 0.1):
            shifted = linear_problem(lam, al, be, y_a=1.0 + eps)
            y1, _ = solve(shifted, cfg)
            xs = y0.mesh.nodes[y0.mesh.nodes >= 1.0 / 64.0]
            obs = np.abs(eval_y(y1, xs) - eval_y(y0, xs))
            bound = np.array(
                [ic_perturbation_bound(eps, base.lipschitz_A, ordd, x) for x in xs]
            )
            worst_excess = max(worst_excess, float(np.max(obs - bound)))
            if lam > 0.0:
                worst_tight = max(
                    worst_tight, abs(obs[-1] - bound[-1]) / bound[-1]
                )
    slack = 10.0 * cfg.tol_picard
    ok = worst_excess <= slack and worst_tight <= 0.05
    _report(
        6,
        "initial-value envelope dominates and is tight for positive slope",
        ok,
        f" (worst excess {worst_excess:.2e} vs slack {slack:.0e}; "
        f"tightness {worst_tight:.4f})",
    )


def test_criterion_07_order_perturbation_domination():
    cfg = SolverConfig(compute_residual=False)
    all_ok = True
    worst_margin = np.inf
    for be in (0.0, 1.0):
        for delta in (0.05, 0.1):
            spec = linear_problem(1.0, 0.8, be)
            grid = Mesh.uniform(0.0, 1.0, 65)
            cert = order_perturbation_envelope(spec, delta, 1.0, grid, cfg)
            all_ok = all_ok and bool(np.all(cert.observed <= cert.bound + cert.slack))
            worst_margin = min(
                worst_margin, float(np.min(cert.bound + cert.slack - cert.observed))
            )
    _report(
        7,
        "order-perturbation envelope dominates observed differences",
        all_ok,
        f" (smallest margin {worst_margin:.2e})",
    )


def test_criterion_08_gronwall_closed_form():
    worst = 0.0
    a0, g0 = 0.7, 1.3
    for beta_g in (0.5, 1.0):
        grid = Mesh.uniform(0.0, 1.0, 257)
        env = gronwall_envelope(
            np.full(257, a0), np.full(257, g0), beta_g, grid
        )
        t = grid.nodes[1:]
        exact = np.array(
            [
                a0
                * mittag_leffler(
                    MlParams(beta_g, 1.0), g0 * gamma(beta_g) * ti**beta_g
                )
                for ti in t
            ]
        )
        worst = max(worst, float(np.max(np.abs(env[1:] - exact))))
    ok = worst <= 1e-8
    _report(
        8,
        "constant-input comparison envelope matches its closed form",
        ok,
        f" (max err {worst:.2e})",
    )


def test_criterion_09_hilfer_annihilation():
    worst = 0.0
    for al, be in ((0.5, 0.5), (0.3, 0.0), (0.8, 1.0)):
        ordd = FracOrder(al, be)
        mesh = Mesh.uniform(0.0, 1.0, 1024)
        f = WeightedGridFunction(mesh, ordd.gamma_w, np.ones(1024))
        worst = max(worst, weighted_norm(hilfer_derivative(ordd, f)))
    ok = worst <= 5e-3
    _report(
        9,
        "two-parameter derivative annihilates the initial power profile",
        ok,
        f" (max weighted norm {worst:.2e})",
    )


def test_criterion_10_uniqueness_stress():
    cfg = SolverConfig(compute_residual=False)
    worst = 0.0
    for lam, al, be in ((1.0, 0.6, 0.4), (-1.0, 0.9, 1.0)):
        spec = linear_problem(lam, al, be)
        plain, _ = solve(spec, cfg)
        shifted, _ = solve(spec, cfg, initial_companion_offset=0.5)
        worst = max(worst, weighted_distance(plain, shifted))
    ok = worst <= 10.0 * cfg.tol_picard
    _report(
        10,
        "solves from perturbed starting iterates agree",
        ok,
        f" (max weighted distance {worst:.2e} vs {10.0 * cfg.tol_picard:.0e})",
    )


def test_criterion_11_special_function_identities():
    worst_ml = 0.0
    for z in np.linspace(0.0, 5.0, 251):
        worst_ml = max(
            worst_ml,
            abs(mittag_leffler(MlParams(1.0, 1.0), z) - math.exp(z)),
            abs(mittag_leffler(MlParams(2.0, 1.0), z) - math.cosh(math.sqrt(z))),
        )
    worst_rec = 0.0
    for x in np.linspace(0.1, 20.0, 400):
        worst_rec = max(
            worst_rec, abs(gamma(x + 1.0) - x * gamma(x)) / abs(gamma(x + 1.0))
        )
    ok = worst_ml <= 1e-12 and worst_rec <= 1e-12
    _report(
        11,
        "exponential/cosh identities and the gamma recurrence hold",
        ok,
        f" (series err {worst_ml:.2e}, recurrence rel err {worst_rec:.2e})",
    )
