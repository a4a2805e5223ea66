"""Executable continuous-dependence certificates.

Three envelopes: the singular-kernel Gronwall series, the
initial-condition perturbation bound (a Mittag-Leffler envelope that is
an equality for the positive linear family), and the order-perturbation
bound built from a three-term data/kernel comparison plus the same
Gronwall series.  Certificates compare a certified envelope against
observed differences of two solves and carry a slack that absorbs the
discretization of both sides.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import SeriesConvergenceError
from .fracops import FracOrder
from .meshes import Mesh, eval_y
from .picard import ProblemSpec, SolverConfig, solve
from .quadrature import DEFAULT_TOL_QUAD, frac_convolve
from .rhs import eval_rhs
from .special import MlParams, gamma as gamma_fn, log_gamma, mittag_leffler

__all__ = [
    "BoundCertificate",
    "gronwall_envelope",
    "ic_perturbation_bound",
    "order_perturbation_B",
    "order_perturbation_envelope",
    "ic_perturbation_certificate",
    "certificate_slack",
]


@dataclass(frozen=True)
class BoundCertificate:
    """Envelope vs observation on a grid of points strictly right of a."""

    xs: np.ndarray
    bound: np.ndarray
    observed: np.ndarray | None = None
    satisfied: bool | None = None
    slack: np.ndarray | None = None

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        bound = np.asarray(self.bound, dtype=float)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "bound", bound)
        if xs.shape != bound.shape:
            raise ValueError("xs and bound must have matching length")
        if np.any(bound < 0.0):
            raise ValueError("bound values must be nonnegative")
        if self.observed is not None:
            obs = np.asarray(self.observed, dtype=float)
            object.__setattr__(self, "observed", obs)
            if obs.shape != xs.shape:
                raise ValueError("observed must match xs in length")


def certificate_slack(bound: np.ndarray, tol_picard: float) -> np.ndarray:
    """Comparison slack absorbing discretization of both sides."""
    return np.maximum(10.0 * tol_picard, 2.0 * DEFAULT_TOL_QUAD * np.asarray(bound))


def _series_sum(
    nodes: np.ndarray,
    a_vals: np.ndarray,
    sigma_a: float,
    g_vals: np.ndarray,
    beta_g: float,
    tol_series: float,
    max_series_terms: int,
    interp_power: float = 1.0,
) -> np.ndarray:
    """sum_n (g(t) G(beta))^n / G(n beta) * int (t-s)^{n beta - 1} a(s) ds.

    ``a_vals`` are companion samples at weight exponent sigma_a; the
    s-integrals use the same exact-moment product quadrature as the
    fractional integrals, one kernel exponent per series term.
    """
    log_gb = np.where(
        g_vals > 0.0, np.log(np.where(g_vals > 0.0, g_vals, 1.0)) + log_gamma(beta_g),
        -np.inf,
    )
    total = np.zeros_like(a_vals)
    small_run = 0
    for n in range(1, max_series_terms + 1):
        J = frac_convolve(
            n * beta_g, nodes, a_vals, sigma=sigma_a, interp_power=interp_power
        )
        with np.errstate(invalid="ignore"):
            coeff = np.exp(n * log_gb - log_gamma(n * beta_g))
        coeff = np.where(np.isfinite(coeff), coeff, 0.0)
        term = coeff * J
        total += term
        scale = np.maximum(np.max(np.abs(total)), 1e-300)
        if np.max(np.abs(term)) < tol_series * scale:
            small_run += 1
            if small_run >= 3:
                return total
        else:
            small_run = 0
    raise SeriesConvergenceError(
        f"envelope series did not converge within {max_series_terms} terms "
        f"(beta_g={beta_g})"
    )


def gronwall_envelope(
    a_vals,
    g_vals,
    beta_g: float,
    grid: Mesh,
    tol_series: float = 1e-12,
    max_series_terms: int = 200,
) -> np.ndarray:
    """Right-hand side of the singular-kernel comparison inequality.

    For nonnegative locally integrable a and nonnegative nondecreasing
    bounded g, any u with u <= a + g * int (t-s)^{beta-1} u ds is also
    below the returned envelope a(t) + series(t), evaluated per node.
    With constant inputs the envelope collapses to
    a0 * E_beta(g0 gamma(beta) t^beta).
    """
    if beta_g <= 0.0:
        raise ValueError(f"beta_g must be > 0, got {beta_g}")
    a_vals = np.asarray(a_vals, dtype=float)
    g_vals = np.asarray(g_vals, dtype=float)
    if a_vals.shape != grid.nodes.shape or g_vals.shape != grid.nodes.shape:
        raise ValueError("a_vals and g_vals must be sampled on the grid nodes")
    if np.any(a_vals < 0.0) or not np.all(np.isfinite(a_vals)):
        raise ValueError("a_vals must be nonnegative and finite")
    if np.any(g_vals < 0.0):
        raise ValueError("g_vals must be nonnegative")
    if np.any(np.diff(g_vals) < -1e-12 * max(1.0, np.max(np.abs(g_vals)))):
        raise ValueError("g_vals must be nondecreasing")
    series = _series_sum(
        grid.nodes, a_vals, 1.0, g_vals, beta_g, tol_series, max_series_terms
    )
    return a_vals + series


def ic_perturbation_bound(
    epsilon: float, A: float, ord: FracOrder, x_minus_a: float
) -> float:
    """|eps| (x-a)^{g-1} E_{alpha,g}(A (x-a)^alpha)."""
    if A <= 0.0:
        raise ValueError(f"A must be > 0, got {A}")
    if x_minus_a <= 0.0:
        raise ValueError(f"x_minus_a must be > 0, got {x_minus_a}")
    g = ord.gamma_w
    ml = mittag_leffler(MlParams(ord.alpha, g), A * x_minus_a**ord.alpha)
    return abs(epsilon) * x_minus_a ** (g - 1.0) * ml


def _check_delta(ord: FracOrder, delta: float) -> None:
    if delta < 0.0 or delta >= ord.alpha:
        raise ValueError(
            f"delta must satisfy 0 <= delta < alpha={ord.alpha}, got {delta}"
        )


def order_perturbation_B(
    y_a: float,
    y_hat_a: float,
    ord: FracOrder,
    delta: float,
    f_max: float,
    x_minus_a,
):
    """Data-plus-kernel comparison term of the order-perturbation bound.

    Three terms: the initial-data mismatch of the two problems' leading
    powers, and two kernel-difference terms weighted by the measured
    max of |f| along the base solution.  delta = 0 is the degenerate
    case (kernel terms cancel exactly).
    """
    _check_delta(ord, delta)
    if f_max < 0.0:
        raise ValueError(f"f_max must be >= 0, got {f_max}")
    s = np.asarray(x_minus_a, dtype=float)
    if np.any(s <= 0.0):
        raise ValueError("x_minus_a must be > 0")
    al, be, g = ord.alpha, ord.beta_type, ord.gamma_w
    g_hat = g + delta * (be - 1.0)
    ad = al - delta
    data = np.abs(
        y_hat_a * s ** (g_hat - 1.0) / gamma_fn(g_hat)
        - y_a * s ** (g - 1.0) / gamma_fn(g)
    )
    kern1 = f_max * np.abs(
        s**ad / gamma_fn(ad + 1.0) - s**ad / (ad * gamma_fn(al))
    )
    kern2 = f_max * np.abs(
        s**ad / (ad * gamma_fn(al)) - s**al / gamma_fn(al + 1.0)
    )
    out = data + kern1 + kern2
    return float(out) if np.ndim(x_minus_a) == 0 else out


def _b_companion_at_a(y_a: float, y_hat_a: float, g: float, g_hat: float) -> float:
    if g_hat == g:
        return abs(y_hat_a - y_a) / gamma_fn(g)
    return abs(y_hat_a) / gamma_fn(g_hat)


def order_perturbation_envelope(
    spec: ProblemSpec,
    delta: float,
    y_hat_a: float,
    grid: Mesh,
    cfg: SolverConfig | None = None,
    solve_perturbed: bool = True,
    tol_series: float = 1e-12,
    max_series_terms: int = 200,
) -> BoundCertificate:
    """Certified envelope for the solution of the order-perturbed problem.

    Solves the base problem, measures ||f|| = max |f(x, y(x))| over its
    interior grid (a grid quantity, since the true solution's max is not
    available), forms the comparison term and its Gronwall series with
    constant factor A/gamma(alpha) and kernel exponent alpha - delta,
    then (optionally) solves the perturbed problem and fills observed
    differences.  Comparison points are the grid nodes right of a.
    """
    _check_delta(spec.ord, delta)
    if cfg is None:
        cfg = SolverConfig()
    if grid.a != spec.a or grid.b > spec.b:
        raise ValueError("certificate grid must span [a, x_max] within the problem")
    al, be, g = spec.ord.alpha, spec.ord.beta_type, spec.ord.gamma_w
    g_hat = g + delta * (be - 1.0)

    base_cfg = replace(cfg, compute_residual=False)
    y_base, _ = solve(spec, base_cfg)
    nodes_b = y_base.mesh.nodes
    s_b = nodes_b[1:] - spec.a
    y_vals = s_b ** (g - 1.0) * y_base.w[1:] if g < 1.0 else y_base.w[1:]
    f_max = float(np.max(np.abs(eval_rhs(spec.rhs, nodes_b[1:], y_vals))))

    xs = grid.nodes[1:]
    s = xs - spec.a
    B = order_perturbation_B(spec.y_a, y_hat_a, spec.ord, delta, f_max, s)

    # companion representation of B at the most singular exponent
    b_comp = np.empty(grid.nodes.size)
    b_comp[0] = _b_companion_at_a(spec.y_a, y_hat_a, g, g_hat)
    b_comp[1:] = s ** (1.0 - g_hat) * B if g_hat < 1.0 else B
    g_const = spec.lipschitz_A / gamma_fn(al)
    series = _series_sum(
        grid.nodes,
        b_comp,
        g_hat,
        np.full(grid.nodes.size, g_const),
        al - delta,
        tol_series,
        max_series_terms,
    )
    bound = B + series[1:]
    slack = certificate_slack(bound, cfg.tol_picard)

    observed = None
    satisfied = None
    if solve_perturbed:
        spec_hat = ProblemSpec(
            spec.a,
            spec.b,
            FracOrder(al - delta, be),
            y_hat_a,
            spec.rhs,
            spec.lipschitz_A,
            spec.lipschitz_estimated,
        )
        y_hat, _ = solve(spec_hat, base_cfg)
        observed = np.abs(eval_y(y_hat, xs) - eval_y(y_base, xs))
        satisfied = bool(np.all(observed <= bound + slack))
    return BoundCertificate(
        xs=xs, bound=bound, observed=observed, satisfied=satisfied, slack=slack
    )


def ic_perturbation_certificate(
    spec: ProblemSpec,
    epsilon: float,
    grid: Mesh,
    cfg: SolverConfig | None = None,
) -> BoundCertificate:
    """Mittag-Leffler envelope certificate for a shifted initial value.

    Solves the problem with y_a and with y_a + epsilon and compares the
    observed difference against the envelope at the grid nodes right
    of a.
    """
    if cfg is None:
        cfg = SolverConfig()
    if grid.a != spec.a or grid.b > spec.b:
        raise ValueError("certificate grid must span [a, x_max] within the problem")
    xs = grid.nodes[1:]
    bound = np.array(
        [ic_perturbation_bound(epsilon, spec.lipschitz_A, spec.ord, x - spec.a)
         for x in xs]
    ) if epsilon != 0.0 else np.zeros(xs.size)
    slack = certificate_slack(bound, cfg.tol_picard)
    base_cfg = replace(cfg, compute_residual=False)
    y0, _ = solve(spec, base_cfg)
    y1, _ = solve(
        ProblemSpec(
            spec.a, spec.b, spec.ord, spec.y_a + epsilon, spec.rhs,
            spec.lipschitz_A, spec.lipschitz_estimated,
        ),
        base_cfg,
    )
    observed = np.abs(eval_y(y1, xs) - eval_y(y0, xs))
    satisfied = bool(np.all(observed <= bound + slack))
    return BoundCertificate(
        xs=xs, bound=bound, observed=observed, satisfied=satisfied, slack=slack
    )
