"""Shared fixtures and independent oracles."""

from __future__ import annotations

import math

import numpy as np
import pytest

from hilfer_picard import (
    FracOrder,
    ProblemSpec,
    SolverConfig,
    builtin_rhs,
    log_gamma,
    solve,
)

# the linear test family exercised by several checks
LINEAR_FAMILY = [
    (lam, al, be)
    for lam in (-1.0, 0.5, 1.0)
    for al in (0.4, 0.6, 0.9)
    for be in (0.0, 0.4, 1.0)
]


def series_companion(alpha: float, gamma_w: float, lam: float, x: np.ndarray) -> np.ndarray:
    """Independent oracle: sum_j lam^j x^{alpha j} / gamma(alpha j + gamma_w).

    Plain partial summation, truncated at 1e-15; shares no code with the
    solver's quadrature path.
    """
    out = np.zeros_like(x, dtype=float)
    for k in range(500):
        term = lam**k * x ** (alpha * k) / math.exp(log_gamma(alpha * k + gamma_w))
        out += term
        if k > 3 and np.max(np.abs(term)) < 1e-15:
            return out
    raise RuntimeError("oracle series did not converge")


def linear_problem(lam: float, al: float, be: float, y_a: float = 1.0) -> ProblemSpec:
    return ProblemSpec(
        0.0, 1.0, FracOrder(al, be), y_a, builtin_rhs(f"linear:{lam}"), abs(lam)
    )


@pytest.fixture(scope="session")
def linear_family_solves():
    """All 27 linear-family solves at the default configuration."""
    cfg = SolverConfig(compute_residual=False)
    results = {}
    for lam, al, be in LINEAR_FAMILY:
        spec = linear_problem(lam, al, be)
        solution, report = solve(spec, cfg)
        results[(lam, al, be)] = (spec, solution, report)
    return results
