"""Product quadrature for convolutions with weakly singular kernels.

Evaluates integrals of the form

    J(x) = int_{t0}^{T} (x - t)^{order-1} (t - t0)^{sigma-1} G(t) dt

where G is the continuous companion stored at mesh nodes and linearly
interpolated between them.  Panels near t0 use moments of the full
doubly-singular weight, computed exactly through the regularized
incomplete beta function, so the rule is exact there for linear G.
Panels far from t0 fold (t - t0)^{sigma-1} into the interpolated factor
and use closed-form moments of (x - t)^{order-1} alone; the relative
error of that simplification on panel k decays like 1/k^2, so a panel
budget growing like N/4 keeps it far below the quadrature tolerance and
restores second-order behavior under refinement.

For sigma = 1 every panel reduces to the plain product-trapezoidal rule.
All weight tables are derived from immutable inputs; nothing here keeps
state between calls.
"""

from __future__ import annotations

import numpy as np
from scipy.special import betainc, gammaln, roots_jacobi

__all__ = [
    "DEFAULT_TOL_QUAD",
    "frac_convolve",
    "frac_convolve_tail",
    "first_panel_gauss_jacobi",
]

# Verified full-order weighted accuracy of the scheme at 1024 nodes per
# unit interval (power-function identities hit ~1e-6; general smooth
# companions are second order).
DEFAULT_TOL_QUAD = 5e-4

_MIN_BETA_PANELS = 256
_MAX_BETA_PANELS = 1024


def _beta_budget(
    n_panels: int, sigma: float, n_beta: int | None, p: float = 1.0
) -> int:
    if n_beta is not None:
        return max(0, min(n_beta, n_panels))
    if sigma == 1.0 and p == 1.0:
        return 0
    budget = max(_MIN_BETA_PANELS, min(_MAX_BETA_PANELS, n_panels // 4))
    return min(n_panels, budget)


def _log_beta(p: float, q: float) -> float:
    return gammaln(p) + gammaln(q) - gammaln(p + q)


def _plain_moments(order: float, x, tk, tk1):
    """Exact integrals of (x-t)^{order-1} {1, (t-tk)} over [tk, tk1]."""
    u0 = x - tk
    u1 = np.maximum(x - tk1, 0.0)
    m0 = (u0**order - u1**order) / order
    mu = (u0 ** (order + 1.0) - u1 ** (order + 1.0)) / (order + 1.0)
    # integral of (x-t)^{order-1} (t-tk) dt
    mrel = u0 * m0 - mu
    return m0, mrel


def _plain_panel_sum(order, x, tk, tk1, pk, pk1):
    m0, mrel = _plain_moments(order, x, tk, tk1)
    slope = (pk1 - pk) / (tk1 - tk)
    return np.sum(pk * m0 + slope * mrel)


def _beta_panel_sum(order, sigma, a, x, tk, tk1, gk, gk1, p=1.0):
    """Panels with the companion interpolated linearly in (t-a)^p.

    p = 1 is the ordinary trapezoidal model; the solver passes its
    derivative order so the leading (t-a)^alpha term of solution
    companions integrates exactly near the endpoint.
    """
    L = x - a
    tauk = (tk - a) / L
    tauk1 = np.minimum((tk1 - a) / L, 1.0)
    c0 = L ** (order + sigma - 1.0) * np.exp(_log_beta(sigma, order))
    cp = L ** (order + sigma + p - 1.0) * np.exp(_log_beta(sigma + p, order))
    m0 = c0 * (betainc(sigma, order, tauk1) - betainc(sigma, order, tauk))
    mp = cp * (betainc(sigma + p, order, tauk1) - betainc(sigma + p, order, tauk))
    uk = (tk - a) ** p
    uk1 = (tk1 - a) ** p
    slope = (gk1 - gk) / (uk1 - uk)
    # G_model(t) = gk + slope*((t-a)^p - (tk-a)^p)
    return np.sum(gk * m0 + slope * (mp - uk * m0))


def _phi_values(nodes, values, sigma):
    """(t-t0)^{sigma-1} G at nodes, with a zero sentinel at t0 for sigma < 1."""
    if sigma == 1.0:
        return values
    s = nodes - nodes[0]
    with np.errstate(divide="ignore"):
        phi = np.where(s > 0.0, s ** (sigma - 1.0), 0.0) * values
    return phi


def _eval_single(order, sigma, nodes, values, phi, x, upto, kb, p=1.0):
    """One target x >= nodes[upto], integrating over panels 0..upto-1."""
    a = nodes[0]
    val = 0.0
    if kb > 0:
        val += _beta_panel_sum(
            order, sigma, a, x,
            nodes[:kb], nodes[1:kb + 1], values[:kb], values[1:kb + 1], p,
        )
    if upto > kb:
        val += _plain_panel_sum(
            order, x,
            nodes[kb:upto], nodes[kb + 1:upto + 1], phi[kb:upto], phi[kb + 1:upto + 1],
        )
    return val


def _is_uniform(nodes: np.ndarray) -> bool:
    d = np.diff(nodes)
    h = d[0]
    return bool(np.all(np.abs(d - h) <= 1e-12 * abs(h)))


def _convolve_uniform(order, sigma, nodes, values, kbeta, p=1.0):
    """All-node evaluation on a uniform mesh via discrete convolution."""
    n = nodes.size
    h = (nodes[-1] - nodes[0]) / (n - 1)
    phi = _phi_values(nodes, values, sigma)
    d = np.arange(n + 1, dtype=float)
    pw = d**order
    m0 = np.zeros(n + 1)
    m0[1:] = (pw[1:] - pw[:-1]) * h**order / order
    pw1 = d ** (order + 1.0)
    mu = np.zeros(n + 1)
    mu[1:] = (pw1[1:] - pw1[:-1]) * h ** (order + 1.0) / (order + 1.0)
    # panel [t_k, t_{k+1}], target i, lag dd = i-k:
    #   contribution = phi_k * A[dd] + phi_{k+1} * B[dd]
    A = (1.0 - d) * m0 + mu / h
    B = d * m0 - mu / h
    convA = np.convolve(phi, A)
    convB = np.convolve(phi, B)
    out = np.zeros(n)
    # convB[i+1] picks up a spurious j=0 term phi_0 * B[i+1]; remove it
    out[1:] = convA[1:n] + convB[2:n + 1] - phi[0] * B[2:n + 1]

    if kbeta > 0:
        # swap the near-endpoint panels to exact doubly-weighted moments
        a = nodes[0]
        c0 = np.exp(_log_beta(sigma, order))
        cp = np.exp(_log_beta(sigma + p, order))
        for k in range(min(kbeta, n - 1)):
            i = np.arange(k + 1, n)
            x = nodes[i]
            L = x - a
            tauk = (nodes[k] - a) / L
            tauk1 = np.minimum((nodes[k + 1] - a) / L, 1.0)
            bm0 = L ** (order + sigma - 1.0) * c0 * (
                betainc(sigma, order, tauk1) - betainc(sigma, order, tauk)
            )
            bmp = L ** (order + sigma + p - 1.0) * cp * (
                betainc(sigma + p, order, tauk1) - betainc(sigma + p, order, tauk)
            )
            uk = (nodes[k] - a) ** p
            uk1 = (nodes[k + 1] - a) ** p
            slope = (values[k + 1] - values[k]) / (uk1 - uk)
            beta_part = values[k] * bm0 + slope * (bmp - uk * bm0)
            pm0, pmrel = _plain_moments(order, x, nodes[k], nodes[k + 1])
            pslope = (phi[k + 1] - phi[k]) / (nodes[k + 1] - nodes[k])
            plain_part = phi[k] * pm0 + pslope * pmrel
            out[i] += beta_part - plain_part
    return out


def frac_convolve(
    order: float,
    nodes: np.ndarray,
    values: np.ndarray,
    sigma: float = 1.0,
    n_beta: int | None = None,
    interp_power: float = 1.0,
) -> np.ndarray:
    """J(x_i) for every mesh node x_i (J(x_0) = 0).

    ``values`` are companion samples G(t_i); the represented integrand is
    (t - t0)^{sigma-1} G(t).  On near-endpoint panels the companion is
    interpolated linearly in (t - t0)^{interp_power}, which lets callers
    whose companions carry a known leading power integrate it exactly.
    The gamma-function normalization of a fractional integral is NOT
    applied here.
    """
    if order <= 0.0:
        raise ValueError(f"order must be > 0, got {order}")
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    n = nodes.size
    p = interp_power
    kbeta = _beta_budget(n - 1, sigma, n_beta, p)
    if _is_uniform(nodes):
        return _convolve_uniform(order, sigma, nodes, values, kbeta, p)
    phi = _phi_values(nodes, values, sigma)
    out = np.zeros(n)
    for i in range(1, n):
        out[i] = _eval_single(
            order, sigma, nodes, values, phi, nodes[i], i, min(i, kbeta), p
        )
    return out


def frac_convolve_tail(
    order: float,
    nodes: np.ndarray,
    values: np.ndarray,
    targets: np.ndarray,
    sigma: float = 1.0,
    n_beta: int | None = None,
    interp_power: float = 1.0,
) -> np.ndarray:
    """J(x) over the whole mesh range [t0, tM], for targets x >= tM."""
    if order <= 0.0:
        raise ValueError(f"order must be > 0, got {order}")
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if np.any(targets < nodes[-1] - 1e-12 * (nodes[-1] - nodes[0])):
        raise ValueError("tail targets must not precede the mesh end")
    n = nodes.size
    p = interp_power
    kbeta = _beta_budget(n - 1, sigma, n_beta, p)
    phi = _phi_values(nodes, values, sigma)
    out = np.empty(targets.size)
    for j, x in enumerate(targets):
        out[j] = _eval_single(
            order, sigma, nodes, values, phi, max(x, nodes[-1]), n - 1, kbeta, p
        )
    return out


def first_panel_gauss_jacobi(
    order: float,
    sigma: float,
    a: float,
    t1: float,
    g0: float,
    g1: float,
    x: float,
    npts: int = 16,
) -> float:
    """Gauss-Jacobi evaluation of the first panel, for cross-validation.

    Integrates (x-t)^{order-1} (t-a)^{sigma-1} G_lin(t) over [a, t1] with
    the (t-a) singularity absorbed into the rule's weight; when x == t1
    the (x-t) singularity is absorbed as well.
    """
    hp = t1 - a
    if x == t1:
        s, wts = roots_jacobi(npts, order - 1.0, sigma - 1.0)
        t = a + hp * (1.0 + s) / 2.0
        glin = g0 + (g1 - g0) * (t - a) / hp
        return float((hp / 2.0) ** (order + sigma - 1.0) * np.sum(wts * glin))
    s, wts = roots_jacobi(npts, 0.0, sigma - 1.0)
    t = a + hp * (1.0 + s) / 2.0
    glin = g0 + (g1 - g0) * (t - a) / hp
    f = (x - t) ** (order - 1.0) * glin
    return float((hp / 2.0) ** sigma * np.sum(wts * f))
