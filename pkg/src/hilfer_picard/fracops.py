"""Fractional integral and derivative operators on weighted grid functions.

The integral operator is the convolution with kernel (x-t)^{order-1} /
gamma(order) from the left endpoint; derivatives are grid derivatives of
the complementary integral.  The two-parameter derivative composes an
inner integral, one ordinary derivative and an outer integral; applied
to functions of the natural solution class every intermediate stays
representable in the weighted companion format.

All operations are pure transformations of immutable inputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .meshes import Mesh, WeightedGridFunction, weighted_norm
from .quadrature import DEFAULT_TOL_QUAD, frac_convolve
from .special import gamma as gamma_fn

__all__ = [
    "FracOrder",
    "rl_integral",
    "rl_derivative",
    "hilfer_derivative",
    "residual",
    "DEFAULT_TOL_QUAD",
]

# Exponent floor below which a derivative result is re-represented as a
# bounded function; see _derivative_exponent.
_EXPONENT_FLOOR = 0.05

DEFAULT_RESIDUAL_LAYER = 0.05


@dataclass(frozen=True)
class FracOrder:
    """Derivative order alpha in (0,1) and interpolation type beta in [0,1].

    gamma_w = alpha + beta_type*(1-alpha) is the composite exponent that
    governs both the initial-condition weight and the solution's
    endpoint behavior (x-a)^{gamma_w - 1}.
    """

    alpha: float
    beta_type: float
    gamma_w: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 <= self.beta_type <= 1.0:
            raise ValueError(f"beta_type must lie in [0, 1], got {self.beta_type}")
        object.__setattr__(
            self, "gamma_w", self.alpha + self.beta_type * (1.0 - self.alpha)
        )


def _clamp_curve(p: float) -> float:
    return float(min(1.0, max(p, 0.05)))


def rl_integral(
    order: float, g: WeightedGridFunction, interp_power: float | None = None
) -> WeightedGridFunction:
    """Left-sided fractional integral of order ``order`` of g.

    The result carries weight exponent min(1, sigma + order); above 1
    the companion itself carries the extra smoothness, recorded in its
    curve_power.  Exact (to roundoff) for companions linear between
    nodes in (x-a)^{interp_power}, including the pure powers
    (x-a)^{sigma-1}; by default the interpolation abscissa follows the
    input's curve_power.
    """
    if order <= 0.0:
        raise ValueError(f"order must be > 0, got {order}")
    sigma = g.gamma_w
    nodes = g.mesh.nodes
    p = g.curve_power if interp_power is None else interp_power
    raw = frac_convolve(
        order, nodes, g.w, sigma=sigma, interp_power=p
    ) / gamma_fn(order)
    g_out = min(1.0, sigma + order)
    out = np.empty_like(raw)
    s = nodes - nodes[0]
    if g_out == 1.0:
        out[1:] = raw[1:]
    else:
        out[1:] = s[1:] ** (1.0 - g_out) * raw[1:]
    # companion limit at the left endpoint
    if sigma + order <= 1.0:
        out[0] = gamma_fn(sigma) / gamma_fn(sigma + order) * g.w[0]
    else:
        out[0] = 0.0
    # leading fractional powers of the output companion: the input's
    # constant term maps to (x-a)^{sigma+order-g_out}, its curvature term
    # to (x-a)^{sigma+order-g_out+curve_power}; keep whichever terms are
    # actually present and fractional
    shift = sigma + order - g_out
    candidates = []
    if abs(g.w[0]) > 1e-12 * max(np.max(np.abs(g.w)), 1e-300) and 0.0 < shift < 1.0:
        candidates.append(shift)
    if g.curve_power < 1.0 and 0.0 < shift + g.curve_power < 1.0:
        candidates.append(shift + g.curve_power)
    curve_out = _clamp_curve(min(candidates)) if candidates else 1.0
    return WeightedGridFunction(g.mesh, g_out, out, curve_out)


def _grid_derivative(nodes: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Three-point second-order derivative on a possibly nonuniform grid."""
    n = nodes.size
    if n < 3:
        raise ValueError("grid derivative needs at least 3 nodes")
    d = np.empty(n)
    hm = nodes[1:-1] - nodes[:-2]
    hp = nodes[2:] - nodes[1:-1]
    d[1:-1] = (
        -hp / (hm * (hm + hp)) * w[:-2]
        + (hp - hm) / (hm * hp) * w[1:-1]
        + hm / (hp * (hm + hp)) * w[2:]
    )
    h0, h1 = nodes[1] - nodes[0], nodes[2] - nodes[1]
    d[0] = (
        -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * w[0]
        + (h0 + h1) / (h0 * h1) * w[1]
        - h0 / (h1 * (h0 + h1)) * w[2]
    )
    hL, hM = nodes[-1] - nodes[-2], nodes[-2] - nodes[-3]
    d[-1] = (
        (2.0 * hL + hM) / (hL * (hL + hM)) * w[-1]
        - (hL + hM) / (hL * hM) * w[-2]
        + hL / (hM * (hL + hM)) * w[-3]
    )
    return d


def _grid_derivative_power(nodes: np.ndarray, w: np.ndarray, p: float) -> np.ndarray:
    """dW/dx through differencing in the abscissa u = (x-a)^p.

    Companions of the natural solution class expand in powers of
    (x-a)^p, so they are locally quadratic in u and the three-point
    formulas capture them exactly near the endpoint, where differencing
    in x would have an O(1) relative error at any resolution.  The entry
    at the endpoint itself is left at 0 (the chain factor is singular
    and no caller consumes it).
    """
    if p == 1.0:
        return _grid_derivative(nodes, w)
    u = (nodes - nodes[0]) ** p
    dwdu = _grid_derivative(u, w)
    out = np.empty_like(dwdu)
    out[0] = 0.0
    out[1:] = dwdu[1:] * p * (nodes[1:] - nodes[0]) ** (p - 1.0)
    return out


def _warn_if_flat(w: np.ndarray, where: str) -> None:
    scale = np.max(np.abs(w))
    if scale == 0.0:
        return
    steps = np.abs(np.diff(w))
    if np.max(steps) < 64.0 * np.finfo(float).eps * scale:
        warnings.warn(
            f"{where}: differencing nearly equal companion values; "
            "the grid derivative is dominated by rounding",
            RuntimeWarning,
            stacklevel=3,
        )


def _derivative_values(antider: WeightedGridFunction, ladder: float) -> np.ndarray:
    """Pointwise d/dx of the function represented by ``antider``.

    Differentiates the continuous companion (in the (x-a)^ladder
    abscissa) and assembles y' = (mu-1)(x-a)^{mu-2} W + (x-a)^{mu-1} W';
    entry 0 is not meaningful when the true derivative is unbounded at a
    and is never used by callers.
    """
    nodes = antider.mesh.nodes
    mu = antider.gamma_w
    w = antider.w
    _warn_if_flat(w, "grid derivative")
    dw = _grid_derivative_power(nodes, w, ladder)
    if mu == 1.0:
        return dw
    s = nodes - nodes[0]
    out = np.empty_like(dw)
    out[1:] = (mu - 1.0) * s[1:] ** (mu - 2.0) * w[1:] + s[1:] ** (mu - 1.0) * dw[1:]
    out[0] = 0.0
    return out


def _vanish_order(nodes: np.ndarray, w: np.ndarray) -> float:
    """Leading power with which the companion vanishes at the endpoint.

    0 when w(a) is significant.  A capped representation stores a pure
    power (x-a)^{s-1} with s > gamma_w as a vanishing companion; the
    local log-slope of the first nodes recovers the missing exponent.
    """
    scale = float(np.max(np.abs(w)))
    if scale == 0.0 or abs(w[0]) > 1e-9 * scale:
        return 0.0
    w1, w2 = abs(w[1]), abs(w[2])
    if w1 < 1e-12 * scale or w2 < 1e-12 * scale or w2 <= w1:
        return 0.0
    s1, s2 = nodes[1] - nodes[0], nodes[2] - nodes[0]
    r = (np.log(w2) - np.log(w1)) / (np.log(s2) - np.log(s1))
    return float(np.clip(r, 0.0, 3.0))


def _derivative_exponent(mu_eff: float, order_inverted: float, ladder: float):
    """Weight exponent and companion curvature for a derivative result.

    Differentiation of order ``order_inverted`` maps a pure power of
    exponent mu to mu - order.  When that lands at or below the floor
    (the annihilation regime: the leading power is killed), the next
    term of the natural expansion sits one ``ladder`` step higher.
    """
    nu = mu_eff - order_inverted
    if nu >= _EXPONENT_FLOOR:
        exponent = min(1.0, nu)
        curve = 1.0 if nu <= 1.0 else _clamp_curve(nu - 1.0)
        return exponent, curve
    exponent = float(np.clip(mu_eff + ladder - order_inverted, _EXPONENT_FLOOR, 1.0))
    return exponent, _clamp_curve(ladder)


def _pack_derivative(
    mesh: Mesh, dvals: np.ndarray, exponent: float, curve: float
) -> WeightedGridFunction:
    s = mesh.nodes - mesh.a
    out = np.empty_like(dvals)
    if exponent == 1.0:
        out[1:] = dvals[1:]
    else:
        out[1:] = s[1:] ** (1.0 - exponent) * dvals[1:]
    # companion limit at the endpoint by linear extrapolation in the
    # curvature abscissa (exact for the pure leading power)
    u1 = s[1] ** curve
    u2 = s[2] ** curve
    out[0] = out[1] - (out[2] - out[1]) * u1 / (u2 - u1)
    return WeightedGridFunction(mesh, exponent, out, curve)


def rl_derivative(order: float, f: WeightedGridFunction) -> WeightedGridFunction:
    """Fractional derivative of order in (0,1): d/dx of the (1-order)-integral.

    Accurate where the true derivative lies in the representable class;
    the first node carries an extrapolated companion value only.
    """
    if not 0.0 < order < 1.0:
        raise ValueError(f"order must lie in (0, 1), got {order}")
    antider = rl_integral(1.0 - order, f)
    dvals = _derivative_values(antider, antider.curve_power)
    mu_eff = f.gamma_w + _vanish_order(f.mesh.nodes, f.w)
    nu, curve = _derivative_exponent(mu_eff, order, order)
    return _pack_derivative(f.mesh, dvals, nu, curve)


def hilfer_derivative(ord: FracOrder, f: WeightedGridFunction) -> WeightedGridFunction:
    """Two-parameter derivative I^{beta(1-alpha)} d/dx I^{(1-beta)(1-alpha)} f."""
    alpha, beta = ord.alpha, ord.beta_type
    e_inner = (1.0 - beta) * (1.0 - alpha)
    e_outer = beta * (1.0 - alpha)
    inner = rl_integral(e_inner, f) if e_inner > 0.0 else f
    dvals = _derivative_values(inner, inner.curve_power)
    mu_eff = f.gamma_w + _vanish_order(f.mesh.nodes, f.w)
    mu_d, curve = _derivative_exponent(mu_eff, ord.gamma_w, alpha)
    core = _pack_derivative(f.mesh, dvals, mu_d, curve)
    if e_outer > 0.0:
        return rl_integral(e_outer, core)
    return core


def residual(
    spec,
    y: WeightedGridFunction,
    boundary_layer: float = DEFAULT_RESIDUAL_LAYER,
) -> float:
    """Weighted sup of D^{alpha,beta} y - f(x, y) over the mesh.

    Nodes with x - a < boundary_layer*(b - a) are excluded: grid
    differentiation next to the singular endpoint has an O(1) relative
    error at any resolution, so including that layer would measure the
    differencing scheme rather than the candidate solution.
    """
    from .rhs import eval_rhs  # local import to avoid a cycle

    ord_ = spec.ord
    mesh = y.mesh
    d = hilfer_derivative(ord_, y)
    nodes = mesh.nodes
    s = nodes - mesh.a
    cut = max(boundary_layer * (mesh.b - mesh.a), 0.0)
    keep = s >= max(cut, 1e-15 * (mesh.b - mesh.a))
    keep[0] = False
    xs = nodes[keep]
    sv = s[keep]
    yv = sv ** (y.gamma_w - 1.0) * y.w[keep] if y.gamma_w < 1.0 else y.w[keep]
    dv = sv ** (d.gamma_w - 1.0) * d.w[keep] if d.gamma_w < 1.0 else d.w[keep]
    fv = eval_rhs(spec.rhs, xs, yv)
    g = ord_.gamma_w
    return float(np.max(sv ** (1.0 - g) * np.abs(dv - fv)))
