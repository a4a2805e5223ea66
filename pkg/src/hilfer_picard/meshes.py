"""Meshes and weighted grid functions.

A function y on (a, b] that behaves like (x-a)^{gamma_w - 1} near a is
stored through its continuous companion w(x) = (x-a)^{1-gamma_w} y(x)
sampled at mesh nodes.  All arithmetic happens on w, so the endpoint
singularity never enters interpolation or norms.  Values are immutable
after construction and safe to share across threads.

The nodal max norm used here under-approximates the continuous sup norm
by a resolution-dependent amount; refinement tests quantify the gap.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import MeshMismatchError, OutOfDomainError, SingularEndpointError

__all__ = [
    "Mesh",
    "WeightedGridFunction",
    "eval_weighted",
    "eval_y",
    "weighted_norm",
    "weighted_distance",
    "write_solution_csv",
    "read_solution_csv",
]


@dataclass(frozen=True, eq=False)
class Mesh:
    """Strictly increasing nodes spanning [a, b]."""

    a: float
    b: float
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("mesh needs at least 2 nodes")
        if nodes[0] != self.a or nodes[-1] != self.b:
            raise ValueError("nodes must start at a and end at b")
        if not np.all(np.diff(nodes) > 0.0):
            raise ValueError("nodes must be strictly increasing")

    @staticmethod
    def uniform(a: float, b: float, n: int) -> "Mesh":
        return Mesh(a, b, np.linspace(a, b, n))

    def __len__(self) -> int:
        return self.nodes.size

    def same_as(self, other: "Mesh") -> bool:
        return (
            self.nodes.size == other.nodes.size
            and bool(np.array_equal(self.nodes, other.nodes))
        )


@dataclass(frozen=True, eq=False)
class WeightedGridFunction:
    """Companion samples w_i ~ (x_i - a)^{1 - gamma_w} y(x_i).

    gamma_w = 1 stores plain function values.  ``curve_power`` records
    the smallest fractional power in the companion's expansion around
    the left endpoint (1.0 when the companion is smooth there); the
    integral operators interpolate in (x-a)^{curve_power} so that
    leading term integrates exactly.
    """

    mesh: Mesh
    gamma_w: float
    w: np.ndarray
    curve_power: float = 1.0

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "gamma_w", float(self.gamma_w))
        object.__setattr__(self, "curve_power", float(self.curve_power))
        if not 0.0 < self.gamma_w <= 1.0:
            raise ValueError(f"gamma_w must lie in (0, 1], got {self.gamma_w}")
        if not 0.0 < self.curve_power <= 1.0:
            raise ValueError(
                f"curve_power must lie in (0, 1], got {self.curve_power}"
            )
        if w.shape != self.mesh.nodes.shape:
            raise ValueError(
                f"w has {w.size} entries for {self.mesh.nodes.size} nodes"
            )
        if not np.all(np.isfinite(w)):
            raise ValueError("companion values must be finite")


def _check_range(f: WeightedGridFunction, x: np.ndarray) -> None:
    slop = 1e-12 * (f.mesh.b - f.mesh.a)
    if np.any(x < f.mesh.a - slop) or np.any(x > f.mesh.b + slop):
        raise OutOfDomainError(
            f"x outside [{f.mesh.a}, {f.mesh.b}]"
        )


def eval_weighted(f: WeightedGridFunction, x):
    """Piecewise-linear interpolant of the companion; exact at nodes."""
    xa = np.asarray(x, dtype=float)
    _check_range(f, xa)
    out = np.interp(xa, f.mesh.nodes, f.w)
    return float(out) if np.isscalar(x) or xa.ndim == 0 else out


def eval_y(f: WeightedGridFunction, x):
    """Function value (x-a)^{gamma_w - 1} * w(x); singular at x=a when gamma_w < 1."""
    xa = np.asarray(x, dtype=float)
    _check_range(f, xa)
    if f.gamma_w < 1.0 and np.any(xa <= f.mesh.a):
        raise SingularEndpointError(
            f"y is unbounded at x={f.mesh.a} for gamma_w={f.gamma_w} < 1"
        )
    wv = np.interp(xa, f.mesh.nodes, f.w)
    out = (xa - f.mesh.a) ** (f.gamma_w - 1.0) * wv if f.gamma_w < 1.0 else wv
    return float(out) if np.isscalar(x) or xa.ndim == 0 else out


def weighted_norm(f: WeightedGridFunction) -> float:
    """Nodal max of |w|; the grid version of the weighted sup norm."""
    return float(np.max(np.abs(f.w)))


def weighted_distance(f: WeightedGridFunction, g: WeightedGridFunction) -> float:
    """Metric max_i |f.w_i - g.w_i| on a shared mesh and weight exponent."""
    if f.gamma_w != g.gamma_w:
        raise MeshMismatchError(
            f"weight exponents differ: {f.gamma_w} vs {g.gamma_w}"
        )
    if not f.mesh.same_as(g.mesh):
        raise MeshMismatchError("grid functions live on different meshes")
    return float(np.max(np.abs(f.w - g.w)))


# --- CSV serialization -------------------------------------------------

_CSV_HEADER = "x,w,y"


def _fmt(v: float) -> str:
    # 17 significant digits round-trip binary64 exactly
    return format(v, ".17g")


def write_solution_csv(f: WeightedGridFunction, path: str) -> None:
    """Write header x,w,y; y is left empty at x=a when gamma_w < 1.

    The write is atomic (temp file + rename).
    """
    lines = [_CSV_HEADER]
    for i, x in enumerate(f.mesh.nodes):
        if i == 0 and f.gamma_w < 1.0:
            ystr = ""
        else:
            yv = f.w[i] if f.gamma_w == 1.0 else (x - f.mesh.a) ** (f.gamma_w - 1.0) * f.w[i]
            ystr = _fmt(yv)
        lines.append(f"{_fmt(x)},{_fmt(f.w[i])},{ystr}")
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


def read_solution_csv(
    path: str, gamma_w: float, curve_power: float = 1.0
) -> WeightedGridFunction:
    """Rebuild a grid function from x,w,y rows; y is redundant and ignored."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0].split(",")[:2] != ["x", "w"]:
        raise ValueError(f"{path}: missing x,w,y header")
    if len(lines) < 3:
        raise ValueError(f"{path}: need at least 2 data rows")
    xs = []
    ws = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) < 2:
            raise ValueError(f"{path}: malformed row {ln!r}")
        xs.append(float(parts[0]))
        ws.append(float(parts[1]))
    nodes = np.array(xs)
    mesh = Mesh(nodes[0], nodes[-1], nodes)
    return WeightedGridFunction(mesh, gamma_w, np.array(ws), curve_power)
