"""Gaussian-weighted quadrature over the complex plane and over disks.

Plane grids are tensor Gauss-Hermite rules in (x, y), rescaled so that the
rule is exact for polynomials against ``exp(-alpha |z|^2)``.  Their stored
``weights`` are plain area weights, i.e. ``sum(weights * h(nodes))``
approximates the Lebesgue integral of ``h``.

Disk grids are Gauss-Legendre in the squared radius times a uniform angular
rule, which integrates ``w**a * conj(w)**b`` exactly on a centred disk up to
the recorded ``exactness_degree``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

OVERFLOW_LIMIT = 1e300

Integrand = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


class QuadratureError(ValueError):
    """Raised for invalid grids or non-finite integrand values."""


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    tolerance: float
    alpha: float | None = None
    truncation_radius: float | None = None
    center: complex | None = None
    radius: float | None = None
    exactness_degree: int | None = None
    # tensor structure of a plane grid: 1-D nodes/weights and kept flat indices
    axis_nodes: np.ndarray | None = field(default=None, repr=False)
    axis_weights: np.ndarray | None = field(default=None, repr=False)
    tensor_index: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.nodes.shape != self.weights.shape or self.nodes.size < 1:
            raise QuadratureError("nodes and weights must be non-empty and of equal length")
        if not np.all(self.weights > 0):
            raise QuadratureError("all quadrature weights must be positive")
        if not np.all(np.isfinite(self.nodes)):
            raise QuadratureError("grid nodes must be finite")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self) -> int:
        return self.nodes.size

    @property
    def gaussian_weights(self) -> np.ndarray:
        """Weights against ``exp(-alpha |z|^2) dv`` (plane grids only)."""
        if self.kind != "plane":
            raise QuadratureError("gaussian_weights is defined for plane grids only")
        return self.weights * np.exp(-self.alpha * np.abs(self.nodes) ** 2)

    def require_tolerance(self, tol: float, who: str = "caller") -> None:
        """Fail loudly when ``tol`` is tighter than what this grid declares."""
        if tol < self.tolerance:
            raise QuadratureError(
                f"{who} requested tolerance {tol:g} but the {self.kind} grid "
                f"only declares {self.tolerance:g}"
            )


def truncation_radius_for(alpha: float, tail_tolerance: float) -> float:
    """Smallest R with (pi/alpha) exp(-alpha R^2) <= tail_tolerance."""
    val = math.log(math.pi / (alpha * tail_tolerance)) / alpha
    return math.sqrt(max(val, 0.0))


def build_plane_grid(alpha: float, points_per_axis: int = 120,
                     tail_tolerance: float = 1e-12) -> QuadratureGrid:
    if not alpha > 0:
        raise QuadratureError(f"alpha must be positive, got {alpha!r}")
    if not tail_tolerance > 0:
        raise QuadratureError(f"tail_tolerance must be positive, got {tail_tolerance!r}")
    if points_per_axis < 8:
        raise QuadratureError("points_per_axis must be at least 8")

    x, w = np.polynomial.hermite.hermgauss(points_per_axis)
    scale = 1.0 / math.sqrt(alpha)
    x = x * scale
    w = w * scale
    need = truncation_radius_for(alpha, tail_tolerance)
    extent = float(x.max())
    if extent < need:
        raise QuadratureError(
            f"{points_per_axis} points per axis reach |z| = {extent:.3f}, "
            f"below the radius {need:.3f} needed for tail tolerance {tail_tolerance:g}"
        )

    xx, yy = np.meshgrid(x, x, indexing="ij")
    z = (xx + 1j * yy).ravel()
    gw = np.outer(w, w).ravel()
    # corner nodes outside the inscribed disk carry weight below exp(-extent^2)
    idx = np.flatnonzero(np.abs(z) <= extent)
    z = z[idx]
    area_w = gw[idx] * np.exp(alpha * np.abs(z) ** 2)
    return QuadratureGrid(
        nodes=z,
        weights=area_w,
        kind="plane",
        tolerance=float(tail_tolerance),
        alpha=float(alpha),
        truncation_radius=extent,
        axis_nodes=x,
        axis_weights=w,
        tensor_index=idx,
    )


def build_disk_grid(center: complex, radius: float, points: int = 24) -> QuadratureGrid:
    """Product rule on B(center, radius); ``points`` is the radial node count."""
    if not radius > 0:
        raise QuadratureError(f"disk radius must be positive, got {radius!r}")
    if points < 1:
        raise QuadratureError("points must be >= 1")
    center = complex(center)
    if not (math.isfinite(center.real) and math.isfinite(center.imag)):
        raise QuadratureError("disk center must be finite")

    # u = rho^2 on [0, radius^2]; dv = (1/2) du dtheta
    t, wt = np.polynomial.legendre.leggauss(points)
    r2 = radius * radius
    u = 0.5 * r2 * (t + 1.0)
    wu = 0.5 * r2 * wt
    n_ang = 4 * points
    theta = 2.0 * np.pi * (np.arange(n_ang) + 0.5) / n_ang
    rho = np.sqrt(u)
    nodes = center + (rho[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = (0.5 * wu[:, None] * np.full(n_ang, 2.0 * np.pi / n_ang)[None, :]).ravel()
    return QuadratureGrid(
        nodes=nodes,
        weights=weights,
        kind="disk",
        tolerance=1e-10,
        center=center,
        radius=float(radius),
        exactness_degree=min(4 * points - 2, n_ang - 1),
    )


def evaluate_on(grid: QuadratureGrid, integrand: Integrand) -> np.ndarray:
    """Evaluate ``integrand`` at the grid nodes, rejecting non-finite values."""
    if callable(integrand):
        vals = np.asarray(integrand(grid.nodes))
    else:
        vals = np.asarray(integrand)
    if vals.shape[0] != grid.nodes.size:
        raise QuadratureError(
            f"integrand has {vals.shape[0]} values for {grid.nodes.size} nodes"
        )
    check_finite(vals, grid.nodes)
    return vals


def check_finite(vals: np.ndarray, nodes: np.ndarray) -> None:
    with np.errstate(invalid="ignore", over="ignore"):
        bad = ~np.isfinite(vals) | (np.abs(vals) > OVERFLOW_LIMIT)
    if np.any(bad):
        flat = np.argwhere(bad)[0]
        node = nodes[flat[0]]
        raise QuadratureError(
            f"non-finite integrand value {vals[tuple(flat)]!r} at node "
            f"{node.real:+.6g}{node.imag:+.6g}i"
        )


def integrate(grid: QuadratureGrid, integrand: Integrand):
    """Weighted sum of the integrand over the grid nodes.

    ``integrand`` is a vectorised callable or an array of node values; a 2-D
    array integrates each column.  Real input gives a real result.
    """
    vals = evaluate_on(grid, integrand)
    return np.tensordot(grid.weights, vals, axes=(0, 0))[()]


def disk_mean(grid: QuadratureGrid, integrand: Integrand):
    if grid.kind != "disk":
        raise QuadratureError("disk_mean needs a disk grid")
    return integrate(grid, integrand) / (math.pi * grid.radius ** 2)
