"""Reproducing kernels, the monomial basis, the projection P, Hankel operators
and square lattices for the Gaussian Fock space over C.

Conventions (n = 1):

* ``<w, z> = w * conj(z)``; ``K(w, z) = exp(alpha <w, z>)``.
* Norms use plain Lebesgue measure: ``||g||_{p,alpha}^p = int |g|^p exp(-alpha p |z|^2 / 2) dv``.
* ``P`` carries the factor ``alpha/pi`` so that it reproduces holomorphic
  functions: ``P F(z) = (alpha/pi) int K(z, w) F(w) exp(-alpha |w|^2) dv(w)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import gammaln

from .quad import QuadratureError, QuadratureGrid, check_finite, evaluate_on
from .symbols import SymbolFunction

EXP_LIMIT = 700.0
KERNEL_MARGIN = 2.0

PointFunction = Callable[[np.ndarray], np.ndarray]


class KernelRangeError(OverflowError):
    pass


@dataclass(frozen=True)
class FockParams:
    alpha: float = 1.0
    p: float = 2.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p!r}")


def _guard(exponent: np.ndarray) -> None:
    if np.any(np.abs(exponent) > EXP_LIMIT):
        raise KernelRangeError(
            f"kernel exponent {np.max(np.abs(exponent)):.1f} exceeds {EXP_LIMIT}"
        )


def kernel(z, w, alpha: float):
    """``K(w, z) = exp(alpha * w * conj(z))``, broadcasting over ``z`` and ``w``."""
    expo = alpha * np.asarray(w, dtype=complex) * np.conj(np.asarray(z, dtype=complex))
    _guard(expo)
    return np.exp(expo)[()]


def normalized_kernel(z: complex, alpha: float) -> PointFunction:
    """Return ``w -> k_z(w) = exp(alpha <w, z> - alpha |z|^2 / 2)``."""
    z = complex(z)
    half = 0.5 * alpha * abs(z) ** 2

    def k_z(w):
        expo = alpha * np.asarray(w, dtype=complex) * z.conjugate() - half
        _guard(expo)
        return np.exp(expo)

    return k_z


@dataclass(frozen=True)
class BasisTruncation:
    """Orthonormal monomials ``e_m(z) = c_m z^m`` of F^2_alpha, ``m = 0..M``."""

    alpha: float
    M: int

    @property
    def normalizers(self) -> np.ndarray:
        m = np.arange(self.M + 1)
        log_c = 0.5 * ((m + 1) * math.log(self.alpha) - math.log(math.pi) - gammaln(m + 1))
        return np.exp(log_c)

    def e(self, m: int) -> PointFunction:
        c = float(self.normalizers[m]) if m <= self.M else BasisTruncation(self.alpha, m).normalizers[m]
        return lambda z: c * np.asarray(z, dtype=complex) ** m

    def evaluate(self, z) -> np.ndarray:
        """Matrix ``[e_0(z), ..., e_M(z)]`` with one row per point."""
        z = np.asarray(z, dtype=complex).ravel()
        return self.normalizers[None, :] * z[:, None] ** np.arange(self.M + 1)[None, :]


def _check_grid(grid: QuadratureGrid, alpha: float) -> None:
    if grid.kind != "plane":
        raise QuadratureError("a plane grid is required")
    if not math.isclose(grid.alpha, alpha, rel_tol=1e-12):
        raise QuadratureError(
            f"plane grid was built for alpha={grid.alpha}, not alpha={alpha}"
        )


def project(f_times_g, z, params: FockParams, grid: QuadratureGrid):
    """Evaluate ``P(F)`` at the points ``z`` by quadrature of the kernel integral.

    ``f_times_g`` is a vectorised callable or an array of values at the grid nodes.
    """
    _check_grid(grid, params.alpha)
    alpha = params.alpha
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > grid.truncation_radius + KERNEL_MARGIN):
        raise KernelRangeError(
            f"refusing to evaluate P beyond |z| = {grid.truncation_radius + KERNEL_MARGIN:.3f}"
        )
    vals = evaluate_on(grid, f_times_g)
    u = grid.nodes
    gw = grid.gaussian_weights * vals
    flat = z.ravel()
    out = np.empty(flat.shape, dtype=complex)
    for s in range(0, flat.size, 256):
        expo = alpha * flat[s:s + 256, None] * np.conj(u)[None, :]
        _guard(expo)
        out[s:s + 256] = np.exp(expo) @ gw
    return ((alpha / math.pi) * out).reshape(z.shape)[()]


def project_on_grid(values: np.ndarray, grid: QuadratureGrid, alpha: float,
                    chunk: int = 8) -> np.ndarray:
    """``P`` applied to node values, evaluated back on the same plane grid.

    Uses ``exp(alpha w conj(u)) = exp(alpha x conj(u)) * exp(i alpha y conj(u))``
    for ``w = x + iy`` so the kernel factors over the tensor axes.
    ``values`` has shape ``(N,)`` or ``(N, k)``.
    """
    _check_grid(grid, alpha)
    vals = np.asarray(values, dtype=complex)
    single = vals.ndim == 1
    if single:
        vals = vals[:, None]
    check_finite(vals, grid.nodes)
    x = grid.axis_nodes
    n = x.size
    ubar = np.conj(grid.nodes)
    A = np.exp(alpha * x[:, None] * ubar[None, :])
    Bt = np.exp(1j * alpha * x[:, None] * ubar[None, :]).T
    gw = grid.gaussian_weights
    out = np.empty_like(vals)
    for s in range(0, vals.shape[1], chunk):
        block = vals[:, s:s + chunk] * gw[:, None]
        k = block.shape[1]
        # T[u, j, q] = block[u, j] * B[q, u]
        T = (block[:, :, None] * Bt[:, None, :]).reshape(len(ubar), k * n)
        R = (A @ T).reshape(n, k, n).transpose(1, 0, 2).reshape(k, n * n)
        out[:, s:s + k] = R[:, grid.tensor_index].T
    out *= alpha / math.pi
    return out[:, 0] if single else out


def hankel_apply(f: SymbolFunction, g: PointFunction, params: FockParams,
                 grid: QuadratureGrid) -> PointFunction:
    """Return ``w -> f(w) g(w) - P(f g)(w)``."""
    _check_grid(grid, params.alpha)
    fg_nodes = f(grid.nodes) * g(grid.nodes)

    def hfg(w):
        w = np.asarray(w, dtype=complex)
        return f(w) * g(w) - project(fg_nodes, w, params, grid)

    return hfg


def hankel_on_grid(f: SymbolFunction, g_values: np.ndarray, grid: QuadratureGrid,
                   alpha: float) -> np.ndarray:
    """Node values of ``H_f g`` for one or several inputs given by node values."""
    g_values = np.asarray(g_values, dtype=complex)
    fv = f(grid.nodes)
    fg = fv * g_values if g_values.ndim == 1 else fv[:, None] * g_values
    return fg - project_on_grid(fg, grid, alpha)


def lp_weights(grid: QuadratureGrid, params: FockParams) -> np.ndarray:
    """Area weights times ``exp(-alpha p |z|^2 / 2)``."""
    _check_grid(grid, params.alpha)
    return grid.weights * np.exp(-0.5 * params.alpha * params.p * np.abs(grid.nodes) ** 2)


def lp_norm(g, params: FockParams, grid: QuadratureGrid):
    """``||g||_{p,alpha}`` on the plane grid; 2-D node arrays give one norm per column."""
    vals = evaluate_on(grid, g)
    w = lp_weights(grid, params)
    mag = np.abs(vals) ** params.p
    return np.tensordot(w, mag, axes=(0, 0)) ** (1.0 / params.p)


# ---------------------------------------------------------------------------
# lattices


class LatticeError(ValueError):
    def __init__(self, message: str, witness: complex | None = None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True, eq=False)
class Lattice:
    delta: float
    points: np.ndarray
    bounding_radius: float
    cover_factor: float
    N: int
    b: float = 0.5

    def __len__(self) -> int:
        return self.points.size

    def nearest(self, count: int) -> np.ndarray:
        """The ``count`` lattice points closest to the origin, deterministically ordered."""
        order = np.lexsort((np.angle(self.points), np.round(np.abs(self.points), 12)))
        return self.points[order[:count]]

    def within(self, radius: float) -> np.ndarray:
        return np.abs(self.points) <= radius + 1e-12


def _probe_points(radius: float, spacing: float, max_per_axis: int = 600) -> np.ndarray:
    n = min(max_per_axis, int(math.ceil(2 * radius / spacing)) + 1)
    # offset avoids probes sitting exactly on lattice symmetry lines
    t = np.linspace(-radius, radius, n) + 1e-7 * math.pi
    xx, yy = np.meshgrid(t, t, indexing="ij")
    pr = (xx + 1j * yy).ravel()
    return pr[np.abs(pr) <= radius]


def build_lattice(delta: float, bounding_radius: float, cover_factor: float = 1.0) -> Lattice:
    """Square lattice ``delta (Z + iZ)`` restricted to ``|z| <= bounding_radius + delta``.

    Balls are open, ``B(a, r) = {|w - a| < r}``.  Disjointness of the
    ``delta/2`` balls, covering of the bounding disk by the ``delta`` balls and
    the overlap count ``N`` of the ``cover_factor * delta`` balls are verified
    on a probe grid.
    """
    if not (0 < delta <= bounding_radius):
        raise LatticeError(f"need 0 < delta <= bounding_radius, got {delta}, {bounding_radius}")
    if cover_factor < 1:
        raise LatticeError("cover_factor must be >= 1")
    k = int(math.floor((bounding_radius + delta) / delta + 1e-9))
    idx = np.arange(-k, k + 1)
    mm, nn = np.meshgrid(idx, idx, indexing="ij")
    pts = delta * (mm + 1j * nn).ravel()
    pts = pts[np.abs(pts) <= bounding_radius + delta + 1e-12 * delta]

    xy = np.column_stack([pts.real, pts.imag])
    tree = cKDTree(xy)
    if pts.size > 1:
        dmin, _ = tree.query(xy, k=2)
        if np.min(dmin[:, 1]) < delta * (1 - 1e-12):
            raise LatticeError("lattice points closer than delta")

    probes = _probe_points(bounding_radius, delta / 4)
    pxy = np.column_stack([probes.real, probes.imag])
    shrink = 1 - 1e-12
    cover = tree.query_ball_point(pxy, r=delta * shrink, return_length=True)
    if np.any(cover < 1):
        w = probes[np.argmax(cover < 1)]
        raise LatticeError(f"probe {w:.6g} is not covered by the delta-balls", witness=w)
    counts = tree.query_ball_point(pxy, r=cover_factor * delta * shrink, return_length=True)
    # probes in one fundamental cell near the origin pin down N for the periodic lattice
    t = delta * (np.arange(64) + 0.5) / 64
    cell = (t[:, None] + 1j * t[None, :]).ravel()
    cell_counts = tree.query_ball_point(np.column_stack([cell.real, cell.imag]),
                                        r=cover_factor * delta * shrink, return_length=True)
    N = int(max(counts.max(), cell_counts.max()))
    return Lattice(delta=float(delta), points=pts, bounding_radius=float(bounding_radius),
                   cover_factor=float(cover_factor), N=N)


def kernel_gram(points: Sequence[complex], alpha: float) -> np.ndarray:
    """Gram matrix ``<k_{z_j}, k_{z_i}>`` in ``L^2_alpha`` with Lebesgue measure."""
    z = np.asarray(points, dtype=complex)
    expo = alpha * (z[:, None] * np.conj(z)[None, :]
                    - 0.5 * np.abs(z)[:, None] ** 2 - 0.5 * np.abs(z)[None, :] ** 2)
    return (math.pi / alpha) * np.exp(expo)


# ---------------------------------------------------------------------------
# Hankel columns


@dataclass(frozen=True, eq=False)
class HankelColumns:
    """Node values of ``H_f x_k`` for an input family, with their ``L^p_alpha`` norms."""

    values: np.ndarray          # shape (N, k)
    labels: tuple[str, ...]
    params: FockParams
    grid: QuadratureGrid

    @property
    def norms(self) -> np.ndarray:
        return np.atleast_1d(lp_norm(self.values, self.params, self.grid))

    def to_sequence(self):
        """Columns as a :class:`~focklab.summing.VectorSequence` in discretised ``L^p_alpha``."""
        from .summing import HILBERT, LP_GRID, VectorSequence

        w = lp_weights(self.grid, self.params)
        if self.params.p == 2:
            return VectorSequence((self.values * np.sqrt(w)[:, None]).T, HILBERT)
        return VectorSequence(self.values.T, LP_GRID, self.params.p, w)


def basis_columns(f: SymbolFunction, M: int, params: FockParams,
                  grid: QuadratureGrid) -> HankelColumns:
    """``H_f e_m`` for ``m = 0..M``."""
    E = BasisTruncation(params.alpha, M).evaluate(grid.nodes)
    if f.is_holomorphic:
        vals = np.zeros_like(E)
    else:
        vals = hankel_on_grid(f, E, grid, params.alpha)
    return HankelColumns(vals, tuple(f"e_{m}" for m in range(M + 1)), params, grid)


def kernel_columns(f: SymbolFunction, points: Sequence[complex], params: FockParams,
                   grid: QuadratureGrid) -> HankelColumns:
    """``H_f k_{z_j}`` for the given centres."""
    pts = np.asarray(points, dtype=complex)
    Kv = np.column_stack([normalized_kernel(z, params.alpha)(grid.nodes) for z in pts])
    if f.is_holomorphic:
        vals = np.zeros_like(Kv)
    else:
        vals = hankel_on_grid(f, Kv, grid, params.alpha)
    return HankelColumns(vals, tuple(f"k_{z:.6g}" for z in pts), params, grid)
