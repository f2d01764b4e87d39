"""Local distance to holomorphic functions and IDA seminorms.

``G_{p,r}(f)(z)`` is approximated by the best polynomial approximation of
degree ``<= D`` in ``w - z`` on the disk ``B(z, r)``, measured in the
normalised local ``L^p`` norm.  ``p = 2`` is a weighted least-squares
problem; other exponents use iteratively reweighted least squares.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .fock import Lattice
from .quad import QuadratureGrid, build_disk_grid, check_finite
from .symbols import SymbolFunction

IRLS_EPS = 1e-10
IRLS_MAX_ITER = 200
IRLS_RTOL = 1e-9
CONVERGED, DIVERGENT, UNRESOLVED = "CONVERGED", "DIVERGENT", "UNRESOLVED"
CONVERGENCE_RTOL = 0.01
DIVERGENCE_GROWTH = 0.05


class IRLSConvergenceError(RuntimeError):
    def __init__(self, message, coefficients, history):
        super().__init__(message)
        self.coefficients = coefficients
        self.history = history


def default_disk_points(f: SymbolFunction, D: int) -> int:
    need = 2 * D + f.max_degree
    return max(16, (need + 2) // 4 + 4)


@dataclass(frozen=True)
class _LocalProblem:
    """Design matrix for polynomial approximation on a disk centred at 0."""

    offsets: np.ndarray      # disk nodes relative to the centre
    weights: np.ndarray
    r: float
    D: int

    @classmethod
    def build(cls, r: float, D: int, points: int, f: SymbolFunction | None = None):
        grid = build_disk_grid(0j, r, points)
        need = 2 * D + (f.max_degree if f is not None else 0)
        if grid.exactness_degree < need:
            raise ValueError(
                f"disk grid exactness {grid.exactness_degree} < 2D + degree = {need}"
            )
        return cls(grid.nodes, grid.weights, float(r), int(D))

    @property
    def design(self) -> np.ndarray:
        return (self.offsets[:, None] / self.r) ** np.arange(self.D + 1)[None, :]

    @property
    def area(self) -> float:
        return math.pi * self.r ** 2


def _values(f: SymbolFunction, centers: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    w = centers[:, None] + offsets[None, :]
    vals = f(w)
    check_finite(vals, w.ravel())
    return vals


def _ls_residuals(prob: _LocalProblem, vals: np.ndarray) -> np.ndarray:
    """Residuals of the weighted least-squares fit, one row per centre."""
    sw = np.sqrt(prob.weights)
    A = sw[:, None] * prob.design
    # pseudo-inverse gives the minimum-norm solution when A is rank deficient
    pinv = np.linalg.pinv(A, rcond=1e-13)
    rhs = vals * sw[None, :]
    coef = rhs @ pinv.T
    return vals - coef @ prob.design.T


def _irls(prob: _LocalProblem, vals: np.ndarray, p: float) -> tuple[np.ndarray, np.ndarray]:
    V = prob.design
    W = prob.weights
    coef = np.linalg.lstsq(np.sqrt(W)[:, None] * V, np.sqrt(W) * vals, rcond=None)[0]
    res = vals - V @ coef
    obj = float(np.sum(W * np.abs(res) ** p))
    history = [obj]
    scale = float(np.sum(W * np.abs(vals) ** p))
    # plain IRLS oscillates for p > 2; a 1/(p-1) step restores convergence
    step = 1.0 if p <= 2 else 1.0 / (p - 1.0)
    for _ in range(IRLS_MAX_ITER):
        if obj <= 1e-300 or obj <= 1e-30 * scale:
            return res, coef
        omega = W * np.maximum(np.abs(res), IRLS_EPS) ** (p - 2.0)
        so = np.sqrt(omega)
        target = np.linalg.lstsq(so[:, None] * V, so * vals, rcond=None)[0]
        coef = coef + step * (target - coef)
        res = vals - V @ coef
        new = float(np.sum(W * np.abs(res) ** p))
        history.append(new)
        if abs(obj - new) <= IRLS_RTOL * max(obj, 1e-300):
            return res, coef
        obj = new
    raise IRLSConvergenceError(
        f"IRLS did not reach relative change {IRLS_RTOL:g} in {IRLS_MAX_ITER} iterations",
        coef, history,
    )


def _check_degree(f: SymbolFunction, D: int) -> None:
    if D < 2 * f.max_zbar_degree + 2:
        warnings.warn(
            f"polynomial degree D={D} is below 2*(conj(z)-degree)+2="
            f"{2 * f.max_zbar_degree + 2}; G may be overestimated",
            stacklevel=3,
        )


def local_deviations(f: SymbolFunction, centers, p: float = 2.0, r: float = 1.0,
                     D: int = 8, points: int | None = None, method: str = "auto",
                     chunk: int = 512) -> np.ndarray:
    """``G_{p,r}(f)`` at many centres (vectorised for ``p = 2``)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if not r > 0:
        raise ValueError("r must be positive")
    _check_degree(f, D)
    centers = np.atleast_1d(np.asarray(centers, dtype=complex))
    prob = _LocalProblem.build(r, D, points or default_disk_points(f, D), f)
    out = np.empty(centers.size)
    if f.is_holomorphic:
        out[:] = 0.0
        return out
    use_ls = method == "lstsq" or (method == "auto" and p == 2)
    for s in range(0, centers.size, chunk):
        c = centers[s:s + chunk]
        vals = _values(f, c, prob.offsets)
        if use_ls:
            res = _ls_residuals(prob, vals)
            out[s:s + chunk] = (np.abs(res) ** p @ prob.weights / prob.area) ** (1 / p)
        else:
            for i in range(c.size):
                res, _ = _irls(prob, vals[i], p)
                out[s + i] = (np.sum(prob.weights * np.abs(res) ** p) / prob.area) ** (1 / p)
    return out


def local_deviation(f: SymbolFunction, z: complex, p: float = 2.0, r: float = 1.0,
                    D: int = 8, points: int | None = None, method: str = "auto") -> float:
    """Best local ``L^p`` distance on ``B(z, r)`` from ``f`` to polynomials of degree ``<= D``."""
    return float(local_deviations(f, [z], p, r, D, points, method)[0])


def local_mean(f: SymbolFunction, z: complex, p: float = 2.0, r: float = 1.0,
               points: int = 24, grid: QuadratureGrid | None = None) -> float:
    """``(|B(z,r)|^{-1} int_{B(z,r)} |f|^p dv)^{1/p}``."""
    if grid is None:
        grid = build_disk_grid(z, r, points)
    vals = f(grid.nodes)
    check_finite(vals, grid.nodes)
    return float((grid.weights @ np.abs(vals) ** p / (math.pi * grid.radius ** 2)) ** (1 / p))


# ---------------------------------------------------------------------------
# lattice aggregation


def classify_growth(radii: Sequence[float], sums: Sequence[float], s: float) -> str:
    """Convergence verdict from partial sums at increasing radii.

    CONVERGED: the seminorm moves by < 1% between the last two radii.
    DIVERGENT: the partial sum grows by > 5% between the last two radii.
    """
    if len(sums) < 2:
        return UNRESOLVED
    a, b = float(sums[-2]), float(sums[-1])
    if b == 0.0:
        return CONVERGED
    na, nb = a ** (1 / s), b ** (1 / s)
    if abs(nb - na) <= CONVERGENCE_RTOL * nb:
        return CONVERGED
    if a == 0.0 or b / a - 1.0 > DIVERGENCE_GROWTH:
        return DIVERGENT
    return UNRESOLVED


def growth_slope(radii: Sequence[float], sums: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of partial sums against ``log R`` and its standard error."""
    x = np.log(np.asarray(radii, dtype=float))
    y = np.asarray(sums, dtype=float)
    n = x.size
    if n < 3:
        raise ValueError("need at least three radii for a slope standard error")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean()) / sxx)
    resid = y - (y.mean() + slope * xc)
    se = math.sqrt(float(resid @ resid) / (n - 2) / sxx)
    return slope, se


def lattice_sum_norm(values: np.ndarray, delta: float, q: float) -> float:
    """``(sum_j v_j^q delta^2)^{1/q}``: the Riemann-sum ``L^q(dv)`` norm."""
    return float((np.sum(np.asarray(values) ** q) * delta ** 2) ** (1 / q))


@dataclass
class IdaProfile:
    lattice: Lattice
    p: float
    r: float
    D: int
    values: np.ndarray
    radii: tuple[float, ...]
    partial_sums: dict[float, np.ndarray] = field(default_factory=dict)

    def norm(self, s: float, radius: float | None = None) -> float:
        radius = self.radii[-1] if radius is None else radius
        vals = self.values[self.lattice.within(radius)]
        return lattice_sum_norm(vals, self.lattice.delta, s)

    def status(self, s: float) -> str:
        return classify_growth(self.radii, self.partial_sums[s], s)

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re_z", "im_z", "G_value", "s", "partial_sum_radius", "partial_sum_value"])
        for z, g in zip(self.lattice.points, self.values):
            w.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(g)), "", "", ""])
        for s, sums in self.partial_sums.items():
            for R, S in zip(self.radii, sums):
                w.writerow(["", "", "", repr(float(s)), repr(float(R)), repr(float(S))])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def ida_profile(f: SymbolFunction, p: float, r: float, lattice: Lattice, D: int = 8,
                s_values: Iterable[float] = (2.0,), radii: Sequence[float] | None = None,
                method: str = "auto") -> IdaProfile:
    R = lattice.bounding_radius
    radii = tuple(sorted(radii)) if radii is not None else (R / 4, R / 2, R)
    inside = lattice.within(max(radii))
    values = np.zeros(lattice.points.size)
    values[inside] = local_deviations(f, lattice.points[inside], p, r, D, method=method)
    prof = IdaProfile(lattice, p, r, D, values, radii)
    absz = np.abs(lattice.points)
    for s in s_values:
        prof.partial_sums[float(s)] = np.array(
            [np.sum(values[absz <= Rk + 1e-12] ** s) for Rk in radii])
    return prof


@dataclass(frozen=True)
class IdaResult:
    value: float
    status: str
    profile: IdaProfile


def ida_norm(f: SymbolFunction, s: float, p: float, r: float, lattice: Lattice,
             D: int = 8, radii: Sequence[float] | None = None,
             method: str = "auto") -> IdaResult:
    """Lattice estimate of ``||G_{p,r}(f)||_{L^s(dv)}`` with a growth verdict."""
    if not s > 0:
        raise ValueError("s must be positive")
    prof = ida_profile(f, p, r, lattice, D, (s,), radii, method)
    return IdaResult(prof.norm(s), prof.status(float(s)), prof)


@dataclass(frozen=True)
class RatioReport:
    first: float
    second: float
    ratio: float

    def within(self, lo: float, hi: float) -> bool:
        return lo <= self.ratio <= hi


def safe_ratio(a: float, b: float) -> float:
    """``a / b`` with ``0 / 0`` reported as 1."""
    if a == 0.0 and b == 0.0:
        return 1.0
    if b == 0.0:
        return math.inf
    return a / b


def r_independence_check(f: SymbolFunction, s: float, p: float, r1: float, r2: float,
                         lattice: Lattice, D: int = 8) -> RatioReport:
    for r in (r1, r2):
        if not 0.5 <= r <= 2.0:
            raise ValueError(f"radius {r} outside [1/2, 2]")
    a = ida_norm(f, s, p, r1, lattice, D).value
    b = ida_norm(f, s, p, r2, lattice, D).value
    return RatioReport(a, b, safe_ratio(a, b))
