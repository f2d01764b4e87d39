"""Averaged functions, Berezin transforms and summing embeddings for measures on C.

Balls are closed when counting atoms (an atom on the boundary counts as
inside), which keeps atom tests deterministic.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .fock import Lattice, kernel_gram
from .ida import classify_growth, lattice_sum_norm, safe_ratio
from .quad import build_disk_grid, build_plane_grid, check_finite
from .summing import (LOWER_BOUND, PiEstimate, RademacherDraw, khintchine_upper_constant,
                      sign_patterns)
from .symbols import SymbolFunction, parse_symbol

DENSITY, ATOMS = "density", "atoms"


@dataclass(frozen=True, eq=False)
class MeasureSample:
    """A positive measure: ``c |g(w - shift)|^power dv`` (optionally cut to a disk) or atoms."""

    kind: str
    symbol: SymbolFunction | None = None
    power: float = 1.0
    support_radius: float | None = None
    shift: complex = 0j
    factor: float = 1.0
    points: np.ndarray | None = None
    masses: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == DENSITY:
            if self.symbol is None or not self.power > 0:
                raise ValueError("a density needs a symbol and a positive power")
            if self.factor < 0:
                raise ValueError("density factor must be nonnegative")
        elif self.kind == ATOMS:
            pts = np.atleast_1d(np.asarray(self.points, dtype=complex))
            ms = np.atleast_1d(np.asarray(self.masses, dtype=float))
            if pts.shape != ms.shape:
                raise ValueError("atoms need one mass per point")
            if np.any(ms <= 0):
                raise ValueError("atom masses must be positive")
            object.__setattr__(self, "points", pts)
            object.__setattr__(self, "masses", ms)
        else:
            raise ValueError(f"unknown measure kind {self.kind!r}")

    @classmethod
    def density(cls, symbol: SymbolFunction | str, power: float = 1.0,
                support_radius: float | None = None) -> MeasureSample:
        if isinstance(symbol, str):
            symbol = parse_symbol(symbol)
        return cls(DENSITY, symbol=symbol, power=float(power), support_radius=support_radius)

    @classmethod
    def lebesgue(cls, support_radius: float | None = None) -> MeasureSample:
        return cls.density(SymbolFunction.constant(1.0), 1.0, support_radius)

    @classmethod
    def atoms(cls, points, masses) -> MeasureSample:
        return cls(ATOMS, points=points, masses=masses)

    @classmethod
    def zero(cls) -> MeasureSample:
        return cls.density(SymbolFunction(), 1.0)

    @classmethod
    def from_csv(cls, path: str | Path) -> MeasureSample:
        pts, ms = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    re_, im_, m = (float(v) for v in row[:3])
                except ValueError:
                    continue  # header line
                pts.append(complex(re_, im_))
                ms.append(m)
        return cls.atoms(pts, ms)

    @classmethod
    def parse(cls, spec: str) -> MeasureSample:
        """``file.csv`` for atoms, or ``<symbol>^<power>[@<support radius>]`` for densities."""
        spec = spec.strip()
        if spec.endswith(".csv"):
            return cls.from_csv(spec)
        support = None
        if "@" in spec:
            spec, rad = spec.rsplit("@", 1)
            support = float(rad)
        power = 1.0
        head, sep, tail = spec.rpartition("^")
        if sep and head.endswith(")"):
            spec, power = head, float(tail)
        return cls.density(spec, power, support)

    @property
    def is_zero(self) -> bool:
        return self.kind == DENSITY and (self.symbol.is_zero or self.factor == 0)

    def scale(self, c: float) -> MeasureSample:
        if c < 0:
            raise ValueError("measures scale by nonnegative factors")
        if self.kind == ATOMS:
            if c == 0:
                return MeasureSample.zero()
            return replace(self, masses=self.masses * c)
        return replace(self, factor=self.factor * c)

    def translate(self, a: complex) -> MeasureSample:
        if self.kind == ATOMS:
            return replace(self, points=self.points + a)
        return replace(self, shift=self.shift + complex(a))

    def density_at(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        u = w - self.shift
        vals = np.abs(self.symbol(u)) ** self.power * self.factor
        if self.support_radius is not None:
            vals = np.where(np.abs(u) <= self.support_radius, vals, 0.0)
        check_finite(vals, w.ravel())
        return vals


@lru_cache(maxsize=16)
def _plane(alpha: float, points: int):
    return build_plane_grid(alpha, points, 1e-14)


@lru_cache(maxsize=16)
def _disk_template(radius: float, points: int):
    g = build_disk_grid(0j, radius, points)
    return g.nodes, g.weights


def averaged_function(mu: MeasureSample, z, radius: float = 1.0, points: int = 24):
    """``mu(B(z, radius)) / |B(z, radius)|`` at one or many points."""
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    area = math.pi * radius ** 2
    if mu.kind == ATOMS:
        d = np.abs(flat[:, None] - mu.points[None, :])
        inside = d <= radius * (1 + 1e-12)
        out = (inside * mu.masses[None, :]).sum(axis=1) / area
    elif mu.is_zero:
        out = np.zeros(flat.size)
    else:
        nodes, weights = _disk_template(float(radius), points)
        out = np.empty(flat.size)
        for s in range(0, flat.size, 256):
            w = flat[s:s + 256, None] + nodes[None, :]
            out[s:s + 256] = mu.density_at(w) @ weights / area
    return out.reshape(z.shape)[()]


def berezin_transform(mu: MeasureSample, t: float, alpha: float, z, points: int = 80):
    """``int exp(-alpha t |w - z|^2 / 2) dmu(w)`` at one or many points."""
    if not t > 0:
        raise ValueError("t must be positive")
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    rate = 0.5 * alpha * t
    if mu.kind == ATOMS:
        d2 = np.abs(flat[:, None] - mu.points[None, :]) ** 2
        out = np.exp(-rate * d2) @ mu.masses
    elif mu.is_zero:
        out = np.zeros(flat.size)
    elif mu.support_radius is not None:
        # smooth integrand on the support disk
        nodes, weights = _disk_template(float(mu.support_radius), max(points // 2, 24))
        w = nodes + mu.shift
        dens = mu.density_at(w) * weights
        out = np.exp(-rate * np.abs(flat[:, None] - w[None, :]) ** 2) @ dens
    else:
        grid = _plane(rate, points)
        gw = grid.gaussian_weights
        out = np.empty(flat.size)
        for s in range(0, flat.size, 256):
            w = flat[s:s + 256, None] + grid.nodes[None, :]
            out[s:s + 256] = mu.density_at(w) @ gw
    return out.reshape(z.shape)[()]


def total_mass(mu: MeasureSample, points: int = 120) -> float:
    if mu.kind == ATOMS:
        return float(mu.masses.sum())
    if mu.is_zero:
        return 0.0
    if mu.support_radius is not None:
        nodes, weights = _disk_template(float(mu.support_radius), points // 2)
        return float(mu.density_at(nodes + mu.shift) @ weights)
    if all(t.s > 0 for t in mu.symbol.terms) and mu.symbol.builtin is None:
        # decaying density: integrate against a matched Gaussian grid
        rate = min(t.s for t in mu.symbol.terms) * mu.power / 2
        grid = _plane(rate, points)
        return float(mu.density_at(grid.nodes + mu.shift) @ grid.weights)
    return math.inf


def pi2_embedding(mu: MeasureSample, alpha: float) -> float:
    """Hilbert-Schmidt norm of ``Id: F^2_alpha -> L^2_alpha(dmu)``: ``sqrt(alpha mu(C) / pi)``."""
    return math.sqrt(alpha * total_mass(mu) / math.pi)


@dataclass(frozen=True)
class TransformReport:
    hat_norm: float
    tilde_norm: float
    ratio: float
    hat_status: str
    tilde_status: str
    q: float
    t: float


def transform_equivalence_check(mu: MeasureSample, kappa_over_p: float, t: float,
                                lattice: Lattice, alpha: float = 1.0,
                                radius: float = 1.0) -> TransformReport:
    """Lattice ``L^q`` norms of the averaged function and the t-Berezin transform."""
    q = float(kappa_over_p)
    if q < 1:
        raise ValueError("only kappa/p >= 1 is supported")
    R = lattice.bounding_radius
    inside = lattice.within(R)
    pts = lattice.points[inside]
    hat = averaged_function(mu, pts, radius)
    tilde = berezin_transform(mu, t, alpha, pts)
    absz = np.abs(pts)
    half = absz <= R / 2 + 1e-12
    sums_hat = [np.sum(hat[half] ** q), np.sum(hat ** q)]
    sums_tilde = [np.sum(tilde[half] ** q), np.sum(tilde ** q)]
    a = lattice_sum_norm(hat, lattice.delta, q)
    b = lattice_sum_norm(tilde, lattice.delta, q)
    return TransformReport(a, b, safe_ratio(a, b),
                           classify_growth((R / 2, R), sums_hat, q),
                           classify_growth((R / 2, R), sums_tilde, q), q, t)


def _discretize(mu: MeasureSample, points: int = 80) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and masses approximating ``mu`` for sums of the form ``int F dmu``."""
    if mu.kind == ATOMS:
        return mu.points, mu.masses
    if mu.is_zero:
        return np.zeros(1, dtype=complex), np.zeros(1)
    if mu.support_radius is not None:
        nodes, weights = _disk_template(float(mu.support_radius), points // 2)
        w = nodes + mu.shift
        return w, mu.density_at(w) * weights
    rate = min([t.s for t in mu.symbol.terms if t.s > 0] or [0.5]) * mu.power / 2
    grid = _plane(rate, points)
    w = grid.nodes + mu.shift
    return w, mu.density_at(w) * grid.weights


def embedding_lower_bound(mu: MeasureSample, p: float, r: float, points: Sequence[complex],
                          alpha: float = 1.0, rademacher_max: int = 12,
                          seed: int = 0) -> PiEstimate:
    """Certified lower bound for ``pi_r(Id: F^p_alpha -> L^p_alpha(dmu))``.

    The best of: the kernel family at ``points``, each single kernel, and for
    ``p = 1`` the Rademacher family ``{sum_j c_j gamma_j k_{z_j}}`` over all
    sign patterns (``c`` proportional to the averaged function).
    """
    if p < 1 or r < 1:
        raise ValueError("p and r must be >= 1")
    pts = np.asarray(points, dtype=complex)
    if mu.is_zero:
        return PiEstimate(0.0, LOWER_BOUND, "zero", r)
    # ||k_z||_{L^p_alpha(dmu)}^p is the p-Berezin transform at z
    images = berezin_transform(mu, p, alpha, pts) ** (1 / p)
    k_norm = (2 * math.pi / (alpha * p)) ** (1 / p)       # ||k_z||_{p,alpha}
    if p == 2 and r == 2:
        weak = math.sqrt(float(np.linalg.eigvalsh(kernel_gram(pts, alpha))[-1]))
    else:
        weak = k_norm * pts.size ** (1 / r)                # weak <= strong
    if not weak > 0:
        raise ValueError("the kernel family must have positive weak norm")
    best = PiEstimate(float(np.sum(images ** r) ** (1 / r) / weak), LOWER_BOUND, "kernels", r)
    j = int(np.argmax(images))
    single = float(images[j] / k_norm)
    if single > best.value:
        best = PiEstimate(single, LOWER_BOUND, f"kernel@{pts[j]:.3g}", r)
    if p == 1:
        rad = _rademacher_family_bound(mu, r, pts, alpha, rademacher_max, seed)
        if rad > best.value:
            best = PiEstimate(rad, LOWER_BOUND, "rademacher", r)
    return best


def _rademacher_family_bound(mu, r, pts, alpha, max_exact, seed) -> float:
    c = averaged_function(mu, pts)
    if not np.any(c > 0):
        return 0.0
    c = c / np.linalg.norm(c)
    nodes, masses = _discretize(mu)
    keep = masses > 0
    nodes, masses = nodes[keep], masses[keep]
    # |k_{z_j}(w)| exp(-alpha |w|^2 / 2) times its phase, on the measure nodes
    expo = alpha * (nodes[:, None] * np.conj(pts)[None, :]
                    - 0.5 * np.abs(pts)[None, :] ** 2 - 0.5 * np.abs(nodes)[:, None] ** 2)
    Kw = np.exp(expo) * c[None, :]
    m = pts.size
    if m <= max_exact:
        signs = sign_patterns(m, fix_first=False).astype(float)
    else:
        signs = RademacherDraw.from_seed(seed, 4096, m).signs.astype(float)
    norms = np.abs(Kw @ signs.T).T @ masses                 # ||g_t||_{L^1_alpha(dmu)}
    strong = float(np.mean(norms ** r) ** (1 / r))
    # |x*(k_z)| <= ||k_z||_{1,alpha} = 2 pi / alpha on the dual unit ball
    weak = khintchine_upper_constant(r) * (math.sqrt(2) if r > 2 else 1.0) * 2 * math.pi / alpha
    return strong / weak
