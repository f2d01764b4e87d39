"""Sequence norms, the kappa exponent, Khintchine averages and summing-norm bounds."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .fock import normalized_kernel

HILBERT = "hilbert_truncation"
LP_GRID = "lp_grid"
EXACT, LOWER_BOUND, SURROGATE = "exact", "lower_bound", "surrogate"
MAX_EXACT_SIGNS = 20


@dataclass(frozen=True, eq=False)
class VectorSequence:
    """Finitely many vectors (rows of ``vectors``) in a finite-dimensional normed space.

    ``hilbert_truncation`` uses the Euclidean norm; ``lp_grid`` uses
    ``||x|| = (sum_i weights_i |x_i|^space_p)^{1/space_p}``.
    """

    vectors: np.ndarray
    space_tag: str = HILBERT
    space_p: float = 2.0
    weights: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim == 1:
            v = v[None, :]
        object.__setattr__(self, "vectors", v)
        if self.space_tag not in (HILBERT, LP_GRID):
            raise ValueError(f"unknown space tag {self.space_tag!r}")
        if self.space_tag == LP_GRID:
            if self.weights is None:
                raise ValueError("lp_grid sequences need weights")
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (v.shape[1],) or not np.all(w > 0):
                raise ValueError("lp_grid weights must be positive, one per coordinate")
            object.__setattr__(self, "weights", w)
            if self.space_p < 1:
                raise ValueError("space_p must be >= 1")

    @classmethod
    def empty(cls, dim: int = 1) -> VectorSequence:
        return cls(np.zeros((0, dim)))

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def norms(self) -> np.ndarray:
        if self.space_tag == HILBERT:
            return np.linalg.norm(self.vectors, axis=1)
        q = self.space_p
        return (np.abs(self.vectors) ** q @ self.weights) ** (1 / q)

    def scale(self, c: complex) -> VectorSequence:
        return VectorSequence(self.vectors * c, self.space_tag, self.space_p, self.weights)


# ---------------------------------------------------------------------------
# kappa


@dataclass(frozen=True)
class KappaBranch:
    p: float
    r: float
    kappa: float
    branch: str


def conjugate_exponent(p: float) -> float:
    return math.inf if p == 1 else p / (p - 1)


def kappa(p: float, r: float) -> KappaBranch:
    """Exponent of the IDA space matching r-summing Hankel operators on F^p."""
    if p < 1 or r < 1:
        raise ValueError(f"kappa needs p, r >= 1, got p={p}, r={r}")
    if p <= 2:
        return KappaBranch(p, r, 2.0, "p_le_2")
    pp = conjugate_exponent(p)
    if r <= pp:
        return KappaBranch(p, r, pp, "r_le_pprime")
    if r <= p:
        return KappaBranch(p, r, float(r), "middle")
    return KappaBranch(p, r, float(p), "r_ge_p")


# ---------------------------------------------------------------------------
# strong and weak sequence norms


def strong_norm(seq: VectorSequence, q: float) -> float:
    if len(seq) == 0:
        return 0.0
    return float(np.sum(seq.norms() ** q) ** (1 / q))


@dataclass(frozen=True, eq=False)
class WeakNorm:
    value: float
    exact: bool
    witness: np.ndarray | None = field(default=None, repr=False)


def _dual_exponent(seq: VectorSequence) -> tuple[float, np.ndarray]:
    if seq.space_tag == HILBERT:
        return 2.0, np.ones(seq.vectors.shape[1])
    return seq.space_p, seq.weights


def _pairings(seq: VectorSequence, y: np.ndarray) -> np.ndarray:
    """``<x_k, y> = sum_i w_i x_ki conj(y_i)`` for each witness row of ``y``."""
    _, w = _dual_exponent(seq)
    return (seq.vectors * w[None, :]) @ np.conj(y).T


def _dual_unit(seq: VectorSequence, g: np.ndarray) -> np.ndarray:
    """Unit vector of the dual ball maximising ``Re <g, y>`` (Hoelder equality case)."""
    q, w = _dual_exponent(seq)
    mag = np.abs(g)
    if q == 1:
        return np.where(mag > 0, g / np.where(mag > 0, mag, 1.0), 0.0)
    y = g * mag ** (q - 2) if q != 2 else g.copy()
    norm = float((w @ mag ** q) ** ((q - 1) / q))
    return y / norm if norm > 0 else y


def weak_norm_on_witnesses(seq: VectorSequence, p: float, witnesses: np.ndarray) -> float:
    """``max_y (sum_k |<x_k, y>|^p)^{1/p}`` over the given dual-unit witnesses."""
    if len(seq) == 0:
        return 0.0
    a = np.abs(_pairings(seq, np.atleast_2d(witnesses)))
    return float(np.max(np.sum(a ** p, axis=0) ** (1 / p)))


def weak_norm_details(seq: VectorSequence, p: float, restarts: int = 20, seed: int = 0,
                      iterations: int = 300, rtol: float = 1e-12) -> WeakNorm:
    """Weak ``l_p`` norm of the sequence.

    Exact for Euclidean sequences at ``p = 2`` (largest singular value).  In
    every other case the supremum over the dual ball is estimated by
    normalised-gradient ascent from ``restarts`` random starts; the result is
    a lower estimate attained by the returned witness.
    """
    if len(seq) == 0:
        return WeakNorm(0.0, True)
    X = seq.vectors
    if seq.space_tag == HILBERT and p == 2:
        u, svals, _ = np.linalg.svd(X.T, full_matrices=False)
        return WeakNorm(float(svals[0]), True, u[:, 0])
    if len(seq) == 1:
        g = X[0]
        return WeakNorm(float(seq.norms()[0]), True, _dual_unit(seq, g))

    rng = np.random.default_rng(seed)
    best_val, best_y = -1.0, None
    starts = [X[np.argmax(seq.norms())]]
    starts += [rng.standard_normal(X.shape[1]) + 1j * rng.standard_normal(X.shape[1])
               for _ in range(max(restarts - 1, 0))]
    for y0 in starts:
        y = _dual_unit(seq, y0)
        val = 0.0
        for _ in range(iterations):
            a = _pairings(seq, y[None, :])[:, 0]
            new = float(np.sum(np.abs(a) ** p))
            mag = np.abs(a)
            with np.errstate(divide="ignore"):
                coeff = np.where(mag > 0, mag ** (p - 2), 0.0) * np.conj(a)
            g = coeff @ X
            y_next = _dual_unit(seq, g)
            if new <= val * (1 + rtol):
                break
            val, y = new, y_next
        val = float(np.sum(np.abs(_pairings(seq, y[None, :])[:, 0]) ** p))
        if val > best_val:
            best_val, best_y = val, y
    return WeakNorm(best_val ** (1 / p), False, best_y)


def weak_norm(seq: VectorSequence, p: float, **kw) -> float:
    return weak_norm_details(seq, p, **kw).value


def pi2_hilbert_schmidt(columns: VectorSequence) -> float:
    """``(sum_m ||T e_m||^2)^{1/2}`` for images of an orthonormal family."""
    if columns.space_tag != HILBERT:
        raise ValueError("the Hilbert-Schmidt identity needs hilbert_truncation columns")
    return strong_norm(columns, 2.0)


# ---------------------------------------------------------------------------
# Rademacher averages


@dataclass(frozen=True, eq=False)
class RademacherDraw:
    seed: int
    signs: np.ndarray

    @classmethod
    def from_seed(cls, seed: int, draws: int, m: int) -> RademacherDraw:
        rng = np.random.default_rng(seed)
        signs = rng.integers(0, 2, size=(draws, m), dtype=np.int8) * 2 - 1
        return cls(seed, signs)


def sign_patterns(m: int, fix_first: bool = True) -> np.ndarray:
    """All ``+-1`` patterns of length ``m`` (first sign fixed to ``+1`` if asked)."""
    free = m - 1 if fix_first and m > 0 else m
    codes = np.arange(2 ** free, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(free)[None, :]) & 1
    signs = (1 - 2 * bits).astype(np.int8)
    if fix_first and m > 0:
        signs = np.hstack([np.ones((signs.shape[0], 1), dtype=np.int8), signs])
    return signs


def rademacher_moment(c: Sequence[complex], p: float,
                      draw: RademacherDraw | None = None) -> tuple[float, float]:
    """``E |sum_j c_j gamma_j|^p`` and its standard error (0 for exact enumeration)."""
    c = np.asarray(c, dtype=complex)
    m = c.size
    if m < 1:
        raise ValueError("need at least one coefficient")
    if draw is None:
        if m > MAX_EXACT_SIGNS:
            raise ValueError(f"exact enumeration is limited to m <= {MAX_EXACT_SIGNS}")
        # |sum| is invariant under a global sign flip, so fix gamma_1 = +1
        total = 0.0
        free = m - 1
        chunk_bits = min(free, 16)
        low = sign_patterns(chunk_bits, fix_first=False).astype(float) @ c[m - chunk_bits:] \
            if chunk_bits else np.zeros(1, dtype=complex)
        high_bits = free - chunk_bits
        for code in range(2 ** high_bits):
            hs = np.array([1 - 2 * ((code >> k) & 1) for k in range(high_bits)], dtype=float)
            head = c[0] + (hs @ c[1:1 + high_bits] if high_bits else 0.0)
            total += float(np.sum(np.abs(head + low) ** p))
        return total / 2 ** free, 0.0
    if draw.signs.shape[1] != m:
        raise ValueError("draw width does not match the coefficient count")
    vals = np.abs(draw.signs.astype(float) @ c) ** p
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size))


def khintchine_ratio(c: Sequence[complex], p: float,
                     draw: RademacherDraw | None = None) -> float:
    """``(E|sum c_j gamma_j|^p)^{1/p} / ||c||_2`` (exact enumeration when no draw is given)."""
    if not p > 0:
        raise ValueError("p must be positive")
    c = np.asarray(c, dtype=complex)
    norm2 = float(np.linalg.norm(c))
    if norm2 == 0:
        return 1.0
    moment, _ = rademacher_moment(c, p, draw)
    return moment ** (1 / p) / norm2


def khintchine_upper_constant(r: float) -> float:
    """Best real-Rademacher constant ``B_r`` in ``(E|sum c gamma|^r)^{1/r} <= B_r ||c||_2``."""
    if r <= 2:
        return 1.0
    return math.sqrt(2.0) * math.exp((gammaln((r + 1) / 2) - 0.5 * math.log(math.pi)) / r)


# ---------------------------------------------------------------------------
# summing-norm bounds


@dataclass(frozen=True)
class PiEstimate:
    value: float
    kind: str
    family: str = ""
    r: float = 2.0


def pi_r_lower_bound(columns: VectorSequence, input_family_weak_norm: float,
                     r: float, family: str = "") -> PiEstimate:
    """``||{T x_k}||_r^strong / ||{x_k}||_r^weak`` -- a lower bound for ``pi_r(T)``."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if not input_family_weak_norm > 0:
        raise ValueError("the input family must have positive weak norm")
    return PiEstimate(strong_norm(columns, r) / input_family_weak_norm, LOWER_BOUND, family, r)


def rademacher_test_function(c: Sequence[complex], signs: Sequence[int],
                             lattice_points: Sequence[complex], alpha: float = 1.0):
    """``w -> sum_j c_j signs_j k_{z_j}(w)``."""
    c = np.asarray(c, dtype=complex)
    signs = np.asarray(signs, dtype=float)
    pts = np.asarray(lattice_points, dtype=complex)
    if not (c.size == signs.size == pts.size):
        raise ValueError("coefficients, signs and lattice points must have equal length")
    kernels = [normalized_kernel(z, alpha) for z in pts]
    coefs = c * signs

    def g(w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape, dtype=complex)
        for a, k in zip(coefs, kernels):
            out += a * k(w)
        return out

    return g


def bounds_to_csv(rows: Sequence[tuple[str, float, str, float]]) -> str:
    """CSV with columns ``family_id, r, bound_type, value``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family_id", "r", "bound_type", "value"])
    for fam, r, kind, val in rows:
        w.writerow([fam, repr(float(r)), kind, repr(float(val))])
    return buf.getvalue()
