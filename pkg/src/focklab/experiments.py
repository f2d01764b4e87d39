"""Experiment drivers: each command assembles the numerical modules into one report.

A report is a list of rows written as CSV after a single ``#``-prefixed JSON
header line echoing the configuration and package version.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from . import __version__
from .carleson import (MeasureSample, embedding_lower_bound, pi2_embedding,
                       transform_equivalence_check)
from .fock import (FockParams, basis_columns, build_lattice, kernel_columns,
                   kernel_gram)
from .ida import (CONVERGED, growth_slope, ida_norm, ida_profile, local_deviations,
                  safe_ratio)
from .quad import build_plane_grid
from .summing import (LOWER_BOUND, SURROGATE, kappa, pi2_hilbert_schmidt,
                      pi_r_lower_bound)
from .symbols import SymbolFunction, parse_symbol

CATALOG_VERSION = 1
CATALOG = (
    "zb*gauss(0.25)",
    "zb*gauss(0.5)",
    "zb*gauss(1)",
    "zb^2*gauss(1)",
    "(zb+z)*gauss(1)",
    "invz",
)
BOUNDED_CATALOG = CATALOG[:-1]
GROWTH_RADII = (8.0, 16.0, 32.0)


@dataclass(frozen=True)
class ExperimentConfig:
    alpha: float = 1.0
    p: float = 2.0
    r: float = 2.0
    s: float | None = None
    delta: float = 0.5
    radius: float = 8.0
    basis_degree: int = 30
    ida_degree: int = 8
    grid_points: int = 120
    symbols: tuple[str, ...] = CATALOG
    measure: str | None = None
    seed: int = 0
    lattice_size: int = 25
    out: str | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.p < 1 or self.r < 1:
            raise ValueError("p and r must be >= 1")
        if not 0 < self.delta <= self.radius:
            raise ValueError("need 0 < delta <= radius")
        if self.basis_degree < 0 or self.ida_degree < 0:
            raise ValueError("degrees must be nonnegative")
        for sym in self.symbols:
            parse_symbol(sym)

    @property
    def params(self) -> FockParams:
        return FockParams(self.alpha, self.p)


@dataclass
class Report:
    command: str
    config: ExperimentConfig
    rows: list[dict] = field(default_factory=list)

    def header(self) -> str:
        meta = {"command": self.command, "version": __version__,
                "catalog_version": CATALOG_VERSION, "config": asdict(self.config)}
        return "# " + json.dumps(meta, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(self.header() + "\n")
        if self.rows:
            cols = list(self.rows[0])
            for row in self.rows[1:]:
                cols += [c for c in row if c not in cols]
            w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
            w.writeheader()
            for row in self.rows:
                w.writerow({k: _fmt(v) for k, v in row.items()})
        return buf.getvalue()

    def write(self, path: str | None = None) -> str:
        text = self.to_csv()
        path = path or self.config.out
        if path:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


@lru_cache(maxsize=4)
def plane_grid(alpha: float, points: int):
    return build_plane_grid(alpha, points, 1e-12)


@lru_cache(maxsize=8)
def lattice_for(delta: float, radius: float):
    return build_lattice(delta, radius)


# ---------------------------------------------------------------------------
# main theorem


def hs_surrogate(f: SymbolFunction, M: int, alpha: float, grid_points: int) -> float:
    """Hilbert-Schmidt norm of ``H_f`` on ``span{e_0..e_M}`` (equals pi_2 there)."""
    if f.is_holomorphic:
        return 0.0
    cols = basis_columns(f, M, FockParams(alpha, 2.0), plane_grid(alpha, grid_points))
    return pi2_hilbert_schmidt(cols.to_sequence())


def kernel_family_bound(f: SymbolFunction, cfg: ExperimentConfig, count: int = 9) -> float:
    """Definitional lower bound for ``pi_r(H_f)`` from kernels at lattice points."""
    if f.is_holomorphic:
        return 0.0
    lat = lattice_for(cfg.delta, cfg.radius)
    pts = lat.nearest(count)
    cols = kernel_columns(f, pts, cfg.params, plane_grid(cfg.alpha, cfg.grid_points))
    if cfg.p == 2 and cfg.r == 2:
        weak = math.sqrt(float(np.linalg.eigvalsh(kernel_gram(pts, cfg.alpha))[-1]))
    else:
        k_norm = (2 * math.pi / (cfg.alpha * cfg.p)) ** (1 / cfg.p)
        weak = k_norm * pts.size ** (1 / cfg.r)
    return pi_r_lower_bound(cols.to_sequence(), weak, cfg.r, "kernels").value


def main_theorem_row(sym: str, cfg: ExperimentConfig) -> dict:
    f = parse_symbol(sym)
    kb = kappa(cfg.p, cfg.r)
    s = cfg.s if cfg.s is not None else kb.kappa
    lat = lattice_for(cfg.delta, cfg.radius)
    if f.is_holomorphic:
        ida_val, status = 0.0, CONVERGED
    else:
        res = ida_norm(f, s, cfg.p, 1.0, lat, cfg.ida_degree)
        ida_val, status = res.value, res.status
    if cfg.p == 2 and cfg.r == 2:
        pi_val, kind = hs_surrogate(f, cfg.basis_degree, cfg.alpha, cfg.grid_points), SURROGATE
    else:
        pi_val, kind = kernel_family_bound(f, cfg), LOWER_BOUND
    return {
        "symbol": sym, "p": float(cfg.p), "r": float(cfg.r), "kappa": kb.kappa,
        "kappa_branch": kb.branch, "ida_norm": ida_val, "ida_status": status,
        "pi_value": pi_val, "pi_kind": kind, "ratio": safe_ratio(pi_val, ida_val),
        "M": cfg.basis_degree, "D": cfg.ida_degree, "radius": float(cfg.radius),
    }


def cmd_main_theorem(cfg: ExperimentConfig) -> Report:
    return Report("main-theorem", cfg, [main_theorem_row(s, cfg) for s in cfg.symbols])


# ---------------------------------------------------------------------------
# lower chain


def lower_chain_row(sym: str, cfg: ExperimentConfig, count: int | None = None) -> dict:
    """Per-point domination ``G_{p,2 delta}(f)(z_j) <= C_j ||H_f k_{z_j}||_{p,alpha}``."""
    f = parse_symbol(sym)
    count = count or cfg.lattice_size
    lat = lattice_for(cfg.delta, max(cfg.radius, cfg.delta))
    pts = lat.nearest(count)
    if f.is_holomorphic:
        G = np.zeros(pts.size)
        H = np.zeros(pts.size)
    else:
        G = local_deviations(f, pts, cfg.p, 2 * cfg.delta, cfg.ida_degree)
        cols = kernel_columns(f, pts, cfg.params, plane_grid(cfg.alpha, cfg.grid_points))
        H = cols.norms
    with np.errstate(divide="ignore", invalid="ignore"):
        C = np.where(G == 0, 0.0, G / H)
    kb = kappa(cfg.p, cfg.r)
    e = kb.kappa
    return {
        "symbol": sym, "points": int(pts.size), "p": float(cfg.p), "kappa": e,
        "sum_G": float(np.sum(G ** e)), "sum_H": float(np.sum(H ** e)),
        "max_C": float(np.max(C)), "min_C": float(np.min(C)),
        "C_values": ";".join(repr(float(c)) for c in C),
    }


def cmd_lower_chain(cfg: ExperimentConfig) -> Report:
    return Report("lower-chain", cfg, [lower_chain_row(s, cfg) for s in cfg.symbols])


# ---------------------------------------------------------------------------
# Berger-Coburn


def bcp_row(sym: str, cfg: ExperimentConfig, s: float | None = None) -> dict:
    f = parse_symbol(sym)
    s = s if s is not None else (cfg.s if cfg.s is not None else 2.0)
    lat = lattice_for(cfg.delta, cfg.radius)
    fb = f.conjugate()
    a = ida_norm(f, s, cfg.p, 1.0, lat, cfg.ida_degree)
    b = a if fb == f else ida_norm(fb, s, cfg.p, 1.0, lat, cfg.ida_degree)
    return {"symbol": sym, "s": float(s), "p": float(cfg.p), "ida_f": a.value,
            "ida_fbar": b.value, "ratio": safe_ratio(b.value, a.value),
            "status_f": a.status, "status_fbar": b.status}


def growth_table(sym: str, cfg: ExperimentConfig, s_values=(1.0, 2.0),
                 radii=GROWTH_RADII) -> list[dict]:
    """Partial sums of ``G^s`` over growing disks for ``f`` and its conjugate."""
    f = parse_symbol(sym)
    lat = lattice_for(cfg.delta, max(radii))
    rows = []
    for label, g in (("f", f), ("fbar", f.conjugate())):
        prof = ida_profile(g, cfg.p, 1.0, lat, cfg.ida_degree, s_values, radii)
        for s in s_values:
            sums = prof.partial_sums[float(s)]
            slope, se = growth_slope(radii, sums)
            for R, S in zip(radii, sums):
                rows.append({"symbol": sym, "which": label, "s": float(s), "radius": float(R),
                             "partial_sum": float(S), "status": prof.status(float(s)),
                             "slope_vs_logR": slope, "slope_se": se})
    return rows


def cmd_bcp(cfg: ExperimentConfig) -> Report:
    rep = Report("bcp", cfg)
    for sym in cfg.symbols:
        row = bcp_row(sym, cfg)
        row["table"] = "ratio"
        rep.rows.append(row)
        if parse_symbol(sym).builtin is not None:
            for g in growth_table(sym, cfg):
                g["table"] = "growth"
                rep.rows.append(g)
    return rep


# ---------------------------------------------------------------------------
# Carleson


DEFAULT_MEASURE = "(zb*gauss(1))^2"


def carleson_rows(mu: MeasureSample, cfg: ExperimentConfig, label: str,
                  t_values=(1.0, 2.0)) -> list[dict]:
    kb = kappa(cfg.p, cfg.r)
    q = kb.kappa / cfg.p
    lat = lattice_for(cfg.delta, cfg.radius)
    lower = embedding_lower_bound(mu, cfg.p, cfg.r, lat.nearest(9), cfg.alpha, seed=cfg.seed)
    pi2 = pi2_embedding(mu, cfg.alpha) if (cfg.p == 2 and cfg.r == 2) else math.nan
    rows = []
    for t in t_values:
        rep = transform_equivalence_check(mu, q, t, lat, cfg.alpha)
        hat = rep.hat_norm ** (1 / cfg.p)
        tilde = rep.tilde_norm ** (1 / cfg.p)
        rows.append({
            "measure": label, "t": float(t), "kappa_over_p": q,
            "hat_norm_pow": hat, "tilde_norm_pow": tilde,
            "hat_over_tilde": safe_ratio(rep.hat_norm, rep.tilde_norm),
            "hat_status": rep.hat_status, "tilde_status": rep.tilde_status,
            "lower_bound": lower.value, "lower_bound_family": lower.family,
            "pi2_surrogate": pi2,
            "lower_over_hat": safe_ratio(lower.value, hat),
        })
    return rows


def cmd_carleson(cfg: ExperimentConfig) -> Report:
    spec = cfg.measure or DEFAULT_MEASURE
    mu = MeasureSample.parse(spec)
    return Report("carleson", cfg, carleson_rows(mu, cfg, spec))


COMMANDS = {
    "main-theorem": cmd_main_theorem,
    "lower-chain": cmd_lower_chain,
    "bcp": cmd_bcp,
    "carleson": cmd_carleson,
}
