import math

import numpy as np
import pytest

from focklab.fock import (BasisTruncation, FockParams, KernelRangeError, LatticeError,
                          basis_columns, build_lattice, hankel_apply, kernel, kernel_columns,
                          kernel_gram, lp_norm, normalized_kernel, project, project_on_grid)
from focklab.quad import build_plane_grid
from focklab.symbols import parse_symbol


def test_kernel_reproduces_polynomials(grid, params2):
    # <h, K_z> with the alpha/pi normalisation recovers h(z)
    h = lambda w: w ** 3 - 2 * w
    z = 0.4 - 0.9j
    assert project(h, z, params2, grid) == pytest.approx(h(z), abs=1e-10)


def test_p_of_one(grid, params2):
    z = np.array([0, 1 + 1j, -2.5j])
    assert np.allclose(project(lambda w: np.ones(w.shape), z, params2, grid), 1, atol=1e-10)


def test_basis_orthonormal(grid, params2):
    E = BasisTruncation(1.0, 12).evaluate(grid.nodes)
    G = (E.conj().T * (grid.weights * np.exp(-np.abs(grid.nodes) ** 2))) @ E
    assert np.allclose(G, np.eye(13), atol=1e-10)


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_basis_orthonormal_other_alpha(alpha):
    g = build_plane_grid(alpha, 100)
    E = BasisTruncation(alpha, 6).evaluate(g.nodes)
    G = (E.conj().T * (g.weights * np.exp(-alpha * np.abs(g.nodes) ** 2))) @ E
    assert np.allclose(G, np.eye(7), atol=1e-10)


def test_project_on_grid_fixes_basis(grid):
    E = BasisTruncation(1.0, 10).evaluate(grid.nodes)
    PE = project_on_grid(E, grid, 1.0)
    mask = np.abs(grid.nodes) < 3
    assert np.max(np.abs(PE[mask] - E[mask])) < 1e-6


def test_project_on_grid_matches_direct(grid, params2):
    f = parse_symbol("zb*gauss(1)")
    vals = f(grid.nodes)
    fast = project_on_grid(vals, grid, 1.0)
    pts = grid.nodes[::97]
    direct = project(vals, pts, params2, grid)
    damp = np.exp(-np.abs(pts) ** 2 / 2)
    assert np.max(np.abs(fast[::97] - direct) * damp) < 1e-12


def test_projection_idempotent(grid):
    vals = parse_symbol("zb*z*gauss(0.5)")(grid.nodes)
    P1 = project_on_grid(vals, grid, 1.0)
    P2 = project_on_grid(P1, grid, 1.0)
    w = grid.weights * np.exp(-np.abs(grid.nodes) ** 2)
    assert np.sqrt(w @ np.abs(P2 - P1) ** 2) < 1e-8


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, 4.0])
def test_normalized_kernel_norm(p, grid):
    k = normalized_kernel(0.7 + 1.3j, 1.0)
    assert lp_norm(k, FockParams(1.0, p), grid) == pytest.approx(
        (2 * math.pi / p) ** (1 / p), rel=1e-8)


def test_kernel_symmetry():
    z, w = 1 + 0.5j, -0.3 + 2j
    assert kernel(z, w, 1.0) == pytest.approx(np.conj(kernel(w, z, 1.0)))


def test_kernel_range_guard(grid, params2):
    with pytest.raises(KernelRangeError):
        project(lambda w: np.ones(w.shape), 40.0, params2, grid)


def test_alpha_mismatch(grid):
    with pytest.raises(ValueError):
        project(lambda w: w, 0.0, FockParams(2.0, 2.0), grid)


@pytest.mark.parametrize("m", range(0, 9))
def test_hankel_zbar_basis(m, grid, params2):
    cols = basis_columns(parse_symbol("zb"), 8, params2, grid)
    assert cols.norms[m] ** 2 == pytest.approx(1.0, rel=1e-4)


def test_hankel_holomorphic_is_zero(grid, params2):
    cols = basis_columns(parse_symbol("z^2 - 1"), 5, params2, grid)
    assert np.all(cols.values == 0)


def test_hankel_linear_in_symbol(grid, params2):
    f, g = parse_symbol("zb*gauss(1)"), parse_symbol("zb^2*gauss(0.5)")
    pts = [0j, 1 + 1j]
    a = kernel_columns(f, pts, params2, grid).values
    b = kernel_columns(g, pts, params2, grid).values
    c = kernel_columns(f.scale(2) + g.scale(-3j), pts, params2, grid).values
    damp = np.exp(-np.abs(grid.nodes) ** 2 / 2)[:, None]
    assert np.max(np.abs(c - (2 * a - 3j * b)) * damp) < 1e-12


def test_hankel_apply_orthogonal_to_holomorphic(grid, params2):
    f = parse_symbol("zb*gauss(1)")
    h = hankel_apply(f, normalized_kernel(0.5, 1.0), params2, grid)
    w = grid.weights * np.exp(-np.abs(grid.nodes) ** 2)
    E = BasisTruncation(1.0, 6).evaluate(grid.nodes)
    inner = (h(grid.nodes) * w) @ E.conj()
    assert np.max(np.abs(inner)) < 1e-8


def test_hs_closed_form(grid, params2):
    # sum_m ||H_{zb e^{-|z|^2}} e_m||^2 converges to 0.13888...
    cols = basis_columns(parse_symbol("zb*gauss(1)"), 30, params2, grid)
    assert np.sqrt(np.sum(cols.norms ** 2)) == pytest.approx(0.3726779962, rel=1e-8)


def test_lattice_multiplicity():
    lat = build_lattice(1.0, 6.0)
    assert lat.N == 4
    assert build_lattice(0.5, 4.0).N == 4


def test_lattice_cover_factor_increases_N():
    assert build_lattice(1.0, 6.0, cover_factor=2.0).N > 4


def test_lattice_points_and_nearest():
    lat = build_lattice(0.5, 3.0)
    near = lat.nearest(5)
    assert near[0] == 0
    assert np.allclose(np.abs(near[1:]), 0.5)
    assert np.all(np.abs(lat.points) <= 3.5 + 1e-12)


@pytest.mark.parametrize("delta,R", [(0.0, 1.0), (2.0, 1.0)])
def test_lattice_bad_args(delta, R):
    with pytest.raises(LatticeError):
        build_lattice(delta, R)


def test_kernel_gram_matches_quadrature(grid):
    pts = np.array([0, 1 + 0.5j, -2j])
    G = kernel_gram(pts, 1.0)
    K = np.column_stack([normalized_kernel(z, 1.0)(grid.nodes) for z in pts])
    w = grid.weights * np.exp(-np.abs(grid.nodes) ** 2)
    Q = (K.T * w) @ K.conj()
    assert np.allclose(G, Q.T, atol=1e-10)


def test_kernel_columns_sequence_norms_match(grid):
    cols = kernel_columns(parse_symbol("zb*gauss(1)"), [0j, 1j], FockParams(1.0, 3.0), grid)
    seq = cols.to_sequence()
    assert np.allclose(seq.norms(), cols.norms)


def test_far_kernels_nearly_orthogonal():
    # two distant normalised kernels: ||k_a + k_b||^2 ~ 2 * (pi/alpha)
    g = build_plane_grid(1.0, 120)
    s = normalized_kernel(-3.0, 1.0)(g.nodes) + normalized_kernel(3.0, 1.0)(g.nodes)
    val = lp_norm(s, FockParams(1.0, 2.0), g) ** 2
    assert val == pytest.approx(2 * math.pi, rel=0.05)
