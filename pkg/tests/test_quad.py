import math

import numpy as np
import pytest

from focklab.quad import (QuadratureError, build_disk_grid, build_plane_grid, disk_mean,
                          integrate, truncation_radius_for)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0, 2.0, 4.0])
def test_gaussian_integral(alpha):
    g = build_plane_grid(alpha, 120)
    val = integrate(g, lambda z: np.exp(-alpha * np.abs(z) ** 2))
    assert val == pytest.approx(math.pi / alpha, rel=1e-8)


@pytest.mark.parametrize("k", [0, 1, 3, 6])
def test_gaussian_moments(k):
    # int |z|^{2k} e^{-|z|^2} dv = pi k!
    g = build_plane_grid(1.0, 120)
    val = integrate(g, lambda z: np.abs(z) ** (2 * k) * np.exp(-np.abs(z) ** 2))
    assert val == pytest.approx(math.pi * math.factorial(k), rel=1e-10)


def test_gaussian_weights_sum(grid):
    assert grid.gaussian_weights.sum() == pytest.approx(math.pi, rel=1e-12)


def test_odd_moment_vanishes(grid):
    val = integrate(grid, lambda z: z * np.exp(-np.abs(z) ** 2))
    assert abs(val) < 1e-14


def test_truncation_radius_covers_tail(grid):
    assert grid.truncation_radius >= truncation_radius_for(1.0, 1e-12)


def test_too_few_points_rejected():
    with pytest.raises(QuadratureError, match="tail tolerance"):
        build_plane_grid(1.0, 8, 1e-14)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_bad_alpha(bad):
    with pytest.raises(QuadratureError):
        build_plane_grid(bad)


def test_require_tolerance():
    g = build_plane_grid(1.0, 60, 1e-3)
    g.require_tolerance(1e-2)
    with pytest.raises(QuadratureError, match="1e-08"):
        g.require_tolerance(1e-8)


def test_nonfinite_integrand_names_node(grid):
    with pytest.raises(QuadratureError, match="node"):
        integrate(grid, lambda z: np.where(np.arange(z.size) == 5, np.inf, 1.0))


def test_overflow_counts_as_nonfinite(grid):
    with pytest.raises(QuadratureError):
        integrate(grid, np.full(grid.nodes.size, 1e301))


def test_length_mismatch(grid):
    with pytest.raises(QuadratureError):
        integrate(grid, np.ones(3))


def test_disk_area_and_moment():
    d = build_disk_grid(1 - 1j, 2.0, 24)
    assert integrate(d, lambda z: np.ones(z.shape)) == pytest.approx(4 * math.pi, rel=1e-13)
    assert integrate(d, lambda z: np.abs(z - (1 - 1j)) ** 4) == pytest.approx(
        math.pi * 2.0 ** 6 / 3, rel=1e-12)


def test_disk_exactness_degree():
    d = build_disk_grid(0j, 1.0, 6)
    n = d.exactness_degree
    # z^a zb^b with a + b <= n integrates exactly; only a == b survives
    for a in range(n // 2 + 1):
        val = integrate(d, lambda z: z ** a * np.conj(z) ** a)
        assert val == pytest.approx(math.pi / (a + 1), rel=1e-12)
    assert abs(integrate(d, lambda z: z ** 3 * np.conj(z))) < 1e-13


def test_disk_mean_of_constant():
    d = build_disk_grid(0.5j, 0.7, 10)
    assert disk_mean(d, lambda z: np.full(z.shape, 3.0)) == pytest.approx(3.0, rel=1e-13)


def test_disk_mean_needs_disk(grid):
    with pytest.raises(QuadratureError):
        disk_mean(grid, lambda z: z)


def test_disk_bad_radius():
    with pytest.raises(QuadratureError):
        build_disk_grid(0j, 0.0)


def test_refinement_monotone_error():
    f = lambda z: np.abs(z) ** 8 * np.exp(-2 * np.abs(z) ** 2)
    exact = math.pi * math.factorial(4) / 2 ** 5
    errs = [abs(integrate(build_plane_grid(2.0, n), f) - exact) for n in (40, 80, 120)]
    assert errs[-1] <= errs[0] + 1e-14
    assert errs[-1] < 1e-10 * exact


def test_array_columns_integrated_separately(grid):
    v = np.exp(-np.abs(grid.nodes) ** 2)
    out = integrate(grid, np.column_stack([v, 2 * v]))
    assert out == pytest.approx([math.pi, 2 * math.pi], rel=1e-10)
