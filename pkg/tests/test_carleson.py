import math

import numpy as np
import pytest

from focklab.carleson import (MeasureSample, averaged_function, berezin_transform,
                              embedding_lower_bound, pi2_embedding, total_mass,
                              transform_equivalence_check)
from focklab.fock import build_lattice
from focklab.ida import local_mean
from focklab.symbols import parse_symbol

LEB = MeasureSample.lebesgue()
ATOM = MeasureSample.atoms([0j], [1.0])


def test_hat_of_lebesgue():
    assert averaged_function(LEB, np.array([0, 3 - 1j])) == pytest.approx([1.0, 1.0], rel=1e-12)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_tilde_of_lebesgue(t):
    assert berezin_transform(LEB, t, 1.0, 1 + 1j) == pytest.approx(2 * math.pi / t, rel=1e-8)


def test_atom_formulas():
    assert averaged_function(ATOM, 0.9) == pytest.approx(1 / math.pi)
    assert averaged_function(ATOM, 1.0) == pytest.approx(1 / math.pi)   # closed ball
    assert averaged_function(ATOM, 1.01) == 0.0
    assert berezin_transform(ATOM, 2.0, 1.0, 1.0) == pytest.approx(math.exp(-1))


def test_zero_measure():
    z = MeasureSample.zero()
    assert averaged_function(z, 0.3) == 0.0
    assert berezin_transform(z, 1.0, 1.0, 0.3) == 0.0
    assert embedding_lower_bound(z, 2, 2, [0j]).value == 0.0


def test_truncated_lebesgue_mass():
    mu = MeasureSample.lebesgue(3.0)
    assert total_mass(mu) == pytest.approx(9 * math.pi, rel=1e-10)
    assert averaged_function(mu, 0.0) == pytest.approx(1.0)
    assert averaged_function(mu, 10.0) == pytest.approx(0.0, abs=1e-14)


def test_cross_module_consistency():
    g = parse_symbol("zb*gauss(1)")
    mu = MeasureSample.density(g, 2.0)
    for z in (0j, 0.5 + 0.5j, 1.5):
        assert averaged_function(mu, z) == pytest.approx(local_mean(g, z, 2, 1) ** 2, abs=1e-8)


@pytest.mark.parametrize("mu", [
    MeasureSample.density("gauss(0.5)", 1.0),
    MeasureSample.atoms([0, 1 + 1j, -2j], [1.0, 0.5, 2.0]),
    MeasureSample.lebesgue(2.0),
])
def test_tilde_nonincreasing_in_t(mu):
    z = np.array([0, 0.5 - 1j, 2.0])
    vals = [berezin_transform(mu, t, 1.0, z) for t in (0.5, 1.0, 2.0, 4.0)]
    for a, b in zip(vals, vals[1:]):
        assert np.all(b <= a + 1e-12)
        assert np.all(b >= 0)


def test_scaling_and_translation():
    mu = MeasureSample.density("gauss(0.5)", 1.0)
    assert averaged_function(mu.scale(3.0), 0.2) == pytest.approx(3 * averaged_function(mu, 0.2))
    a = 1 - 0.5j
    assert berezin_transform(mu.translate(a), 1.0, 1.0, 0.3 + a) == pytest.approx(
        berezin_transform(mu, 1.0, 1.0, 0.3), rel=1e-10)


def test_scale_rejects_negative():
    with pytest.raises(ValueError):
        LEB.scale(-1)


def test_parse_specs(tmp_path):
    mu = MeasureSample.parse("(zb*gauss(1))^2@3")
    assert mu.power == 2.0 and mu.support_radius == 3.0
    assert MeasureSample.parse("gauss(0.5)").power == 1.0
    p = tmp_path / "atoms.csv"
    p.write_text("re,im,mass\n0,0,1\n1,2,0.5\n")
    at = MeasureSample.parse(str(p))
    assert at.masses.tolist() == [1.0, 0.5]
    assert at.points[1] == 1 + 2j


def test_atoms_validation():
    with pytest.raises(ValueError):
        MeasureSample.atoms([0, 1], [1.0])
    with pytest.raises(ValueError):
        MeasureSample.atoms([0], [-1.0])


def test_pi2_embedding_closed_form():
    assert pi2_embedding(ATOM, 1.0) == pytest.approx(1 / math.sqrt(math.pi))
    assert pi2_embedding(MeasureSample.density("gauss(1)", 1.0), 1.0) == pytest.approx(1.0)


def test_embedding_single_atom():
    # ||k_0||_{L^2(dmu)} / ||k_0||_2 with ||k_0||_2 = sqrt(pi)
    assert embedding_lower_bound(ATOM, 2, 2, [0j]).value == pytest.approx(1 / math.sqrt(math.pi))


def test_embedding_mass_scaling():
    a = embedding_lower_bound(ATOM, 2, 2, [0j]).value
    b = embedding_lower_bound(MeasureSample.atoms([0j], [2.0]), 2, 2, [0j]).value
    assert b == pytest.approx(math.sqrt(2) * a)


@pytest.mark.parametrize("spec", ["(zb*gauss(1))^2", "gauss(0.5)", "1@3"])
def test_embedding_below_pi2(spec):
    mu = MeasureSample.parse(spec)
    pts = build_lattice(0.5, 4.0).nearest(9)
    assert embedding_lower_bound(mu, 2, 2, pts).value <= pi2_embedding(mu, 1.0) + 1e-12


def test_embedding_p1_rademacher_family_runs():
    mu = MeasureSample.density("gauss(0.5)", 1.0)
    pts = build_lattice(1.0, 3.0).nearest(5)
    est = embedding_lower_bound(mu, 1, 2, pts)
    assert est.value > 0 and math.isfinite(est.value)


def test_transform_equivalence_ratios():
    lat = build_lattice(0.5, 8.0)
    for mu in (MeasureSample.density("gauss(0.5)", 1.0), MeasureSample.lebesgue(3.0)):
        for t in (1.0, 2.0):
            rep = transform_equivalence_check(mu, 1.0, t, lat)
            assert 0.1 <= rep.ratio <= 10


def test_transform_scaling_exact():
    lat = build_lattice(0.5, 6.0)
    mu = MeasureSample.density("gauss(0.5)", 1.0)
    a = transform_equivalence_check(mu, 1.0, 1.0, lat)
    b = transform_equivalence_check(mu.scale(5.0), 1.0, 1.0, lat)
    assert b.hat_norm == pytest.approx(5 * a.hat_norm, rel=1e-12)
    assert b.tilde_norm == pytest.approx(5 * a.tilde_norm, rel=1e-12)
