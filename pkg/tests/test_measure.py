import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from renyi_exhaust import density
from renyi_exhaust import measure as ms


def _random_measure(rng, B=256, atoms=2):
    bins = rng.random(B) * (rng.random(B) < 0.7)
    pts = [(float(rng.uniform(0, 2)), float(rng.random())) for _ in range(atoms)]
    return ms.GridMeasure(bins, pts)


def test_delta_one_goes_to_two():
    mu = ms.apply_T(ms.delta(1.0, 64))
    assert mu.atoms == [(2.0, 1.0)]
    assert mu.bins.sum() == 0.0


def test_delta_zero_is_fixed():
    mu = ms.apply_T(ms.delta(0.0, 64))
    assert mu.atoms == [(0.0, 1.0)]


def test_atom_above_one_spreads_uniformly():
    mu = ms.apply_T(ms.delta(1.5, 64))
    # density 1/(x-1) = 2 on [0, 1], total mass 2
    assert mu.mass() == pytest.approx(2.0)
    dens = mu.density()
    assert np.allclose(dens[:32], 2.0) and np.allclose(dens[32:], 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_mass_law(seed):
    mu = _random_measure(np.random.default_rng(seed))
    t = ms.apply_T(mu)
    expected = mu.mass() + mu.upper_mass()
    assert abs(t.mass() - expected) <= 1e-6 * max(1.0, expected)


def test_V_bins_against_closed_form(fixed_point):
    # V of a smooth density, compared with cell integrals of the exact V f
    f = fixed_point.fstar
    B = 2048
    mu = ms.discretize(f, B)
    upper = ms.GridMeasure(np.where(np.arange(B) >= B // 2, mu.bins, 0.0))
    got = ms.apply_V(upper).density()
    x = (np.arange(B) + 0.5) * (2.0 / B)
    ref = density.apply_V(f, x)
    keep = x > 0.05
    assert np.max(np.abs(got[keep] - ref[keep])) < 5e-3


def test_zero_image_mass():
    with pytest.raises(ms.ZeroImageMass):
        ms.apply_That(ms.GridMeasure(np.zeros(16)))


def test_atoms_present(fixed_point):
    with pytest.raises(ms.AtomsPresent):
        ms.distance_to_fstar(ms.delta(0.5, 16), fixed_point.fstar)


def test_fstar_is_fixed_up_to_discretisation(fixed_point):
    B = 2**14
    mu = ms.discretize(fixed_point.fstar, B)
    out = ms.apply_Ttilde(mu, fixed_point.C)
    assert out.mass() == pytest.approx(1.0, abs=1e-9)
    err = ms.distance_to_fstar(out, fixed_point.fstar)
    assert err <= ms.discretization_error(fixed_point.fstar, B)


def test_orbit_of_point_below_one_doubles():
    orbit = ms.delta_orbit(0.3, 2, 64)
    assert orbit[1].atoms == [(0.6, 1.0)]
    assert orbit[2].atoms == [(1.2, 1.0)]


def test_discretisation_error_shrinks(fixed_point):
    d12 = ms.distance_to_fstar(ms.delta_orbit(1.3, 30, 2**12)[-1], fixed_point.fstar)
    d14 = ms.distance_to_fstar(ms.delta_orbit(1.3, 30, 2**14)[-1], fixed_point.fstar)
    assert d14 < d12 / 2
