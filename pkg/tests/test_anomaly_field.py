import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from realdet.anomaly_field import (
    ConformalFactor,
    CutoffProfile,
    CylinderGrid,
    SpectralBand,
    compact_in_x,
    d_x,
    d_xx,
    laplacian0,
    liouville_action,
    pairing,
)
from realdet.errors import AdmissibilityError, GridMismatchError, PreconditionError

GRID = CylinderGrid(128, 129, 0.0, 1.0)


def gaussian_factor(grid, amp, centre, width, k=0, ripple=0.0):
    th, x = grid.mesh()
    f = amp * np.exp(-0.5 * ((x - centre) / width) ** 2) * (1 + ripple * np.cos(k * th))
    f[np.abs(f) < 1e-300] = 0.0
    return ConformalFactor(grid, f)


factor_params = st.tuples(
    st.floats(-0.5, 0.5),        # amplitude
    st.floats(0.4, 0.6),         # centre
    st.floats(0.03, 0.045),      # width: below 1e-12 at the outer columns
    st.integers(0, 3),           # theta mode
    st.floats(-0.5, 0.5),        # ripple
)


def test_grid_validation():
    with pytest.raises(PreconditionError):
        CylinderGrid(63, 129)
    with pytest.raises(PreconditionError):
        CylinderGrid(64, 128)
    with pytest.raises(PreconditionError):
        CylinderGrid(64, 65, 1.0, 1.0)


def test_simpson_is_exact_for_cubics():
    th, x = GRID.mesh()
    assert GRID.integrate(x ** 3) == pytest.approx(2 * math.pi / 4, rel=1e-14)


def test_fd_derivatives_are_fourth_order_on_non_periodic_data():
    errs = []
    for n in (65, 129):
        g = CylinderGrid(64, n, 0.0, 1.0)
        _, x = g.mesh()
        errs.append(np.max(np.abs(d_xx(np.sin(3 * x), g.dx) + 9 * np.sin(3 * x))))
    assert errs[0] / errs[1] > 12


def test_compact_arrays_take_the_spectral_path():
    f = gaussian_factor(GRID, 1.0, 0.5, 0.04).f
    assert compact_in_x(f)
    _, x = GRID.mesh()
    u = (x - 0.5) / 0.04
    exact = (u * u - 1) / 0.04 ** 2 * np.exp(-0.5 * u * u)
    assert np.max(np.abs(d_xx(f, GRID.dx) - exact)) < 1e-8 * np.max(np.abs(exact))
    assert np.max(np.abs(d_x(f, GRID.dx) + u / 0.04 * np.exp(-0.5 * u * u))) < 1e-9


def test_pairing_with_flat_matches_gaussian_closed_form():
    # <0 | a g> = -(1/96 pi) int |grad(a g)|^2 = -a^2 sqrt(pi) / (96 s)
    a, s = 0.3, 0.05
    f = gaussian_factor(GRID, a, 0.5, s)
    exact = -a * a * math.sqrt(math.pi) / (96 * s)
    assert pairing(ConformalFactor.flat(GRID), f) == pytest.approx(exact, rel=1e-12)


def test_laplacian_of_harmonic_function_vanishes():
    f = ConformalFactor.from_function(GRID, lambda th, x: np.exp(-2 * x) * np.cos(2 * th))
    assert np.max(np.abs(laplacian0(f))) < 1e-5


@settings(max_examples=25, deadline=None)
@given(factor_params, factor_params)
def test_pairing_is_antisymmetric(p1, p2):
    f1, f2 = gaussian_factor(GRID, *p1), gaussian_factor(GRID, *p2)
    assert pairing(f1, f2) == -pairing(f2, f1)


@settings(max_examples=25, deadline=None)
@given(factor_params, factor_params, factor_params)
def test_pairing_cocycle(p1, p2, p3):
    f1, f2, f3 = (gaussian_factor(GRID, *p) for p in (p1, p2, p3))
    defect = pairing(f1, f2) + pairing(f2, f3) - pairing(f1, f3)
    assert abs(defect) < 1e-12


@settings(max_examples=20, deadline=None)
@given(factor_params)
def test_flat_pairing_is_minus_liouville_action(p):
    s = gaussian_factor(GRID, *p)
    flat = ConformalFactor.flat(GRID)
    assert pairing(flat, s.scaled(2.0)) == pytest.approx(-liouville_action(s, flat), abs=1e-15)


def test_pairing_is_invariant_under_grid_rotation():
    f1 = gaussian_factor(GRID, 0.2, 0.5, 0.04, k=2, ripple=0.3)
    f2 = gaussian_factor(GRID, -0.1, 0.45, 0.035, k=1, ripple=0.4)
    rolled = [ConformalFactor(GRID, np.roll(f.f, 17, axis=0)) for f in (f1, f2)]
    assert pairing(*rolled) == pytest.approx(pairing(f1, f2), rel=1e-13)


def test_admissible_margins_are_enforced():
    f = gaussian_factor(GRID, 0.3, 0.5, 0.04).f
    ConformalFactor(GRID, f, (0.2, 0.2))
    with pytest.raises(AdmissibilityError):
        ConformalFactor(GRID, f + 1e-6, (0.2, 0.2))


def test_grid_mismatch():
    other = CylinderGrid(128, 129, 0.0, 2.0)
    with pytest.raises(GridMismatchError):
        pairing(ConformalFactor.flat(GRID), ConformalFactor.flat(other))


def test_csv_roundtrip():
    f = ConformalFactor(GRID, gaussian_factor(GRID, 0.3, 0.5, 0.04, k=1, ripple=0.2).f, (0.2, 0.2))
    g = ConformalFactor.from_csv(f.to_csv())
    assert g.grid == f.grid and np.array_equal(g.f, f.f)
    assert g.admissible_margins == f.admissible_margins


@pytest.mark.parametrize("kind", ["smoothstep-quintic", "exp-bump"])
def test_cutoff_profile(kind):
    c = CutoffProfile(0.2, 0.4, kind)
    x = np.linspace(0, 1, 201)
    y = c(x)
    assert np.all(y[x <= 0.2] == 1) and np.all(y[x >= 0.4] == 0)
    assert np.all(np.diff(y) <= 1e-15)
    assert c(0.3) == pytest.approx(0.5, abs=1e-12)
    assert c.swapped().kind != kind


def test_spectral_band_pairing_closed_form():
    # Delta_0 sin(pi x) = pi^2 sin(pi x); <0 | sin(pi x)> = -(pi^2 / 96)
    band = SpectralBand(0.0, 1.0, 16, 33)
    f = np.sin(np.pi * band.x)[None, :] * np.ones((16, 1))
    assert band.pairing(np.zeros_like(f), f) == pytest.approx(-math.pi ** 2 / 96, rel=1e-12)


def test_spectral_band_laplacian():
    band = SpectralBand(0.3, 0.9, 32, 25)
    z = band.points()
    f = np.real(np.exp(1j * 3 * z))  # harmonic
    assert np.max(np.abs(band.laplacian(f))) < 1e-9
