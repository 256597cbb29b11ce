import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from realdet.anomaly_field import ConformalFactor, CylinderGrid, pairing
from realdet.deformations import VectorField, flow, identity
from realdet.detline_cylinder import (
    Charge,
    _stack,
    DetVector,
    bump_metric,
    det_add,
    equal,
    equality_defect,
    gamma_cyl,
    log_gamma_cyl,
    mu_c,
    normalize,
    sew,
    transfer,
)
from realdet.errors import ChargeMismatchError, GridMismatchError, PreconditionError, SeamError
from realdet.uniformize import DeformedCylinder

DX = 1 / 64
C1 = Charge(1.0)


def straight(n_x, k=0, amp=0.2, n_theta=64):
    tau = DX * (n_x - 1)
    g = CylinderGrid(n_theta, n_x, 0.0, tau)
    th, x = g.mesh()
    s = 0.035 * tau
    f = amp * np.exp(-0.5 * ((x - tau / 2) / s) ** 2) * (1 + 0.3 * np.cos(k * th))
    f[np.abs(f) < 1e-300] = 0.0
    return ConformalFactor(g, f, (0.2 * tau, 0.2 * tau))


def test_charge_must_be_finite():
    with pytest.raises(PreconditionError):
        Charge(math.inf)


def test_transfer_is_the_pairing_exponential():
    g = CylinderGrid(64, 65, 0.0, 1.0)
    a = DetVector(1.0, ConformalFactor.flat(g), C1)
    b = DetVector(2.0, bump_metric(g), C1)
    assert transfer(a, b) == pytest.approx(2.0 * math.exp(pairing(a.factor, b.factor)), rel=1e-15)


def test_normalize_then_equal():
    g = CylinderGrid(64, 65, 0.0, 1.0)
    b = DetVector(1.7, bump_metric(g, eps=0.3, modulation=0.4), Charge(2.5))
    n = normalize(b, ConformalFactor.flat(g))
    assert equal(n, b, rtol=1e-12)


def test_mismatches_are_rejected():
    g = CylinderGrid(64, 65, 0.0, 1.0)
    h = CylinderGrid(64, 65, 0.0, 2.0)
    with pytest.raises(ChargeMismatchError):
        equality_defect(DetVector(1, ConformalFactor.flat(g), C1), DetVector(1, ConformalFactor.flat(g), Charge(2)))
    with pytest.raises(GridMismatchError):
        equality_defect(DetVector(1, ConformalFactor.flat(g), C1), DetVector(1, ConformalFactor.flat(h), C1))


@settings(max_examples=15, deadline=None)
@given(st.floats(0.02, 0.3), st.floats(-0.8, 0.8), st.floats(-3, 3))
def test_mu_c_does_not_depend_on_the_metric(eps, modulation, c):
    A = DeformedCylinder(flow(VectorField.parse("i*sin(1)"), 0.03))
    m1 = mu_c(A, Charge(c), 64, 65)
    m2 = mu_c(A, Charge(c), 64, 65, metric=bump_metric(m1.factor.grid, eps, modulation=modulation))
    assert equality_defect(m1, m2) < 1e-12


def test_mu_c_of_standard_cylinder_on_flat_metric_is_one():
    A = DeformedCylinder(identity())
    g = mu_c(A, C1, 64, 65).factor.grid
    assert g.x_hi == pytest.approx(1.0, abs=1e-13)
    assert mu_c(A, C1, 64, 65, metric=ConformalFactor.flat(g)).lam == 1.0


def test_det_add_is_commutative_and_linear():
    g = CylinderGrid(64, 65, 0.0, 1.0)
    a = DetVector(1.0, bump_metric(g, 0.2), C1)
    b = DetVector(3.0, bump_metric(g, 0.1, modulation=0.5), C1)
    assert equality_defect(det_add(a, b), det_add(b, a)) < 1e-14
    assert equality_defect(det_add(a, a), a.scaled(2.0)) < 1e-15


def test_sew_is_associative():
    fa, fb, fc = straight(65), straight(81, k=1), straight(97, k=2)
    a, b, c = (DetVector(x, f, C1) for x, f in zip((1.0, 2.0, 0.5), (fa, fb, fc)))
    left, right = sew(sew(a, b), c), sew(a, sew(b, c))
    assert left.factor.grid == right.factor.grid
    assert np.array_equal(left.factor.f, right.factor.f) and left.lam == right.lam


def test_sew_requires_flat_seam_and_matching_spacing():
    with pytest.raises(SeamError):
        sew(DetVector(1, straight(65, amp=0.2), C1), DetVector(1, ConformalFactor(
            CylinderGrid(64, 65, 0.0, 1.0), np.full((64, 65), 0.1)), C1))
    coarse = ConformalFactor.flat(CylinderGrid(64, 65, 0.0, 2.0))
    with pytest.raises(SeamError):
        sew(DetVector(1, straight(65), C1), DetVector(1, coarse, C1))


@settings(max_examples=15, deadline=None)
@given(st.integers(32, 64), st.integers(32, 64), st.integers(32, 64), st.integers(0, 3))
def test_sewing_cocycle(na, nb, nc, k):
    ga, gb, gc = straight(2 * na + 1, k), straight(2 * nb + 1, k + 1), straight(2 * nc + 1)
    lhs = log_gamma_cyl(_stack(ga, gb), gc, C1) + log_gamma_cyl(ga, gb, C1)
    rhs = log_gamma_cyl(ga, _stack(gb, gc), C1) + log_gamma_cyl(gb, gc, C1)
    assert abs(lhs - rhs) < 1e-12
    assert gamma_cyl(ga, gb, C1) > 0


def test_sewing_flat_cylinders_is_trivial():
    ga, gb = (ConformalFactor.flat(CylinderGrid(64, n, 0.0, DX * (n - 1))) for n in (65, 81))
    assert log_gamma_cyl(ga, gb, C1) == 0.0


def test_detvector_json_roundtrip():
    v = DetVector(1.25, straight(65, k=1), Charge(3.0))
    w = DetVector.from_json(v.to_json())
    assert w.lam == v.lam and w.charge == v.charge and np.array_equal(w.factor.f, v.factor.f)
