import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from realdet.deformations import VectorField, compose, flow, identity, translation
from realdet.errors import OutsideDomainError, PreconditionError, ResidualError
from realdet.uniformize import DeformedCylinder, UniformizationResult, invert_map, unif_factor, uniformize

COS = VectorField.parse("cos(1)")
ISIN = VectorField.parse("i*sin(1)")
BUMPY = compose(flow(ISIN, 0.04), flow(VectorField.parse("i*0.3*cos(2)"), 0.05))


def test_identity_is_exact():
    u = uniformize(DeformedCylinder.standard())
    assert u.tau == pytest.approx(1.0, abs=1e-13)
    assert np.max(np.abs(u.a)) < 1e-13 and np.max(np.abs(u.b)) < 1e-13


@settings(max_examples=10, deadline=None)
@given(st.floats(-0.3, 0.3).filter(lambda a: abs(a) > 1e-3))
def test_vertical_translation_shrinks_tau(a):
    u = uniformize(DeformedCylinder(translation(1j * a)))
    assert u.tau == pytest.approx(1.0 - a, abs=1e-12)


def test_rotation_keeps_tau():
    u = uniformize(DeformedCylinder(translation(1.3)))
    assert u.tau == pytest.approx(1.0, abs=1e-12)


def test_boundaries_go_to_straight_lines_off_grid():
    cyl = DeformedCylinder(BUMPY)
    u = uniformize(cyl)
    th = np.linspace(0.05, 6.2, 97)
    lower = BUMPY(th.astype(complex))
    assert np.max(np.abs(u(lower).imag)) < 1e-8
    assert np.max(np.abs(u(th + 1j).imag - u.tau)) < 1e-8


def test_normalization_fixes_real_part_at_i():
    u = uniformize(DeformedCylinder(BUMPY))
    assert abs(u(np.array([1j]))[0].real) < 1e-9


def test_mode_doubling_converges():
    cyl = DeformedCylinder(BUMPY)
    assert abs(uniformize(cyl, 48).tau - uniformize(cyl, 96).tau) < 1e-9


def test_small_deformation_tau_is_one_minus_mean_height_to_second_order():
    gaps = []
    for eps in (0.04, 0.02):
        m = flow(VectorField.parse("i*cos(1)"), eps)
        u = uniformize(DeformedCylinder(m))
        gaps.append(abs(u.tau - (1 - np.mean(m.values().imag))))
    assert gaps[0] / gaps[1] == pytest.approx(4.0, rel=0.1)


def test_invert_map_roundtrip():
    u = uniformize(DeformedCylinder(BUMPY))
    w = np.array([0.3 + 0.2j, 4.0 + 0.7j])
    z = invert_map(u, w)
    assert np.max(np.abs(u(z) - w)) < 1e-12
    with pytest.raises(OutsideDomainError):
        invert_map(u, np.array([0.0 + 2.0j]))


def test_unif_factor_positive_and_domain_checked():
    u = uniformize(DeformedCylinder(BUMPY))
    assert np.all(unif_factor(u, np.array([0.5 + 0.5j])) > 0)
    with pytest.raises(OutsideDomainError):
        unif_factor(u, np.array([0.5 + 1.5j]))


def test_too_few_modes_is_a_residual_failure():
    rough = flow(VectorField.parse("i*0.4*cos(6)"), 0.2)
    with pytest.raises(ResidualError):
        uniformize(DeformedCylinder(rough), M=4)


def test_upper_line_must_clear_the_curve():
    with pytest.raises(PreconditionError):
        DeformedCylinder(translation(0.5j), upper_height=0.4)


def test_json_roundtrip():
    u = uniformize(DeformedCylinder(BUMPY))
    back = UniformizationResult.from_json(u.to_json())
    z = np.array([0.4 + 0.3j])
    assert back(z)[0] == u(z)[0] and back.tau == u.tau
