import math

import numpy as np
import pytest

from qsh import fields as F
from qsh.calculus import dbar1_d1, slice_hessian
from qsh.errors import NoClosedForm, OutsideDomain
from qsh.green import (
    GreenSpec,
    SymmetricSlice,
    affine_image,
    ball_green,
    ball_green_slice_laplacian,
    green_monotonicity_check,
    green_value,
    moebius_inequality_check,
    moebius_sweep,
    poincare_distance,
    pole_admissible,
    sandwich_check,
    slice_green,
    slice_green_axial,
    unit_disc_oracle,
    weak_green_bounds,
    weak_green_hessian,
    weak_green_probe,
    weak_green_slice_laplacian,
)
from qsh.quaternion import CANONICAL_FRAME, Frame, Quaternion, as_unit, frame_complete
from qsh.regular import regular_moebius

HALF_I = Quaternion(0, 0.5)


def test_unit_ball_green_function():
    spec = GreenSpec.ball(0, 1)
    assert ball_green(spec, Quaternion(0, 0, 0.5).array) == pytest.approx(math.log(0.5), abs=1e-15)
    assert ball_green(spec, np.zeros(4)) == -math.inf
    with pytest.raises(OutsideDomain):
        ball_green(spec, np.array([0.0, 0, 0, 1.0]))


def test_ball_green_requires_centered_pole():
    spec = GreenSpec.ball(0, 1, pole=HALF_I)
    with pytest.raises(NoClosedForm):
        ball_green(spec, np.zeros(4))
    with pytest.raises(OutsideDomain):
        GreenSpec.ball(0, 1, pole=Quaternion(2))


def test_ball_green_slice_laplacian():
    frame = Frame.from_units(Quaternion(0, 0, 1), Quaternion(0, 1))
    assert ball_green_slice_laplacian(HALF_I, frame, 0j) == pytest.approx(2.0, abs=1e-14)
    fd = dbar1_d1(F.ball_green_field(HALF_I, 1.0), frame, Quaternion())
    assert fd == pytest.approx(2.0, rel=1e-5)


def test_slice_green_matches_planar_oracle():
    oracle = unit_disc_oracle(0.3)
    expect = math.log(abs(0.4j) / abs(1 - (0.3 + 0.4j) * 0.3))
    assert slice_green(oracle, 0.3, Quaternion(0.3, 0, 0, 0.4).array) == pytest.approx(expect, abs=1e-15)
    assert slice_green(oracle, 0.3, np.array([0.3, 0, 0, 0])) == -math.inf
    for I in ((1, 0, 0), (0, 0, 1), (0.3, -0.4, 0.5)):
        assert slice_green_axial(oracle, 0.3, 0.4, I) == float(oracle(0.3 + 0.4j))


def test_slice_spec_routes_to_the_oracle():
    spec = GreenSpec(SymmetricSlice(unit_disc_oracle(-0.2)), Quaternion(-0.2), "weak")
    q = Quaternion(0.1, 0.2, 0.2, 0.1).array
    assert green_value(spec, q) == slice_green(unit_disc_oracle(-0.2), -0.2, q)
    with pytest.raises(ValueError):
        GreenSpec(SymmetricSlice(unit_disc_oracle(-0.2)), HALF_I, "weak")


def test_pole_admissibility():
    assert pole_admissible(F.ball_green_field(Quaternion(), 1.0), Quaternion()).passed
    twice = F.log_abs().scaled(2.0)
    assert not pole_admissible(twice, Quaternion()).passed
    moeb = F.ScalarField(lambda q: np.log(np.linalg.norm(regular_moebius(HALF_I.array, q), axis=-1)),
                         F.UNIT_BALL, "log|reg M|")
    assert pole_admissible(moeb, HALF_I).passed


def test_green_monotonicity():
    small, big = GreenSpec.ball(0, 1), GreenSpec.ball(0, 2)
    assert green_monotonicity_check(small, big).passed
    eq = green_monotonicity_check(small, small)
    assert eq.passed and eq.worst == 0.0


def test_sandwich_and_affine_invariance():
    spec = GreenSpec.ball(Quaternion(0.2, 0.1), 1.3)
    assert sandwich_check(spec, 0.9, 2.0).passed
    a, b = Quaternion(1, -2, 0.5, 0), Quaternion(0.3, 0.2, -0.7, 0.4)
    image = affine_image(spec, a, b)
    rng = np.random.default_rng(1)
    for q in spec.domain.sample(rng, 20):
        fq = (a + Quaternion.from_array(q) * b).array
        assert ball_green(image, fq) == pytest.approx(ball_green(spec, q), abs=1e-12)


def test_weak_green_candidate_is_harmonic_on_its_slice():
    frame = frame_complete(as_unit(HALF_I))
    for z in (0.1 + 0.2j, -0.3 - 0.5j, 0.4 - 0.6j):
        assert weak_green_slice_laplacian(HALF_I, frame, z) == pytest.approx(0.0, abs=1e-14)
        assert dbar1_d1(F.weak_green_field(HALF_I), frame, frame.to_slice(z)) == pytest.approx(0.0, abs=1e-6)


def test_weak_green_candidate_is_subharmonic_off_its_slice():
    frame = Frame.from_units(Quaternion(0, 0, 1), Quaternion(0, 1))
    u = F.weak_green_field(HALF_I)
    for z in (0j, 0.3 + 0.2j, -0.5 - 0.4j):
        closed = weak_green_slice_laplacian(HALF_I, frame, z)
        assert closed > 0
        assert dbar1_d1(u, frame, frame.to_slice(z)) == pytest.approx(closed, rel=1e-4)


def test_weak_green_hessian_matches_finite_differences():
    q0 = Quaternion(0.1, 0.3, -0.2, 0.25)
    frame = frame_complete((0.4, 0.1, 0.9))
    q = Quaternion(-0.2, 0.1, 0.3, -0.15)
    closed = weak_green_hessian(q0, frame, q).matrix()
    fd = slice_hessian(F.weak_green_field(q0), frame, q).matrix()
    np.testing.assert_allclose(fd, closed, atol=1e-5)


def test_weak_green_hessian_is_indefinite_at_the_probe():
    frame, q = weak_green_probe(HALF_I)
    H = weak_green_hessian(HALF_I, frame, q)
    lo, hi = H.eigenvalues()
    assert lo < 0 < hi
    assert not slice_hessian(F.weak_green_field(HALF_I), frame, q).is_psd()


def test_weak_green_bounds_are_ordered():
    b = weak_green_bounds(HALF_I, Quaternion(0, 0, 0.5))
    assert b.lower_regular <= b.lower_classical <= b.upper == 0.0
    with pytest.raises(NoClosedForm):
        green_value(GreenSpec.ball(0, 1, pole=HALF_I, flavor="weak"), np.zeros(4))


def test_poincare_distance():
    assert poincare_distance(HALF_I.array, HALF_I.array) == 0.0
    assert poincare_distance(HALF_I.array, np.zeros(4)) == pytest.approx(0.5 * math.log(3), abs=1e-15)


def test_moebius_inequality_examples():
    m = moebius_inequality_check(HALF_I, Quaternion(0.3, 0.1))
    assert m.equality and abs(m.margin) < 1e-12
    m = moebius_inequality_check(HALF_I, Quaternion(0, 0, 0.5))
    assert not m.equality and m.margin > 0
    assert m.inner == pytest.approx(m.closed_form, abs=1e-12) and m.closed_form > 0
    assert m.delta_after <= m.delta_before


def test_moebius_sweep():
    rng = np.random.default_rng(9)
    d = rng.normal(size=(2, 2000, 4))
    pts = d / np.linalg.norm(d, axis=-1, keepdims=True) * rng.uniform(0, 0.95, size=(2, 2000, 1))
    s = moebius_sweep(pts[0], pts[1])
    assert s.violations() == 0
    assert np.max(np.abs(s.inner - s.closed_form)) < 1e-10
    assert np.all(s.delta_after <= s.delta_before + 1e-12)
    with pytest.raises(ValueError):
        moebius_sweep(np.array([0.5, 0, 0, 0]), np.zeros(4))


def test_canonical_frame_split_of_pole():
    q1, q2 = CANONICAL_FRAME.split(HALF_I.array)
    assert q1 == 0.5j and q2 == 0
