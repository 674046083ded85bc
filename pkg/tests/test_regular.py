import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsh.quaternion import CANONICAL_FRAME, Quaternion, frame_complete, qmul, qnorm
from qsh.regular import (
    MoebiusMap,
    RegularPoly,
    affine,
    classical_moebius,
    conjugation_t,
    holomorphy_matrix_check,
    moebius_inverse_check,
    random_poly,
    regular_conjugate,
    regular_moebius,
    slice_derivative,
    spherical_derivative,
    star_product,
    symmetrization,
)

ONE = Quaternion(1)
I, J, K = Quaternion(0, 1), Quaternion(0, 0, 1), Quaternion(0, 0, 0, 1)


def close(p: RegularPoly, coeffs, tol=1e-14):
    got = p.trimmed(tol).coeff_array
    want = RegularPoly(tuple(coeffs)).coeff_array
    return got.shape == want.shape and np.allclose(got, want, atol=tol)


def test_evaluation_examples():
    assert RegularPoly.of(0, 1)(J) == J
    assert RegularPoly.of(Quaternion(2, 1))(Quaternion(0.3, 0.1, 0.2)) == Quaternion(2, 1)
    assert RegularPoly.of(-I, 1)(I) == Quaternion()


def test_coefficients_act_on_the_right():
    # q a evaluated at q = i with a = j gives ij = k, while a q would give -k
    assert RegularPoly.of(0, J)(I) == K


def test_star_product_examples():
    f, g = RegularPoly.of(-I, 1), RegularPoly.of(-J, 1)
    assert close(star_product(f, g), [K, -(I + J), 1])
    assert close(star_product(f, RegularPoly.of(1)), f.coeffs)


def test_star_product_is_pointwise_for_real_coefficients():
    rng = np.random.default_rng(1)
    f, g = random_poly(rng, 3, real=True), random_poly(rng, 2, real=True)
    q = rng.normal(size=(100, 4))
    np.testing.assert_allclose(star_product(f, g).evaluate(q), qmul(f.evaluate(q), g.evaluate(q)), atol=1e-10)


def test_conjugate_and_symmetrization():
    f = RegularPoly.of(-I, 1)
    assert close(regular_conjugate(f), [I, 1])
    assert close(symmetrization(f), [1, 0, 1])
    real = RegularPoly.of(1.5, -2, 0.25)
    assert close(regular_conjugate(real), real.coeffs)


@settings(max_examples=25)
@given(st.integers(0, 4), st.integers(0, 2**32 - 1))
def test_symmetrization_has_real_coefficients(degree, seed):
    f = random_poly(np.random.default_rng(seed), degree)
    assert symmetrization(f).is_slice_preserving(1e-10)


def test_slice_derivative_examples():
    assert close(slice_derivative(RegularPoly.of(0, 0, 1)), [0, 2])
    assert close(slice_derivative(RegularPoly.of(Quaternion(3, 1))), [0])
    v, p = Quaternion(0.2, -1, 0.5, 0.3), Quaternion(1, 2, 3, 4)
    assert close(slice_derivative(affine(v, p)), [v])


def test_spherical_derivative_examples():
    rng = np.random.default_rng(2)
    ident, const, square = RegularPoly.of(0, 1), RegularPoly.of(Quaternion(1, 2)), RegularPoly.of(0, 0, 1)
    for _ in range(20):
        x, y = rng.normal(size=2)
        u = rng.normal(size=3)
        q = np.concatenate([[x], y * u / np.linalg.norm(u)])
        np.testing.assert_allclose(spherical_derivative(ident, q), [1, 0, 0, 0], atol=1e-12)
        np.testing.assert_allclose(spherical_derivative(const, q), [0, 0, 0, 0], atol=1e-12)
        np.testing.assert_allclose(spherical_derivative(square, q), [2 * x, 0, 0, 0], atol=1e-12)


def test_moebius_maps():
    rng = np.random.default_rng(3)
    q = rng.normal(size=(10, 4)) * 0.2
    np.testing.assert_allclose(MoebiusMap(0.0)(q), q, atol=1e-15)
    np.testing.assert_allclose(MoebiusMap(0.4, "conjugationT")(q), q, atol=1e-15)
    t = MoebiusMap(Quaternion(0, 0.5), "conjugationT")(Quaternion(0, 0, 0.5))
    assert t.isclose(Quaternion(0, 4 / 17, 15 / 34), 1e-15)
    assert math.isclose(t.norm(), 0.5, rel_tol=1e-15)


def test_regular_moebius_factors_through_t():
    rng = np.random.default_rng(4)
    q0 = rng.normal(size=(50, 4)) * 0.3
    q = rng.normal(size=(50, 4)) * 0.3
    np.testing.assert_allclose(regular_moebius(q0, q), classical_moebius(q0, conjugation_t(q0, q)), atol=1e-13)
    np.testing.assert_allclose(qnorm(conjugation_t(q0, q)), qnorm(q), atol=1e-15)


@pytest.mark.parametrize("pole,q,tol", [
    (Quaternion(0.3), Quaternion(0, 0, 0.5), 1e-10),
    (Quaternion(0, 0.5), Quaternion(), 1e-10),
    (Quaternion(0, 0.5), Quaternion(0, 0.5), 1e-12),
])
def test_moebius_inverse(pole, q, tol):
    r = moebius_inverse_check(MoebiusMap(pole), q.array)
    assert r.classical < tol and r.conjugation < tol


def test_pole_maps_to_zero():
    q0 = Quaternion(0.1, 0.2, -0.3, 0.1).array
    assert qnorm(classical_moebius(q0, q0)) == 0.0
    np.testing.assert_allclose(classical_moebius(-q0, np.zeros(4)), q0, atol=1e-15)


def test_moebius_pole_must_be_inside_ball():
    with pytest.raises(ValueError):
        MoebiusMap(Quaternion(0, 1))


def test_holomorphy_matrix_square():
    c = holomorphy_matrix_check(RegularPoly.of(0, 0, 1), CANONICAL_FRAME, Quaternion(1, 2))
    assert c.dbar_residual < 1e-6 and c.jacobian_residual < 1e-6


def test_holomorphy_matrix_constant():
    c = holomorphy_matrix_check(RegularPoly.of(Quaternion(1, 2, 3, 4)), CANONICAL_FRAME, Quaternion(0.3, 0.2))
    assert np.max(np.abs(c.dbar)) < 1e-10 and np.max(np.abs(c.jacobian)) < 1e-10


def test_holomorphy_matrix_affine_at_origin():
    frame = frame_complete((0.3, -0.5, 0.8))
    v = Quaternion(0.4, -0.2, 0.7, 0.1)
    c = holomorphy_matrix_check(affine(v, Quaternion(1, 1, 1, 1)), frame, Quaternion())
    v1, v2 = frame.split(v.array)
    assert c.jacobian[0, 0] == pytest.approx(complex(v1), abs=1e-9)
    assert c.jacobian[1, 0] == pytest.approx(complex(v2), abs=1e-9)


def test_holomorphy_matrix_requires_slice_point():
    with pytest.raises(ValueError):
        holomorphy_matrix_check(RegularPoly.of(0, 1), CANONICAL_FRAME, Quaternion(0, 0, 1))
