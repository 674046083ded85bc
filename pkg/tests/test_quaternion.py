import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsh.errors import RealAxisPoint
from qsh.quaternion import (
    CANONICAL_FRAME,
    Frame,
    Quaternion,
    UnitImaginary,
    as_unit,
    coordinates,
    format_quaternion,
    frame_complete,
    j_structure,
    mul,
    parse_quaternion,
    qconj,
    qinv,
    qmul,
    qnorm,
    recompose,
    sphere_sample,
    sphere_sample_array,
)

ONE = Quaternion(1)
I, J, K = Quaternion(0, 1), Quaternion(0, 0, 1), Quaternion(0, 0, 0, 1)

finite = st.floats(-10, 10, allow_nan=False)
quats = st.builds(Quaternion, finite, finite, finite, finite)
directions = st.tuples(finite, finite, finite).filter(lambda v: np.linalg.norm(v) > 1e-3)


def test_multiplication_table():
    assert mul(I, J) == K
    assert mul(J, I) == -K
    assert I * I == -ONE and J * J == -ONE and K * K == -ONE
    assert I * J * K == -ONE


@given(quats)
def test_identity_and_conjugate(q):
    assert mul(q, ONE) == q
    assert (q * q.conj()).isclose(Quaternion(q.norm2()), 1e-9 * max(1.0, q.norm2()))


@given(quats, quats, quats)
def test_associativity_and_norm(a, b, c):
    scale = max(1.0, a.norm() * b.norm() * c.norm())
    assert ((a * b) * c).isclose(a * (b * c), 1e-12 * scale)
    assert math.isclose((a * b).norm(), a.norm() * b.norm(), rel_tol=1e-12, abs_tol=1e-12)


def test_array_helpers_match_scalar_type():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(2, 5, 4))
    expect = np.array([(Quaternion.from_array(x) * Quaternion.from_array(y)).array for x, y in zip(a, b)])
    np.testing.assert_allclose(qmul(a, b), expect, atol=1e-14)
    np.testing.assert_allclose(qmul(a, qinv(a)), np.tile([1.0, 0, 0, 0], (5, 1)), atol=1e-14)
    np.testing.assert_allclose(qnorm(qconj(a)), qnorm(a))


def test_coordinates_of_basis_points():
    c = coordinates(ONE, frame_complete(Quaternion(0, 0.6, 0, 0.8)))
    assert (c.x0, c.x1, c.x2, c.x3) == pytest.approx((1, 0, 0, 0), abs=1e-15)
    assert c.z1 == pytest.approx(1) and c.z2 == pytest.approx(0)
    c = coordinates(J, CANONICAL_FRAME)
    assert (c.x0, c.x1, c.x2, c.x3) == pytest.approx((0, 0, 1, 0), abs=1e-15)
    assert c.z1 == pytest.approx(0) and c.z2 == pytest.approx(1)


def test_coordinates_reassemble():
    q = Quaternion(0.3, 0.4, -0.1, 0.2)
    c = coordinates(q, CANONICAL_FRAME)
    from_x, from_z = recompose(c, CANONICAL_FRAME)
    assert (from_x - q).norm() < 1e-12 and (from_z - q).norm() < 1e-12


@settings(max_examples=50)
@given(quats, directions)
def test_coordinates_roundtrip_any_frame(q, v):
    frame = frame_complete(v)
    c = coordinates(q, frame)
    from_x, from_z = recompose(c, frame)
    tol = 1e-12 * max(1.0, q.norm())
    assert (from_x - q).norm() < tol and (from_z - q).norm() < tol
    z1, z2 = frame.split(q.array)
    assert abs(z1 - c.z1) < tol and abs(z2 - c.z2) < tol


@pytest.mark.parametrize("unit", [I, K, as_unit((1, 1, 0))])
def test_frame_complete_invariants(unit):
    f = frame_complete(unit)
    assert abs(f.I.dot(f.J)) < 1e-12
    assert abs(f.J.norm() - 1) < 1e-12
    assert (f.I * f.J).isclose(f.K)
    assert np.allclose(f.basis @ f.basis.T, np.eye(4), atol=1e-12)


def test_frame_rejects_non_orthogonal_units():
    with pytest.raises(ValueError):
        Frame.from_units(I, as_unit((1, 1, 0)))


def test_unit_imaginary_validation():
    with pytest.raises(ValueError):
        UnitImaginary(0.0, 2.0)
    with pytest.raises(ValueError):
        UnitImaginary(1.0)


def test_j_structure():
    assert j_structure(Quaternion(2, 3)).isclose(I, 0.0)
    assert j_structure(Quaternion(1, 0, 1, 1)).isclose(Quaternion(0, 0, 1, 1) * (1 / math.sqrt(2)))
    with pytest.raises(RealAxisPoint):
        j_structure(Quaternion(5))


def test_sphere_sample_canonical_and_units():
    six = sphere_sample(6)
    for u in (I, J, K, -I, -J, -K):
        assert any(s.isclose(u) for s in six)
    for s in sphere_sample(100):
        assert abs(s.w) == 0.0 and abs(s.norm() - 1) < 1e-12


def test_sphere_sample_is_spread_out():
    pts = sphere_sample_array(500)
    cosines = np.clip(pts @ pts.T, -1, 1)
    np.fill_diagonal(cosines, -1)
    nearest = np.arccos(cosines.max(axis=1))
    uniform = math.sqrt(4 * math.pi / 500)
    assert nearest.min() > uniform / 3 and nearest.max() < 3 * uniform


@pytest.mark.parametrize("text,expect", [
    ("1", Quaternion(1)),
    ("0.5j", Quaternion(0, 0, 0.5)),
    ("-i", Quaternion(0, -1)),
    ("0.3+0.4i-0.1j+2e-3k", Quaternion(0.3, 0.4, -0.1, 0.002)),
    (".5+k", Quaternion(0.5, 0, 0, 1)),
])
def test_parse_literals(text, expect):
    assert parse_quaternion(text) == expect


@pytest.mark.parametrize("text", ["", "1 + i", "i2", "1i2", "++i", "x", "1.2.3"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        parse_quaternion(text)


@given(quats)
def test_format_parse_roundtrip(q):
    assert parse_quaternion(format_quaternion(q)) == q
