"""Quaternion arithmetic, orthonormal frames and slice coordinates.

Scalar quaternions are :class:`Quaternion` values; bulk work goes through the
array helpers (``qmul``, ``qconj`` ...) acting on float arrays of shape
``(..., 4)`` laid out as ``(w, x, y, z)`` on the basis ``1, i, j, k``.

An element ``a + bI`` of the slice ``L_I`` is represented by the Python
complex number ``a + bj``; :meth:`Frame.split` and :meth:`Frame.join` convert
between quaternions and the pair ``(z1, z2)`` with ``q = z1 + z2 J``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import RealAxisPoint

REAL_AXIS_TOL = 1e-10
UNIT_TOL = 1e-12


# ---------------------------------------------------------------------------
# array helpers
# ---------------------------------------------------------------------------

def as_array(q) -> np.ndarray:
    """Coerce a Quaternion, a 4-sequence or an array to a float array (..., 4)."""
    if isinstance(q, Quaternion):
        return np.array((q.w, q.x, q.y, q.z), dtype=float)
    arr = np.asarray(q, dtype=float)
    if arr.shape[-1:] != (4,):
        raise ValueError(f"expected trailing dimension 4, got shape {arr.shape}")
    return arr


def qmul(a, b) -> np.ndarray:
    """Hamilton product of broadcastable quaternion arrays."""
    a = as_array(a)
    b = as_array(b)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        (
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ),
        axis=-1,
    )


def qconj(a) -> np.ndarray:
    return as_array(a) * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm(a) -> np.ndarray:
    return np.linalg.norm(as_array(a), axis=-1)


def qinv(a) -> np.ndarray:
    a = as_array(a)
    return qconj(a) / np.sum(a * a, axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# scalar type
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Quaternion:
    """Quaternion ``w + x i + y j + z k`` with IEEE double coefficients."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        w, x, y, z = (float(c) for c in np.asarray(arr, dtype=float).reshape(4))
        return cls(w, x, y, z)

    @classmethod
    def coerce(cls, value) -> "Quaternion":
        if isinstance(value, Quaternion):
            return value
        if isinstance(value, (int, float, np.floating, np.integer)):
            return cls(float(value))
        if isinstance(value, str):
            return parse_quaternion(value)
        return cls.from_array(value)

    @property
    def array(self) -> np.ndarray:
        return np.array((self.w, self.x, self.y, self.z), dtype=float)

    def __iter__(self) -> Iterator[float]:
        return iter((self.w, self.x, self.y, self.z))

    @property
    def real(self) -> float:
        return self.w

    @property
    def imag(self) -> "Quaternion":
        return Quaternion(0.0, self.x, self.y, self.z)

    def __add__(self, other):
        o = _lift(other)
        if o is None:
            return NotImplemented
        return Quaternion(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)

    __radd__ = __add__

    def __sub__(self, other):
        o = _lift(other)
        if o is None:
            return NotImplemented
        return Quaternion(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)

    def __rsub__(self, other):
        o = _lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            s = float(other)
            return Quaternion(self.w * s, self.x * s, self.y * s, self.z * s)
        if not isinstance(other, Quaternion):
            return NotImplemented
        a, b = self, other
        return Quaternion(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self * (1.0 / float(other))
        return NotImplemented

    def __abs__(self) -> float:
        return self.norm()

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm2(self) -> float:
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def inverse(self) -> "Quaternion":
        n2 = self.norm2()
        if n2 == 0.0:
            raise ZeroDivisionError("zero quaternion has no inverse")
        return self.conj() / n2

    def dot(self, other: "Quaternion") -> float:
        """Euclidean inner product on R^4."""
        return self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z

    def imag_norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def is_real(self, tol: float = REAL_AXIS_TOL) -> bool:
        return self.imag_norm() <= tol

    def isclose(self, other, tol: float = 1e-12) -> bool:
        return (self - _lift(other)).norm() <= tol

    def __str__(self) -> str:
        return format_quaternion(self)


def _lift(value):
    if isinstance(value, Quaternion):
        return value
    if isinstance(value, (int, float, np.floating, np.integer)):
        return Quaternion(float(value))
    return None


QuaternionLike = Union[Quaternion, float, Sequence[float], np.ndarray, str]

ZERO = Quaternion()
ONE = Quaternion(1.0)
QI = Quaternion(0.0, 1.0)
QJ = Quaternion(0.0, 0.0, 1.0)
QK = Quaternion(0.0, 0.0, 0.0, 1.0)


def mul(a: Quaternion, b: Quaternion) -> Quaternion:
    return a * b


@dataclass(frozen=True)
class UnitImaginary(Quaternion):
    """A quaternion with zero real part and unit norm, i.e. a square root of -1."""

    def __post_init__(self):
        if abs(self.w) > UNIT_TOL or abs(self.norm() - 1.0) > UNIT_TOL:
            raise ValueError(f"{format_quaternion(self)} is not a unit imaginary quaternion")

    @classmethod
    def from_vector(cls, v) -> "UnitImaginary":
        """Normalize a 3-vector (or the imaginary part of a quaternion) onto the sphere."""
        if isinstance(v, Quaternion):
            v = (v.x, v.y, v.z)
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.shape == (4,):
            v = v[1:]
        n = float(np.linalg.norm(v))
        if n == 0.0:
            raise ValueError("zero vector has no direction")
        return cls(0.0, float(v[0] / n), float(v[1] / n), float(v[2] / n))

    @property
    def vector(self) -> np.ndarray:
        return np.array((self.x, self.y, self.z))


# ---------------------------------------------------------------------------
# frames and coordinates
# ---------------------------------------------------------------------------

def as_unit(value) -> UnitImaginary:
    """Coerce a unit, quaternion, literal or 3-/4-vector to a :class:`UnitImaginary`."""
    if isinstance(value, UnitImaginary):
        return value
    if isinstance(value, (str, int, float)):
        value = Quaternion.coerce(value)
    return UnitImaginary.from_vector(value)


@dataclass(frozen=True)
class SliceCoords:
    """Real coordinates ``x0..x3`` and complex coordinates ``z1, z2`` in a frame."""

    x0: float
    x1: float
    x2: float
    x3: float
    z1: complex
    z2: complex


@dataclass(frozen=True)
class Frame:
    """Positively oriented orthonormal basis ``1, I, J, K = IJ`` of H."""

    I: UnitImaginary
    J: UnitImaginary
    K: UnitImaginary

    def __post_init__(self):
        if abs(self.I.dot(self.J)) > UNIT_TOL:
            raise ValueError("frame units I and J are not orthogonal")
        if not (self.I * self.J).isclose(self.K, 1e-12):
            raise ValueError("frame K differs from I*J")

    @classmethod
    def from_units(cls, I, J) -> "Frame":
        I, J = as_unit(I), as_unit(J)
        K = I * J
        return cls(I, J, UnitImaginary(0.0, K.x, K.y, K.z))

    @property
    def basis(self) -> np.ndarray:
        """Rows ``1, I, J, K`` as a (4, 4) array."""
        return np.array([ONE.array, self.I.array, self.J.array, self.K.array])

    def coords(self, q) -> np.ndarray:
        """Real coordinates (x0, x1, x2, x3) of quaternion arrays, shape (..., 4)."""
        return as_array(q) @ self.basis.T

    def split(self, q) -> tuple[np.ndarray, np.ndarray]:
        """Complex coordinates ``(z1, z2)`` with ``q = z1 + z2 J``."""
        x = self.coords(q)
        return x[..., 0] + 1j * x[..., 1], x[..., 2] + 1j * x[..., 3]

    def join(self, z1, z2=0.0) -> np.ndarray:
        """Quaternion array ``z1 + z2 J`` from complex coordinates."""
        z1 = np.asarray(z1, dtype=complex)
        z2 = np.asarray(z2, dtype=complex)
        x = np.stack(np.broadcast_arrays(z1.real, z1.imag, z2.real, z2.imag), axis=-1)
        return x @ self.basis

    def to_slice(self, z) -> np.ndarray:
        """Embed complex numbers into ``L_I``."""
        return self.join(z, 0.0)

    def from_slice(self, p) -> np.ndarray:
        """Read quaternions of ``L_I`` in the basis (1, I) as complex numbers."""
        return self.split(p)[0]


def slice_embed(z, I: Quaternion) -> np.ndarray:
    """Embed complex numbers into ``L_I`` (frame-free version of :meth:`Frame.to_slice`)."""
    z = np.asarray(z, dtype=complex)
    return z.real[..., None] * ONE.array + z.imag[..., None] * as_array(I)


def coordinates(q: Quaternion, frame: Frame) -> SliceCoords:
    """Coordinates of ``q`` computed with the conjugation formulas.

    ``x0 = (q - IqI - JqJ - KqK)/4`` and ``x1 = (1/(4I))(q - IqI + JqJ + KqK)``
    (similarly for ``x2``, ``x3``); ``1/I = -I``.  ``z1 = (q - IqI)/2`` and
    ``z2 = (q + IqI)(1/(2J))`` are read in the basis ``(1, I)``.
    """
    q = Quaternion.coerce(q)
    I, J, K = frame.I, frame.J, frame.K
    iqi, jqj, kqk = I * q * I, J * q * J, K * q * K
    x0 = (q - iqi - jqj - kqk) * 0.25
    x1 = (-I) * (q - iqi + jqj + kqk) * 0.25
    x2 = (-J) * (q + iqi - jqj + kqk) * 0.25
    x3 = (-K) * (q + iqi + jqj - kqk) * 0.25
    z1 = (q - iqi) * 0.5
    z2 = (q + iqi) * (-J) * 0.5
    return SliceCoords(
        x0.w, x1.w, x2.w, x3.w,
        complex(z1.w, z1.dot(I)),
        complex(z2.w, z2.dot(I)),
    )


def recompose(c: SliceCoords, frame: Frame) -> tuple[Quaternion, Quaternion]:
    """Both reassemblies: ``x0 + x1 I + x2 J + x3 K`` and ``z1 + z2 J``."""
    from_x = ONE * c.x0 + frame.I * c.x1 + frame.J * c.x2 + frame.K * c.x3
    from_z = Quaternion.from_array(frame.join(c.z1, c.z2))
    return from_x, from_z


def frame_complete(I) -> Frame:
    """Complete ``1, I`` to a frame; J is Gram-Schmidt of the axis least aligned with I."""
    I = as_unit(I)
    v = I.vector
    axis = int(np.argmin(np.abs(v)))  # argmin keeps the first of tied axes (i, j, k order)
    e = np.zeros(3)
    e[axis] = 1.0
    j = e - np.dot(e, v) * v
    J = UnitImaginary.from_vector(j)
    return Frame.from_units(I, J)


CANONICAL_FRAME = Frame(UnitImaginary(0, 1, 0, 0), UnitImaginary(0, 0, 1, 0), UnitImaginary(0, 0, 0, 1))


def j_structure(q, tol: float = REAL_AXIS_TOL) -> UnitImaginary:
    """The imaginary unit ``Im(q)/|Im(q)|`` defining the complex structure J at ``q``."""
    q = Quaternion.coerce(q)
    n = q.imag_norm()
    if n < tol:
        raise RealAxisPoint(f"J is undefined at the real point {format_quaternion(q)}")
    return UnitImaginary.from_vector((q.x, q.y, q.z))


def axial_parts(q) -> tuple[np.ndarray, np.ndarray]:
    """``(x, y)`` with ``q = x + I y``, ``y = |Im q| >= 0``, for quaternion arrays."""
    q = as_array(q)
    return q[..., 0], np.linalg.norm(q[..., 1:], axis=-1)


# ---------------------------------------------------------------------------
# sampling the sphere of imaginary units
# ---------------------------------------------------------------------------

_CANONICAL = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]], dtype=float)


def sphere_sample_array(n: int) -> np.ndarray:
    """Fibonacci lattice of ``n`` unit 3-vectors; for ``n >= 6`` the nearest
    lattice points are replaced by ``±i, ±j, ±k``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(n) + 0.5
    zc = 1.0 - 2.0 * k / n
    r = np.sqrt(np.clip(1.0 - zc * zc, 0.0, None))
    phi = math.pi * (3.0 - math.sqrt(5.0)) * np.arange(n)
    pts = np.stack((r * np.cos(phi), r * np.sin(phi), zc), axis=-1)
    if n >= 6:
        taken: set[int] = set()
        for c in _CANONICAL:
            order = np.argsort(-(pts @ c), kind="stable")
            idx = next(int(i) for i in order if int(i) not in taken)
            taken.add(idx)
            pts[idx] = c
    return pts / np.linalg.norm(pts, axis=-1, keepdims=True)


def sphere_sample(n: int) -> list[UnitImaginary]:
    return [UnitImaginary(0.0, *map(float, v)) for v in sphere_sample_array(n)]


# ---------------------------------------------------------------------------
# literals
# ---------------------------------------------------------------------------

_NUMBER = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TERM = re.compile(rf"([+-]?)({_NUMBER})?([ijk]?)")


def parse_quaternion(text: str) -> Quaternion:
    """Parse literals such as ``1``, ``0.5j``, ``-i``, ``0.3+0.4i-0.1j+2e-3k``."""
    s = text.strip()
    if not s or " " in s:
        raise ValueError(f"invalid quaternion literal {text!r}")
    coeffs = [0.0, 0.0, 0.0, 0.0]
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"invalid quaternion literal {text!r}")
        sign, number, unit = m.groups()
        if pos > 0 and not sign:
            raise ValueError(f"invalid quaternion literal {text!r}")
        if number is None and not unit:
            raise ValueError(f"invalid quaternion literal {text!r}")
        value = float(number) if number is not None else 1.0
        if sign == "-":
            value = -value
        coeffs["_ijk".index(unit) if unit else 0] += value
        pos = m.end()
    return Quaternion(*coeffs)


def format_quaternion(q: Quaternion) -> str:
    parts = [repr(float(q.w))]
    for c, u in ((q.x, "i"), (q.y, "j"), (q.z, "k")):
        if c != 0.0:
            parts.append(("+" if c >= 0 else "-") + repr(abs(float(c))) + u)
    return "".join(parts)
