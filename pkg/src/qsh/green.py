"""Green functions with logarithmic pole on balls and symmetric slice domains, and Moebius geometry of the unit ball."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Union

import numpy as np

from .calculus import SliceHessian
from .errors import NoClosedForm, OutsideDomain
from .fields import Ball, ScalarField, _log
from .quaternion import Frame, Quaternion, as_array, as_unit, frame_complete, j_structure, qmul, qnorm
from .regular import classical_moebius, conjugation_t, regular_moebius

Flavor = Literal["weak", "strong"]
EQUALITY_TOL = 1e-9


@dataclass(frozen=True)
class PlanarGreenOracle:
    """Complex Green function ``z -> gamma(z)`` of a planar domain with a real pole."""

    func: Callable[[np.ndarray], np.ndarray]
    contains: Callable[[np.ndarray], np.ndarray]
    symmetric: bool = True
    label: str = "planar"

    def __call__(self, z):
        return self.func(np.asarray(z, dtype=complex))


def unit_disc_oracle(x0: float) -> PlanarGreenOracle:
    """``log|z - x0| / |1 - z x0|`` on the unit disc."""
    x0 = float(x0)
    if not abs(x0) < 1.0:
        raise OutsideDomain("pole must lie in the unit disc")
    return PlanarGreenOracle(
        lambda z: _log(np.abs(z - x0)) - np.log(np.abs(1.0 - z * x0)),
        lambda z: np.abs(z) < 1.0,
        True,
        f"disc({x0:g})",
    )


@dataclass(frozen=True)
class SymmetricSlice:
    """Axially symmetric domain ``{x + Iy : x + iy in D}`` described through a planar oracle."""

    oracle: PlanarGreenOracle

    def contains(self, q) -> np.ndarray:
        q = as_array(q)
        y = np.linalg.norm(q[..., 1:], axis=-1)
        return np.asarray(self.oracle.contains(q[..., 0] + 1j * y), dtype=bool)


@dataclass(frozen=True)
class GreenSpec:
    """Domain, pole and flavor (``weak`` for g, ``strong`` for G) of a Green function."""

    domain: Union[Ball, SymmetricSlice]
    pole: Quaternion
    flavor: Flavor = "strong"

    def __post_init__(self):
        object.__setattr__(self, "pole", Quaternion.coerce(self.pole))
        if self.flavor not in ("weak", "strong"):
            raise ValueError("flavor must be 'weak' or 'strong'")
        if isinstance(self.domain, Ball):
            if not qnorm(self.pole.array - self.domain.center.array) < self.domain.radius:
                raise OutsideDomain("pole must lie inside the ball")
        else:
            if not self.domain.oracle.symmetric:
                raise ValueError("slice construction needs a conjugation-symmetric oracle")
            if not bool(self.domain.contains(self.pole.array)):
                raise OutsideDomain("pole must lie inside the domain")
            if self.flavor == "weak" and not self.pole.is_real(0.0):
                raise ValueError("the slice construction needs a real pole")

    @classmethod
    def ball(cls, center, radius: float, pole=None, flavor: Flavor = "strong") -> "GreenSpec":
        center = Quaternion.coerce(center)
        return cls(Ball(center, radius), center if pole is None else pole, flavor)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def _ball_log(center: np.ndarray, R: float, q: np.ndarray) -> np.ndarray:
    d = qnorm(q - center)
    if np.any(d >= R):
        raise OutsideDomain("point outside the ball")
    return _log(d / R)


def ball_green(spec: GreenSpec, q):
    """``log(|q - q0| / R)`` on ``B(q0, R)``; ``-inf`` at the pole."""
    if not isinstance(spec.domain, Ball) or not spec.pole.isclose(spec.domain.center, 0.0):
        raise NoClosedForm("the closed form needs a ball centered at the pole")
    out = _ball_log(spec.pole.array, spec.domain.radius, as_array(q))
    return float(out) if np.ndim(out) == 0 else out


def slice_green(oracle: PlanarGreenOracle, x0: float, q):
    """``gamma(x + iy)`` at ``q = x + Iy``; the same value for every ``I``."""
    q = as_array(q)
    z = q[..., 0] + 1j * np.linalg.norm(q[..., 1:], axis=-1)
    if not np.all(oracle.contains(z)):
        raise OutsideDomain("point outside the symmetric slice domain")
    out = oracle(z)
    return float(out) if np.ndim(out) == 0 else out


def slice_green_axial(oracle: PlanarGreenOracle, x: float, y: float, I) -> float:
    """Value at ``x + I y`` (``y >= 0``) for an explicit unit ``I``; ``I`` only needs to be a unit."""
    as_unit(I)
    if y < 0:
        raise ValueError("y must be non-negative")
    z = complex(x, y)
    if not bool(oracle.contains(z)):
        raise OutsideDomain("point outside the symmetric slice domain")
    return float(oracle(z))


def green_value(spec: GreenSpec, q):
    """Closed-form value when one is known, otherwise :class:`NoClosedForm`."""
    if isinstance(spec.domain, Ball):
        if spec.flavor == "strong" or spec.pole.is_real(0.0):
            return ball_green(spec, q)
        raise NoClosedForm("g on a ball with non-real pole is only known between bounds")
    if spec.flavor == "weak":
        return slice_green(spec.domain.oracle, spec.pole.w, q)
    raise NoClosedForm("G on a symmetric slice domain has no closed form")


def green_field(spec: GreenSpec) -> ScalarField:
    """The Green function as a field on its domain (pole removed)."""
    dom = spec.domain
    if isinstance(dom, Ball):
        domain = Ball(dom.center, dom.radius, (spec.pole,))
        func = (lambda q: _log(qnorm(q - spec.pole.array) / dom.radius))
        if spec.flavor == "weak" and not spec.pole.is_real(0.0):
            raise NoClosedForm("g on a ball with non-real pole is only known between bounds")
        return ScalarField(func, domain, f"green({spec.pole})", c2=True, singular=(spec.pole,))
    oracle = dom.oracle

    def func(q):
        return oracle(q[..., 0] + 1j * np.linalg.norm(q[..., 1:], axis=-1))
    return ScalarField(func, _Punctured(dom, spec.pole), f"slice_green({oracle.label})",
                       c2=False, singular=(spec.pole,))


@dataclass(frozen=True)
class _Punctured:
    inner: SymmetricSlice
    pole: Quaternion

    @property
    def punctures(self):
        return (self.pole,)

    def contains(self, q):
        q = as_array(q)
        return self.inner.contains(q) & (qnorm(q - self.pole.array) > 0.0)


def ball_green_slice_laplacian(q0, frame: Frame, z: complex) -> float:
    """``dbar1 d1`` of ``log|q - q0|`` at ``z`` in ``L_I``: ``|q2|^2 / (2 (|z - q1|^2 + |q2|^2)^2)``."""
    q1, q2 = (complex(v) for v in frame.split(Quaternion.coerce(q0).array))
    return abs(q2) ** 2 / (2.0 * (abs(z - q1) ** 2 + abs(q2) ** 2) ** 2)


# ---------------------------------------------------------------------------
# checks on balls
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoleCheck:
    passed: bool
    bound: float
    gaps: tuple[float, ...]


def pole_admissible(u: ScalarField, q0, radii=(1e-2, 1e-3, 1e-4), scale: float = 1.0,
                    n: int = 64, seed: int = 0, growth: float = 0.25) -> PoleCheck:
    """Whether ``|u - log|q - q0||`` stays bounded on shrinking spheres around ``q0``.

    The sup over each sphere is recorded; the check fails when it grows by
    more than ``growth`` per decade of radius.
    """
    q0 = Quaternion.coerce(q0)
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(n, 4))
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    gaps = []
    for r in radii:
        pts = q0.array + scale * r * d
        gaps.append(float(np.max(np.abs(u.func(pts) - np.log(scale * r)))))
    decades = np.abs(np.diff(np.log10(np.asarray(radii, dtype=float))))
    steps = np.diff(gaps) / decades
    passed = bool(np.all(np.isfinite(gaps)) and np.all(steps <= growth))
    return PoleCheck(passed, max(gaps), tuple(gaps))


@dataclass(frozen=True)
class InequalityCheck:
    passed: bool
    worst: float
    samples: int


def green_monotonicity_check(inner: GreenSpec, outer: GreenSpec, n: int = 100, seed: int = 0,
                             tol: float = 1e-12) -> InequalityCheck:
    """``g^outer <= g^inner`` on samples of the smaller domain."""
    rng = np.random.default_rng(seed)
    pts = inner.domain.sample(rng, n)
    pts = pts[qnorm(pts - inner.pole.array) > 0]
    gap = green_value(outer, pts) - green_value(inner, pts)
    worst = float(np.max(gap))
    return InequalityCheck(worst <= tol, worst, len(pts))


def sandwich_check(spec: GreenSpec, r: float, R: float, n: int = 100, seed: int = 0,
                   tol: float = 1e-12) -> InequalityCheck:
    """``log(|q - q0|/R) <= G(q) <= log(|q - q0|/r)`` when ``B(q0, r) in Omega in B(q0, R)``."""
    rng = np.random.default_rng(seed)
    pts = spec.domain.sample(rng, n)
    d = qnorm(pts - spec.pole.array)
    G = green_value(spec, pts)
    worst = float(max(np.max(np.log(d / R) - G), np.max(G - np.log(d / r))))
    return InequalityCheck(worst <= tol, worst, n)


def affine_image(spec: GreenSpec, a, b) -> GreenSpec:
    """Image of a ball spec under ``q -> a + q b`` (``b != 0``)."""
    a, b = Quaternion.coerce(a), Quaternion.coerce(b)
    if b.norm() == 0.0:
        raise ValueError("b must be nonzero")
    if not isinstance(spec.domain, Ball):
        raise NoClosedForm("affine images are only tracked for balls")
    dom = spec.domain
    return GreenSpec(Ball(a + dom.center * b, dom.radius * b.norm()), a + spec.pole * b, spec.flavor)


# ---------------------------------------------------------------------------
# unit ball with a non-real pole
# ---------------------------------------------------------------------------

def _check_ball(q):
    if np.any(qnorm(q) >= 1.0):
        raise OutsideDomain("point outside the unit ball")


def weak_green_candidate(q0, q):
    """``log|q - q0| - log|1 - q conj(q0)|``, a lower bound for g on the unit ball."""
    q0a, qa = Quaternion.coerce(q0).array, as_array(q)
    _check_ball(qa)
    _check_ball(q0a)
    out = _log(qnorm(classical_moebius(q0a, qa)))
    return float(out) if np.ndim(out) == 0 else out


def weak_green_slice_laplacian(q0, frame: Frame, z: complex) -> float:
    """Closed form of ``dbar1 d1`` of the candidate at ``z`` in ``L_I``."""
    q0 = Quaternion.coerce(q0)
    q1, q2 = (complex(v) for v in frame.split(q0.array))
    n2 = q0.norm2()
    first = abs(q2) ** 2 / (2.0 * (abs(z - q1) ** 2 + abs(q2) ** 2) ** 2)
    second = abs(q2) ** 2 * n2 ** 2 / (2.0 * (abs(z * n2 - q1) ** 2 + abs(q2) ** 2) ** 2)
    return first - second


def _log_kernel(z1: complex, z2: complex, p1: complex, p2: complex) -> np.ndarray:
    """Slice Hessian of ``log|q - p|`` at ``q = z1 + z2 J``."""
    w1, w2 = z1 - p1, z2 - p2
    s = abs(w1) ** 2 + abs(w2) ** 2
    return np.array([[abs(w2) ** 2, -w1 * w2.conjugate()],
                     [-w2 * w1.conjugate(), abs(w1) ** 2]]) / (2.0 * s ** 2)


def weak_green_hessian(q0, frame: Frame, q) -> SliceHessian:
    """Closed-form slice Hessian of the candidate as a difference of two log kernels
    (poles ``q0`` and ``conj(q0)^{-1}``).
    """
    q0, q = Quaternion.coerce(q0), Quaternion.coerce(q)
    tilde = q0 * (1.0 / q0.norm2())
    z1, z2 = (complex(v) for v in frame.split(q.array))
    p1, p2 = (complex(v) for v in frame.split(q0.array))
    t1, t2 = (complex(v) for v in frame.split(tilde.array))
    H = _log_kernel(z1, z2, p1, p2) - _log_kernel(z1, z2, t1, t2)
    return SliceHessian(float(H[0, 0].real), complex(H[0, 1]), float(H[1, 1].real), frame, q)


def weak_green_probe(q0) -> tuple[Frame, Quaternion]:
    """A frame with ``q1 != 0 != q2`` for the pole and the point ``q2 J`` where the
    candidate's Hessian is indefinite.
    """
    q0 = Quaternion.coerce(q0)
    # tilt I away from the pole's own slice so both split components are nonzero
    v = np.array([q0.x, q0.y, q0.z])
    w = np.cross(v, [1.0, 0.0, 0.0] if abs(v[0]) < 0.9 * np.linalg.norm(v) else [0.0, 1.0, 0.0])
    I = v / np.linalg.norm(v) + w / np.linalg.norm(w)
    frame = frame_complete(I / np.linalg.norm(I))
    _, q2 = frame.split(q0.array)
    return frame, Quaternion.from_array(frame.join(0.0, complex(q2)))


@dataclass(frozen=True)
class GreenBounds:
    lower_classical: float
    lower_regular: float
    upper: float


def weak_green_bounds(q0, q) -> GreenBounds:
    """Known bounds for g on the unit ball: ``log|M_q0| >= log|M_reg_q0|`` from below, 0 above."""
    q0a, qa = Quaternion.coerce(q0).array, Quaternion.coerce(q).array
    _check_ball(qa)
    return GreenBounds(
        float(_log(qnorm(classical_moebius(q0a, qa)))),
        float(_log(qnorm(regular_moebius(q0a, qa)))),
        0.0,
    )


# ---------------------------------------------------------------------------
# Moebius geometry
# ---------------------------------------------------------------------------

def poincare_distance(q, q0):
    """``atanh |M_q0(q)|``, i.e. ``(1/2) log((1 + |M|) / (1 - |M|))``."""
    qa, q0a = as_array(q), as_array(q0)
    _check_ball(qa)
    _check_ball(q0a)
    out = np.arctanh(qnorm(classical_moebius(q0a, qa)))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class MoebiusComparison:
    """``lhs = |M_reg_q0(q)|``, ``rhs = |M_q0(q)|`` and the inner-product certificate.

    ``inner`` is ``<T_q0(q) - q, q0>`` and ``closed_form`` its value
    ``2 y0^2 |z2|^2 / |1 - q q0|^2`` with ``z2`` read in a frame whose ``I`` is
    the unit of ``q0``.
    """

    lhs: float
    rhs: float
    equality: bool
    slice_distance: float
    inner: float
    closed_form: float
    delta_before: float
    delta_after: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-12


def moebius_inequality_check(q0, q, tol: float = EQUALITY_TOL) -> MoebiusComparison:
    q0, q = Quaternion.coerce(q0), Quaternion.coerce(q)
    _check_ball(q.array)
    _check_ball(q0.array)
    I = j_structure(q0)
    frame = frame_complete(I)
    _, z2 = frame.split(q.array)
    z2 = complex(z2)
    y0 = q0.imag_norm()
    t = conjugation_t(q0.array, q.array)
    inner = float(np.dot(t - q.array, q0.array))
    denom = float(qnorm(np.array([1.0, 0, 0, 0]) - qmul(q.array, q0.array))) ** 2
    closed = 2.0 * y0 ** 2 * abs(z2) ** 2 / denom
    lhs = float(qnorm(regular_moebius(q0.array, q.array)))
    rhs = float(qnorm(classical_moebius(q0.array, q.array)))
    return MoebiusComparison(
        lhs, rhs, abs(z2) < tol, abs(z2), inner, closed,
        float(np.arctanh(rhs)), float(np.arctanh(qnorm(classical_moebius(q0.array, t)))),
    )


@dataclass(frozen=True)
class MoebiusSweep:
    """Vectorized :class:`MoebiusComparison` fields over many ``(q0, q)`` pairs."""

    lhs: np.ndarray
    rhs: np.ndarray
    slice_distance: np.ndarray
    inner: np.ndarray
    closed_form: np.ndarray
    delta_before: np.ndarray
    delta_after: np.ndarray
    tol: float = EQUALITY_TOL

    @property
    def margin(self) -> np.ndarray:
        return self.rhs - self.lhs

    @property
    def equality(self) -> np.ndarray:
        return self.slice_distance < self.tol

    def violations(self, slack: float = 1e-12) -> int:
        return int(np.sum(self.lhs > self.rhs + slack))


def moebius_sweep(q0, q, tol: float = EQUALITY_TOL) -> MoebiusSweep:
    q0, q = as_array(q0), as_array(q)
    _check_ball(q)
    _check_ball(q0)
    v0 = q0[..., 1:]
    y0 = np.linalg.norm(v0, axis=-1)
    if np.any(y0 < 1e-10):
        raise ValueError("poles must be non-real")
    unit = v0 / y0[..., None]
    v = q[..., 1:]
    dist = np.linalg.norm(v - np.sum(v * unit, axis=-1, keepdims=True) * unit, axis=-1)
    t = conjugation_t(q0, q)
    one = np.array([1.0, 0.0, 0.0, 0.0])
    denom = qnorm(one - qmul(q, q0)) ** 2
    rhs = qnorm(classical_moebius(q0, q))
    return MoebiusSweep(
        qnorm(regular_moebius(q0, q)), rhs, dist,
        np.sum((t - q) * q0, axis=-1), 2.0 * y0 ** 2 * dist ** 2 / denom,
        np.arctanh(rhs), np.arctanh(qnorm(classical_moebius(q0, t))), tol,
    )
