"""Slice-regular polynomials with right coefficients and Moebius maps of the unit ball."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import RealAxisPoint, SingularDenominator
from .quaternion import (
    REAL_AXIS_TOL,
    ONE,
    Frame,
    Quaternion,
    as_array,
    qconj,
    qinv,
    qmul,
    qnorm,
)

SINGULAR_TOL = 1e-14


@dataclass(frozen=True)
class RegularPoly:
    """``q -> sum_k q^k a_k`` with quaternion coefficients ``a_0 .. a_n``."""

    coeffs: tuple[Quaternion, ...]

    def __post_init__(self):
        coeffs = tuple(Quaternion.coerce(c) for c in self.coeffs) or (Quaternion(),)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def of(cls, *coeffs) -> "RegularPoly":
        return cls(tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def coeff_array(self) -> np.ndarray:
        return np.array([c.array for c in self.coeffs])

    def __call__(self, q):
        if isinstance(q, Quaternion):
            return Quaternion.from_array(self.evaluate(q.array))
        return self.evaluate(q)

    def evaluate(self, q) -> np.ndarray:
        """Vectorized Horner scheme ``p <- q p + a_k`` (descending k)."""
        q = as_array(q)
        a = self.coeff_array
        p = np.broadcast_to(a[-1], q.shape).copy()
        for k in range(len(a) - 2, -1, -1):
            p = qmul(q, p) + a[k]
        return p

    def is_slice_preserving(self, tol: float = 1e-12) -> bool:
        return all(c.imag_norm() <= tol for c in self.coeffs)

    def trimmed(self, tol: float = 0.0) -> "RegularPoly":
        coeffs = list(self.coeffs)
        while len(coeffs) > 1 and coeffs[-1].norm() <= tol:
            coeffs.pop()
        return RegularPoly(tuple(coeffs))


def eval_poly(f: RegularPoly, q):
    return f(q)


def star_product(f: RegularPoly, g: RegularPoly) -> RegularPoly:
    """Regular product: ``c_n = sum_k a_k b_{n-k}``."""
    a, b = f.coeff_array, g.coeff_array
    c = np.zeros((len(a) + len(b) - 1, 4))
    for i in range(len(a)):
        c[i:i + len(b)] += qmul(a[i], b)
    return RegularPoly(tuple(Quaternion.from_array(row) for row in c))


def regular_conjugate(f: RegularPoly) -> RegularPoly:
    return RegularPoly(tuple(c.conj() for c in f.coeffs))


def symmetrization(f: RegularPoly) -> RegularPoly:
    """``f^s = f * f^c``; its coefficients are real."""
    return star_product(f, regular_conjugate(f))


def slice_derivative(f: RegularPoly) -> RegularPoly:
    if f.degree == 0:
        return RegularPoly((Quaternion(),))
    return RegularPoly(tuple(c * k for k, c in enumerate(f.coeffs) if k > 0))


def spherical_derivative(f: RegularPoly, q, tol: float = REAL_AXIS_TOL):
    """``(q - conj q)^{-1} (f(q) - f(conj q))`` for non-real ``q``."""
    scalar = isinstance(q, Quaternion)
    qa = as_array(q)
    d = qa - qconj(qa)
    if np.any(qnorm(d) < 2 * tol):
        raise RealAxisPoint("spherical derivative is undefined on the real axis")
    out = qmul(qinv(d), f.evaluate(qa) - f.evaluate(qconj(qa)))
    return Quaternion.from_array(out) if scalar else out


# ---------------------------------------------------------------------------
# Moebius maps
# ---------------------------------------------------------------------------

MoebiusKind = Literal["classical", "regular", "conjugationT"]


def _safe_inv(d: np.ndarray) -> np.ndarray:
    if np.any(qnorm(d) < SINGULAR_TOL):
        raise SingularDenominator("Moebius denominator vanishes")
    return qinv(d)


def classical_moebius(q0, q) -> np.ndarray:
    """``M_{q0}(q) = (1 - q conj(q0))^{-1} (q - q0)``."""
    q0, q = as_array(q0), as_array(q)
    return qmul(_safe_inv(ONE.array - qmul(q, qconj(q0))), q - q0)


def conjugation_t(q0, q) -> np.ndarray:
    """``T_{q0}(q) = (1 - q q0)^{-1} q (1 - q q0)``; preserves ``|q|``."""
    q0, q = as_array(q0), as_array(q)
    d = ONE.array - qmul(q, q0)
    return qmul(qmul(_safe_inv(d), q), d)


def regular_moebius(q0, q) -> np.ndarray:
    """Regular Moebius map through its closed form ``M_{q0}(T_{q0}(q))``."""
    return classical_moebius(q0, conjugation_t(q0, q))


_KINDS = {"classical": classical_moebius, "regular": regular_moebius, "conjugationT": conjugation_t}


@dataclass(frozen=True)
class MoebiusMap:
    pole: Quaternion
    kind: MoebiusKind = "classical"

    def __post_init__(self):
        object.__setattr__(self, "pole", Quaternion.coerce(self.pole))
        if self.kind not in _KINDS:
            raise ValueError(f"unknown Moebius kind {self.kind!r}")
        if self.pole.norm() >= 1.0:
            raise ValueError("Moebius pole must lie in the open unit ball")

    def __call__(self, q):
        if isinstance(q, Quaternion):
            return Quaternion.from_array(_KINDS[self.kind](self.pole.array, q.array))
        return _KINDS[self.kind](self.pole.array, q)


def moebius_eval(m: MoebiusMap, q):
    return m(q)


@dataclass(frozen=True)
class InverseResiduals:
    classical: float
    conjugation: float


def moebius_inverse_check(m: MoebiusMap, q) -> InverseResiduals:
    """Residuals of ``M_{-q0} o M_{q0}`` and ``T_{conj q0} o T_{q0}`` against the identity."""
    q0 = m.pole.array
    q = as_array(q)
    back_m = classical_moebius(-q0, classical_moebius(q0, q))
    back_t = conjugation_t(qconj(q0), conjugation_t(q0, q))
    return InverseResiduals(float(np.max(qnorm(back_m - q))), float(np.max(qnorm(back_t - q))))


# ---------------------------------------------------------------------------
# holomorphy matrix
# ---------------------------------------------------------------------------

@dataclass
class HolomorphyCheck:
    """Finite-difference Wirtinger matrices of ``f = f1 + f2 J`` at a point of ``L_I``.

    ``dbar[r, c]`` is the conjugate derivative ``dbar_{c+1} f_{r+1}`` and
    ``jacobian`` the holomorphic one; ``predicted`` holds the slice/spherical
    derivative closed forms for ``jacobian``.
    """

    at: Quaternion
    dbar: np.ndarray
    jacobian: np.ndarray
    predicted: np.ndarray
    real_point: bool
    dbar_residual: float = field(init=False)
    jacobian_residual: float = field(init=False)

    def __post_init__(self):
        self.dbar_residual = float(np.max(np.abs(self.dbar)))
        self.jacobian_residual = float(np.max(np.abs(self.jacobian - self.predicted)))


def _wirtinger_matrices(func, frame: Frame, q0: np.ndarray, h: float):
    """Central differences of the complex pair ``(f1, f2)`` along the frame axes."""
    basis = frame.basis
    stencil = np.concatenate([q0 + h * basis, q0 - h * basis])
    f1, f2 = frame.split(func(stencil))
    d1 = (f1[:4] - f1[4:]) / (2 * h)
    d2 = (f2[:4] - f2[4:]) / (2 * h)
    partials = np.stack([d1, d2])  # rows f1, f2; columns x0..x3
    jac = np.empty((2, 2), complex)
    dbar = np.empty((2, 2), complex)
    jac[:, 0] = 0.5 * (partials[:, 0] - 1j * partials[:, 1])
    dbar[:, 0] = 0.5 * (partials[:, 0] + 1j * partials[:, 1])
    jac[:, 1] = 0.5 * (partials[:, 2] - 1j * partials[:, 3])
    dbar[:, 1] = 0.5 * (partials[:, 2] + 1j * partials[:, 3])
    return dbar, jac


def holomorphy_matrix_check(f: RegularPoly, frame: Frame, q0, h: float = 1e-5,
                            slice_tol: float = 1e-12) -> HolomorphyCheck:
    q0 = Quaternion.coerce(q0)
    qa = q0.array
    z1, z2 = frame.split(qa)
    if abs(z2) > slice_tol * max(1.0, q0.norm()):
        raise ValueError("holomorphy check requires q0 in the slice L_I of the frame")
    step = h * max(1.0, q0.norm())
    dbar, jac = _wirtinger_matrices(f.evaluate, frame, qa, step)

    c1, c2 = frame.split(slice_derivative(f).evaluate(qa))
    real_point = q0.is_real()
    if real_point:
        s1, s2 = c1, c2
    else:
        s1, s2 = frame.split(spherical_derivative(f, qa))
    predicted = np.array([[c1, -np.conj(s2)], [c2, np.conj(s1)]], dtype=complex)
    return HolomorphyCheck(q0, dbar, jac, predicted, real_point)


def random_poly(rng: np.random.Generator, degree: int, scale: float = 1.0,
                real: bool = False) -> RegularPoly:
    """Random polynomial with Gaussian coefficients, used by tests and the verifier."""
    a = rng.normal(scale=scale, size=(degree + 1, 4))
    if real:
        a[:, 1:] = 0.0
    return RegularPoly(tuple(Quaternion.from_array(r) for r in a))


def affine(v, p) -> RegularPoly:
    """``q -> q v + p``."""
    return RegularPoly((Quaternion.coerce(p), Quaternion.coerce(v)))

