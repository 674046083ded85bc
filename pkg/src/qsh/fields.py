"""Real-valued fields of a quaternionic variable, their domains, and a catalog of examples."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .quaternion import (
    CANONICAL_FRAME,
    ZERO,
    Frame,
    Quaternion,
    as_array,
    qnorm,
)
from .regular import RegularPoly, classical_moebius

ArrayFunc = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Ball:
    """Open ball ``B(center, radius)`` minus finitely many punctures.

    ``radius=math.inf`` is the whole space.
    """

    center: Quaternion = ZERO
    radius: float = 1.0
    punctures: tuple[Quaternion, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "center", Quaternion.coerce(self.center))
        object.__setattr__(self, "punctures", tuple(Quaternion.coerce(p) for p in self.punctures))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.radius)

    @property
    def symmetric(self) -> bool:
        """Axially symmetric about the real axis (center and punctures real)."""
        return self.center.is_real(1e-14) and all(p.is_real(1e-14) for p in self.punctures)

    def contains(self, q) -> np.ndarray:
        q = as_array(q)
        inside = qnorm(q - self.center.array) < self.radius
        for p in self.punctures:
            inside &= qnorm(q - p.array) > 0.0
        return inside

    def boundary_distance(self, q) -> np.ndarray:
        """Distance to the outer sphere (punctures ignored)."""
        return self.radius - qnorm(as_array(q) - self.center.array)

    def with_punctures(self, extra) -> "Ball":
        pts = list(self.punctures)
        for p in extra:
            p = Quaternion.coerce(p)
            if not any(p.isclose(o, 0.0) for o in pts) and bool(self.contains(p.array)):
                pts.append(p)
        return Ball(self.center, self.radius, tuple(pts))

    def slice_disc(self, I: Quaternion) -> tuple[complex, float]:
        """Center (as a complex number in L_I) and radius of the disc ``Omega_I``."""
        c = self.center
        ci = complex(c.w, c.x * I.x + c.y * I.y + c.z * I.z)
        off2 = c.norm2() - abs(ci) ** 2
        return ci, math.sqrt(max(self.radius ** 2 - off2, 0.0))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` points uniformly distributed in the ball."""
        if not self.bounded:
            raise ValueError("cannot sample an unbounded domain")
        d = rng.normal(size=(n, 4))
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        r = self.radius * rng.uniform(size=(n, 1)) ** 0.25
        return self.center.array + r * d


WHOLE_SPACE = Ball(ZERO, math.inf)
UNIT_BALL = Ball(ZERO, 1.0)


@dataclass(frozen=True)
class Preimage:
    """``{q : f(q) in domain}`` for a regular map ``f``."""

    domain: object
    f: RegularPoly

    def contains(self, q) -> np.ndarray:
        return self.domain.contains(self.f.evaluate(q))


@dataclass(frozen=True)
class ScalarField:
    """``u: Omega -> [-inf, inf)`` evaluated on quaternion arrays of shape (..., 4).

    ``c2`` declares the field twice continuously differentiable away from the
    points listed in ``singular``; Hessian tests are only run for such fields.
    """

    func: ArrayFunc
    domain: object = WHOLE_SPACE
    label: str = "u"
    c2: bool = False
    singular: tuple[Quaternion, ...] = ()

    def __call__(self, q):
        if isinstance(q, Quaternion):
            return float(self.func(q.array[None, :])[0])
        return self.func(as_array(q))

    def in_domain(self, q) -> np.ndarray:
        return self.domain.contains(q)

    def finite_fraction(self, points: np.ndarray) -> float:
        """Fraction of in-domain points where the field is finite (density check)."""
        pts = points[self.in_domain(points)]
        if len(pts) == 0:
            return 0.0
        return float(np.mean(np.isfinite(self.func(pts))))

    def compose(self, f: RegularPoly, domain=None, label: Optional[str] = None) -> "ScalarField":
        """``u o f`` on ``domain`` (defaults to the preimage of this field's domain)."""
        u = self.func
        return ScalarField(
            lambda q: u(f.evaluate(q)),
            domain if domain is not None else Preimage(self.domain, f),
            label or f"({self.label})o(f)",
            c2=self.c2,
        )

    def scaled(self, lam: float) -> "ScalarField":
        u = self.func
        return ScalarField(lambda q: lam * u(q), self.domain, f"{lam}*{self.label}", self.c2, self.singular)


def combine(fields, weights=None, mode: str = "sum", domain=None) -> ScalarField:
    """Nonnegative combination (``mode='sum'``) or pointwise maximum of fields."""
    fields = list(fields)
    weights = [1.0] * len(fields) if weights is None else list(weights)
    funcs = [f.func for f in fields]
    if mode == "sum":
        def func(q):
            out = 0.0
            for w, g in zip(weights, funcs):
                out = out + w * g(q)
            return out
        label = "+".join(f"{w}*{f.label}" for w, f in zip(weights, fields))
        c2 = all(f.c2 for f in fields)
    elif mode == "max":
        def func(q):
            return np.maximum.reduce([g(q) for g in funcs])
        label = "max(" + ",".join(f.label for f in fields) + ")"
        c2 = False
    else:
        raise ValueError(f"unknown mode {mode!r}")
    singular = tuple(p for f in fields for p in f.singular)
    return ScalarField(func, domain if domain is not None else fields[0].domain, label, c2, singular)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def re_q2() -> ScalarField:
    """``Re(q^2) = x0^2 - x1^2 - x2^2 - x3^2``."""
    def u(q):
        return q[..., 0] ** 2 - np.sum(q[..., 1:] ** 2, axis=-1)
    return ScalarField(u, WHOLE_SPACE, "re_q2", c2=True)


def log_abs() -> ScalarField:
    """``log|q|`` with value ``-inf`` at the origin; domain ``H minus {0}``."""
    return ScalarField(lambda q: _log(qnorm(q)), Ball(ZERO, math.inf, (ZERO,)), "log_abs",
                       c2=True, singular=(ZERO,))


def abs_pow(alpha: float) -> ScalarField:
    if not alpha > 0:
        raise ValueError("abs_pow needs alpha > 0")
    return ScalarField(lambda q: qnorm(q) ** alpha, WHOLE_SPACE, f"abs_pow({alpha:g})",
                       c2=True, singular=(ZERO,))


def coord(index: int, frame: Frame = CANONICAL_FRAME) -> ScalarField:
    """Real coordinate ``x_index`` with respect to the basis ``1, I, J, K``."""
    if index not in (0, 1, 2, 3):
        raise ValueError("coordinate index must be 0..3")
    axis = frame.basis[index]
    return ScalarField(lambda q: q @ axis, WHOLE_SPACE, f"coord:x{index}", c2=True)


def re_sq() -> ScalarField:
    return ScalarField(lambda q: q[..., 0] ** 2, WHOLE_SPACE, "re_sq", c2=True)


def im_sq() -> ScalarField:
    return ScalarField(lambda q: np.sum(q[..., 1:] ** 2, axis=-1), WHOLE_SPACE, "im_sq", c2=True)


def abs_sq() -> ScalarField:
    return ScalarField(lambda q: np.sum(q * q, axis=-1), WHOLE_SPACE, "abs_sq", c2=True)


def constant(c: float) -> ScalarField:
    return ScalarField(lambda q: np.full(q.shape[:-1], float(c)), WHOLE_SPACE, f"const({c:g})", c2=True)


def log_dist(p) -> ScalarField:
    """``log|q - p|``."""
    p = Quaternion.coerce(p)
    pa = p.array
    return ScalarField(lambda q: _log(qnorm(q - pa)), Ball(ZERO, math.inf, (p,)), f"log_dist({p})",
                       c2=True, singular=(p,))


def ball_green_field(q0, R: float = 1.0) -> ScalarField:
    """``log(|q - q0| / R)`` on ``B(q0, R)``."""
    q0 = Quaternion.coerce(q0)
    pa = q0.array
    return ScalarField(lambda q: _log(qnorm(q - pa) / R), Ball(q0, R, (q0,)), f"ball_green({q0},{R:g})",
                       c2=True, singular=(q0,))


def weak_green_field(q0) -> ScalarField:
    """``log|M_{q0}(q)| = log(|q - q0| / |1 - q conj(q0)|)`` on the unit ball."""
    q0 = Quaternion.coerce(q0)
    pa = q0.array

    def u(q):
        return _log(qnorm(classical_moebius(pa, q)))
    return ScalarField(u, Ball(ZERO, 1.0, (q0,)), f"weak_green({q0})", c2=True, singular=(q0,))


# planar fields on C, vectorized over complex arrays
PLANAR = {
    "x": lambda z: z.real,
    "y": lambda z: z.imag,
    "log_abs": lambda z: _log(np.abs(z)),
    "re_z2": lambda z: (z * z).real,
    "abs_sq": lambda z: np.abs(z) ** 2,
}


def axial_extension(upsilon: Callable[[np.ndarray], np.ndarray], domain=WHOLE_SPACE,
                    label: str = "axial", c2: bool = False) -> ScalarField:
    """Extend a planar function on a conjugation-symmetric set of C to H.

    ``u(x + I y) = (1 + <I,i>)/2 v(x + iy) + (1 - <I,i>)/2 v(x - iy)`` for
    ``y > 0`` and ``u(x) = v(x)`` on the real axis.
    """
    def u(q):
        x = q[..., 0]
        y = np.linalg.norm(q[..., 1:], axis=-1)
        real = y == 0.0
        c = np.where(real, 0.0, q[..., 1] / np.where(real, 1.0, y))
        up = upsilon(x + 1j * y)
        down = upsilon(x - 1j * y)
        return np.where(real, upsilon(x + 0j), 0.5 * (1 + c) * up + 0.5 * (1 - c) * down)
    return ScalarField(u, domain, label, c2=c2)


def axial(name: str) -> ScalarField:
    if name not in PLANAR:
        raise KeyError(f"unknown planar field {name!r}; choose from {sorted(PLANAR)}")
    dom = Ball(ZERO, math.inf, (ZERO,)) if name == "log_abs" else WHOLE_SPACE
    return axial_extension(PLANAR[name], dom, f"axial({name})")

