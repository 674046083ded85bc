"""Finite-difference Wirtinger calculus, circle means and mollification for scalar fields."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainMargin, OutsideDomain, PoleOnCircle
from .fields import ScalarField
from .quaternion import Frame, Quaternion, UnitImaginary, as_array, as_unit, qmul, qnorm
from .regular import RegularPoly, slice_derivative

FIRST_STEP = 1e-5
SECOND_STEP = 1e-4
CIRCLE_NODES = 128


def _step(h: float, q: np.ndarray) -> np.ndarray:
    return h * np.maximum(1.0, qnorm(q))


def _eval_stencil(u: ScalarField, pts: np.ndarray) -> np.ndarray:
    inside = u.in_domain(pts)
    if not np.all(inside):
        raise DomainMargin(f"finite-difference stencil of {u.label} leaves its domain")
    vals = u.func(pts)
    if not np.all(np.isfinite(vals)):
        raise DomainMargin(f"{u.label} is not finite on the finite-difference stencil")
    return vals


@dataclass(frozen=True)
class Wirtinger:
    d1: complex
    dbar1: complex
    d2: complex
    dbar2: complex


def wirtinger(u: ScalarField, frame: Frame, q, h: float = FIRST_STEP) -> Wirtinger:
    """``d1 = (d/dx0 - I d/dx1)/2`` and companions by central differences."""
    qa = Quaternion.coerce(q).array
    s = float(_step(h, qa))
    basis = frame.basis
    # margin 2h: the stencil is evaluated at +-h and must stay inside after doubling
    probe = np.concatenate([qa + 2 * s * basis, qa - 2 * s * basis])
    _eval_stencil(u, probe)
    vals = _eval_stencil(u, np.concatenate([qa + s * basis, qa - s * basis]))
    g = (vals[:4] - vals[4:]) / (2 * s)
    return Wirtinger(
        0.5 * complex(g[0], -g[1]),
        0.5 * complex(g[0], g[1]),
        0.5 * complex(g[2], -g[3]),
        0.5 * complex(g[2], g[3]),
    )


@dataclass(frozen=True)
class SliceHessian:
    """``H_{I,J}(u) = [[dbar1 d1 u, dbar1 d2 u], [dbar2 d1 u, dbar2 d2 u]]``."""

    h11: float
    h12: complex
    h22: float
    frame: Frame
    at: Quaternion

    @property
    def h21(self) -> complex:
        return self.h12.conjugate()

    def matrix(self) -> np.ndarray:
        return np.array([[self.h11, self.h12], [self.h21, self.h22]], dtype=complex)

    def eigenvalues(self) -> tuple[float, float]:
        return hermitian_eigenvalues(self.h11, self.h12, self.h22)

    def det(self) -> float:
        return self.h11 * self.h22 - abs(self.h12) ** 2

    def is_psd(self, tol: float = 0.0) -> bool:
        return self.eigenvalues()[0] >= -tol

    def quadratic_form(self, v1: complex, v2: complex) -> float:
        """``(conj v1, conj v2) H (v1, v2)^T`` (real for Hermitian H)."""
        val = (v1.conjugate() * (self.h11 * v1 + self.h12 * v2)
               + v2.conjugate() * (self.h21 * v1 + self.h22 * v2))
        return float(val.real)


def hermitian_eigenvalues(h11, h12, h22):
    """Closed-form eigenvalues ``t -+ r`` of the Hermitian matrix [[h11, h12], [conj h12, h22]]."""
    t = 0.5 * (np.asarray(h11) + np.asarray(h22))
    r = np.hypot(0.5 * (np.asarray(h11) - np.asarray(h22)), np.abs(h12))
    if np.ndim(t) == 0:
        return float(t - r), float(t + r)
    return t - r, t + r


def _hessian_offsets(s: float, basis: np.ndarray) -> tuple[np.ndarray, list]:
    """Stencil offsets for the 4x4 real Hessian and how to combine them."""
    offs = [np.zeros(4)]
    for a in range(4):
        offs += [s * basis[a], -s * basis[a]]
    pairs = []
    for a in range(4):
        for b in range(a + 1, 4):
            pairs.append((a, b))
            for sa, sb in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                offs.append(s * (sa * basis[a] + sb * basis[b]))
    return np.array(offs), pairs


def real_hessians(u: ScalarField, frame: Frame, points, h: float = SECOND_STEP,
                  check: bool = True) -> np.ndarray:
    """Real 4x4 Hessians of ``u`` in frame coordinates at each point, shape (n, 4, 4).

    With ``check=False`` stencils leaving the domain produce NaN instead of raising.
    """
    pts = np.atleast_2d(as_array(points))
    basis = frame.basis
    steps = _step(h, pts)
    unit_offs, pairs = _hessian_offsets(1.0, basis)
    stencil = pts[:, None, :] + steps[:, None, None] * unit_offs[None, :, :]
    flat = stencil.reshape(-1, 4)
    if check:
        # margin 4h around the point
        far = pts[:, None, :] + 4 * steps[:, None, None] * np.concatenate([basis, -basis])[None]
        _eval_stencil(u, far.reshape(-1, 4))
        vals = _eval_stencil(u, flat)
    else:
        inside = u.in_domain(flat)
        vals = np.full(len(flat), np.nan)
        vals[inside] = u.func(flat[inside])
        vals[~np.isfinite(vals)] = np.nan
    vals = vals.reshape(len(pts), -1)
    s2 = steps ** 2
    H = np.empty((len(pts), 4, 4))
    f0 = vals[:, 0]
    for a in range(4):
        H[:, a, a] = (vals[:, 1 + 2 * a] - 2 * f0 + vals[:, 2 + 2 * a]) / s2
    base = 9
    for n, (a, b) in enumerate(pairs):
        pp, pm, mp, mm = (vals[:, base + 4 * n + k] for k in range(4))
        H[:, a, b] = H[:, b, a] = (pp - pm - mp + mm) / (4 * s2)
    return H


def _complex_entries(H: np.ndarray):
    h11 = 0.25 * (H[..., 0, 0] + H[..., 1, 1])
    h22 = 0.25 * (H[..., 2, 2] + H[..., 3, 3])
    h12 = 0.25 * ((H[..., 0, 2] + H[..., 1, 3]) + 1j * (H[..., 1, 2] - H[..., 0, 3]))
    h21 = 0.25 * ((H[..., 2, 0] + H[..., 3, 1]) + 1j * (H[..., 3, 0] - H[..., 2, 1]))
    return h11, 0.5 * (h12 + np.conj(h21)), h22


def slice_hessians(u: ScalarField, frame: Frame, points, h: float = SECOND_STEP, check: bool = True):
    """Vectorized ``(h11, h12, h22)`` arrays for many points in one frame."""
    return _complex_entries(real_hessians(u, frame, points, h, check))


def slice_hessian(u: ScalarField, frame: Frame, q, h: float = SECOND_STEP) -> SliceHessian:
    q = Quaternion.coerce(q)
    h11, h12, h22 = slice_hessians(u, frame, q.array[None], h)
    return SliceHessian(float(h11[0]), complex(h12[0]), float(h22[0]), frame, q)


def dbar1_d1(u: ScalarField, frame: Frame, q, h: float = SECOND_STEP) -> float:
    """``dbar1 d1 u = (u_x0x0 + u_x1x1)/4`` from the two slice-plane second differences only."""
    qa = Quaternion.coerce(q).array
    s = float(_step(h, qa))
    e0, e1 = frame.basis[0], frame.basis[1]
    vals = _eval_stencil(u, np.array([qa, qa + s * e0, qa - s * e0, qa + s * e1, qa - s * e1]))
    return float(0.25 * (vals[1] + vals[2] + vals[3] + vals[4] - 4 * vals[0]) / s ** 2)


# ---------------------------------------------------------------------------
# circle means
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CircleSpec:
    """The circle ``{a + e^{I t} b}``."""

    I: UnitImaginary
    a: Quaternion
    b: Quaternion
    nodes: int = CIRCLE_NODES

    def __post_init__(self):
        object.__setattr__(self, "I", as_unit(self.I))
        object.__setattr__(self, "a", Quaternion.coerce(self.a))
        object.__setattr__(self, "b", Quaternion.coerce(self.b))
        if self.b.norm() == 0.0:
            raise ValueError("circle radius vector b must be nonzero")
        if self.nodes < 1:
            raise ValueError("need at least one node")

    def points(self) -> np.ndarray:
        return circle_points(self.I.array, self.a.array, self.b.array, self.nodes)


def circle_points(I, a, b, nodes: int, shift: float = 0.0) -> np.ndarray:
    """Nodes ``a + e^{I t_k} b``, ``t_k = 2 pi (k + shift) / nodes``; broadcasts over leading axes of a, b."""
    a = as_array(a)
    b = as_array(b)
    Ib = qmul(I, b)
    t = 2 * math.pi * (np.arange(nodes) + shift) / nodes
    c = np.cos(t)[:, None]
    s = np.sin(t)[:, None]
    return a[..., None, :] + c * b[..., None, :] + s * Ib[..., None, :]


def circle_mean(u: ScalarField, c: CircleSpec) -> float:
    """Periodic trapezoid rule for ``(1/2pi) int u(a + e^{It} b) dt``."""
    pts = c.points()
    if not np.all(u.in_domain(pts)):
        raise OutsideDomain("circle leaves the field's domain")
    vals = u.func(pts)
    if np.any(vals == -np.inf):
        raise PoleOnCircle(f"{u.label} is -inf on the circle")
    return float(np.mean(vals))


# ---------------------------------------------------------------------------
# mollification
# ---------------------------------------------------------------------------

def bump(r2: np.ndarray) -> np.ndarray:
    """Unnormalized smoothing profile ``exp(-1/(1 - |x|^2))`` on the unit ball, as a function of |x|^2."""
    out = np.zeros_like(r2)
    m = r2 < 1.0
    out[m] = np.exp(-1.0 / (1.0 - r2[m]))
    return out


@lru_cache(maxsize=32)
def _kernel(eps: float, grid: int) -> tuple[np.ndarray, np.ndarray]:
    t = -eps + (np.arange(grid) + 0.5) * (2 * eps / grid)
    g = np.stack(np.meshgrid(t, t, t, t, indexing="ij"), axis=-1).reshape(-1, 4)
    w = bump(np.sum(g * g, axis=-1) / eps ** 2)
    keep = w > 0
    g, w = g[keep], w[keep]
    w = w / w.sum()
    g.setflags(write=False)
    w.setflags(write=False)
    return g, w


def mollify_at(u: ScalarField, eps: float, q, grid: int = 16) -> float:
    """``(u * chi_eps)(q)`` by tensor midpoint quadrature on ``[-eps, eps]^4``.

    The kernel weights are normalized on the same grid, so constants are fixed points.
    """
    if grid < 8:
        raise ValueError("grid must have at least 8 points per axis")
    if not eps > 0:
        raise ValueError("eps must be positive")
    qa = Quaternion.coerce(q).array
    offsets, weights = _kernel(float(eps), int(grid))
    pts = qa - offsets
    if not np.all(u.in_domain(pts)):
        raise DomainMargin(f"B(q, {eps}) is not contained in the domain of {u.label}")
    return float(np.dot(weights, u.func(pts)))


def mollified(u: ScalarField, eps: float, grid: int = 16) -> ScalarField:
    """The field ``u * chi_eps`` (evaluated pointwise through :func:`mollify_at`)."""
    def func(q):
        q = as_array(q)
        flat = q.reshape(-1, 4)
        out = np.array([mollify_at(u, eps, p, grid) for p in flat])
        return out.reshape(q.shape[:-1])

    class _Shrunk:
        def contains(self, q):
            q = as_array(q)
            offsets, _ = _kernel(float(eps), int(grid))
            flat = q.reshape(-1, 4)
            ok = np.array([bool(np.all(u.in_domain(p - offsets))) for p in flat])
            return ok.reshape(q.shape[:-1])

    return ScalarField(func, _Shrunk(), f"{u.label}*chi_{eps:g}", c2=True)


# ---------------------------------------------------------------------------
# chain rule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainRuleCheck:
    lhs: float
    rhs: float
    slice_preserving_rhs: float | None

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)


def chain_rule_check(u: ScalarField, f: RegularPoly, frame: Frame, q0,
                     h: float = SECOND_STEP, slice_tol: float = 1e-12) -> ChainRuleCheck:
    """Compare ``dbar1 d1 (u o f)`` at ``q0 in L_I`` with ``(conj a) H_{I,J}(u)|_{f(q0)} a``,
    where ``a = (d1 f1, d1 f2)`` is read off the slice derivative of ``f``.
    """
    q0 = Quaternion.coerce(q0)
    qa = q0.array
    if abs(frame.split(qa)[1]) > slice_tol * max(1.0, q0.norm()):
        raise ValueError("chain rule check requires q0 in the slice L_I of the frame")
    composed = u.compose(f)
    lhs = dbar1_d1(composed, frame, q0, h)
    a1, a2 = (complex(v) for v in frame.split(slice_derivative(f).evaluate(qa)))
    H = slice_hessian(u, frame, f(q0), h)
    rhs = H.quadratic_form(a1, a2)
    sp = abs(a1) ** 2 * H.h11 if f.is_slice_preserving() else None
    return ChainRuleCheck(lhs, rhs, sp)
