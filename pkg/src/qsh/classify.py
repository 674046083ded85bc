"""Sampled mean-value and Hessian tests for the weak, strong and J-plurisubharmonic classes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .calculus import circle_points, hermitian_eigenvalues, slice_hessians
from .errors import DomainEscape
from .fields import UNIT_BALL, Ball, ScalarField, axial_extension
from .quaternion import (
    Frame,
    Quaternion,
    UnitImaginary,
    frame_complete,
    qmul,
    qnorm,
    slice_embed,
    sphere_sample_array,
)
from .regular import RegularPoly

__all__ = [
    "SamplingPolicy", "Verdict", "Witness", "ClassificationReport",
    "test_weak_subharmonic", "test_strong_subharmonic", "test_J_plurisubharmonic",
    "classify", "axial_extension", "max_principle_check", "composition_probe",
]

CLASSES = ("weak_sub", "weak_harm", "strong_sub", "strong_harm", "J_psh", "J_ph")


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SamplingPolicy:
    """Discretization of the quantifiers over units, centers and radii.

    Circles are integrated with ``nodes`` points and twice more with the
    nodes shifted, which bounds the quadrature error of each sample.  A class passes
    when no sample violates it and at least ``min_decided`` of the samples
    are decided.
    """

    n_units: int = 32
    n_centers: int = 64
    n_radii: int = 4
    tol: float = 1e-7
    seed: int = 0
    nodes: int = 128
    hess_rtol: float = 1e-5
    tube: float = 1e-3
    min_decided: float = 0.5

    def __post_init__(self):
        for name in ("n_units", "n_centers", "n_radii", "nodes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0.0 <= self.min_decided <= 1.0:
            raise ValueError("min_decided must lie in [0, 1]")

    def rng(self, stream: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])


@dataclass(frozen=True)
class Witness:
    """A sample violating a class; ``replay`` recomputes the violation.

    kind is one of ``mean_sub``, ``mean_harm`` (circle ``a + e^{It} b``),
    ``hessian_sub``, ``hessian_harm`` (point ``a``, frame ``(I, b)``) or
    ``axial`` (points ``a`` and ``b`` with equal real part and |Im|).
    """

    cls: str
    kind: str
    I: Quaternion
    a: Quaternion
    b: Quaternion
    lhs: float
    rhs: float
    tol: float
    nodes: int = 128

    @property
    def violation(self) -> float:
        return _violation(self.kind, self.lhs, self.rhs)

    def replay(self, u: ScalarField) -> float:
        if self.kind in ("mean_sub", "mean_harm"):
            pts = circle_points(self.I.array, self.a.array, self.b.array, self.nodes)
            lhs, rhs = u(self.a), float(np.mean(u.func(pts)))
        elif self.kind in ("hessian_sub", "hessian_harm"):
            frame = Frame.from_units(self.I, self.b)
            h11, h12, h22 = slice_hessians(u, frame, self.a.array[None], check=False)
            lo, hi = hermitian_eigenvalues(h11[0], h12[0], h22[0])
            lhs, rhs = (lo, 0.0) if self.kind == "hessian_sub" else (max(abs(lo), abs(hi)), 0.0)
        elif self.kind == "axial":
            lhs, rhs = u(self.a), u(self.b)
        else:
            raise ValueError(f"unknown witness kind {self.kind!r}")
        return _violation(self.kind, lhs, rhs)

    def to_dict(self) -> dict:
        return {
            "class": self.cls, "kind": self.kind,
            "I": _qlist(self.I), "a": _qlist(self.a), "b": _qlist(self.b),
            "lhs": self.lhs, "rhs": self.rhs, "tol": self.tol, "nodes": self.nodes,
        }


def _qlist(q: Quaternion) -> list[float]:
    return [float(v) for v in q]


def _violation(kind: str, lhs: float, rhs: float) -> float:
    if kind == "mean_sub":
        return lhs - rhs
    if kind == "hessian_sub":
        return -lhs
    if kind == "hessian_harm":
        return lhs
    return abs(lhs - rhs)


@dataclass
class ClassificationReport:
    verdicts: dict[str, Verdict] = field(default_factory=dict)
    witnesses: list[Witness] = field(default_factory=list)
    stats: dict[str, float] = field(default_factory=dict)

    def merge(self, other: "ClassificationReport") -> "ClassificationReport":
        return ClassificationReport(
            {**self.verdicts, **other.verdicts},
            self.witnesses + other.witnesses,
            {**self.stats, **other.stats},
        )

    def __getitem__(self, cls: str) -> Verdict:
        return self.verdicts[cls]

    def to_dict(self) -> dict:
        return {
            "verdicts": {k: str(v) for k, v in self.verdicts.items()},
            "stats": {k: _json_float(v) for k, v in sorted(self.stats.items())},
            "witnesses": [w.to_dict() for w in self.witnesses],
        }


def _json_float(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


# ---------------------------------------------------------------------------
# sampling helpers
# ---------------------------------------------------------------------------

def default_region(u: ScalarField) -> Ball:
    """Where to sample: the field's own ball when bounded, else the unit ball."""
    dom = u.domain
    if isinstance(dom, Ball):
        if dom.bounded:
            return dom
        return Ball(UNIT_BALL.center, UNIT_BALL.radius, dom.punctures)
    return UNIT_BALL


def _disc_hits(punctures, a: np.ndarray, b: np.ndarray, Ib: np.ndarray, margin: float) -> np.ndarray:
    """Whether the closed disc ``{a + s e^{It} b : s <= 1}`` comes within ``margin`` of a puncture."""
    hit = np.zeros(a.shape[:-1], dtype=bool)
    r = qnorm(b)
    e1 = b / r[..., None]
    e2 = Ib / r[..., None]
    for p in punctures:
        d = p.array - a
        c1 = np.sum(d * e1, axis=-1)
        c2 = np.sum(d * e2, axis=-1)
        perp = qnorm(d - c1[..., None] * e1 - c2[..., None] * e2)
        out = np.maximum(np.hypot(c1, c2) - r, 0.0)
        hit |= np.hypot(perp, out) < margin * np.maximum(r, 1.0)
    return hit


@dataclass
class _MeanSamples:
    I: np.ndarray
    a: np.ndarray
    b: np.ndarray
    center: np.ndarray
    mean: np.ndarray
    err: np.ndarray
    nodes: int


def _circle_means(u: ScalarField, I, a, b, nodes: int) -> _MeanSamples:
    """Means with ``nodes`` points and an aliasing error bound.

    The trapezoid error is dominated by ``2 Re c`` for the Fourier coefficient
    ``c`` at the node count.  Repeating the rule with nodes shifted by a half
    and a quarter spacing turns this into ``4 Re c`` and ``2 (Re c + Im c)``,
    so the sum of both differences bounds the error regardless of the phase.
    """
    n = nodes
    m = []
    for shift in (0.0, 0.5, 0.25):
        pts = circle_points(I, a, b, n, shift)
        inside = np.all(u.in_domain(pts), axis=-1)
        vals = np.full(pts.shape[:-1], np.nan)
        vals[inside] = u.func(pts[inside])
        with np.errstate(invalid="ignore"):
            m.append(np.mean(vals, axis=-1))
    with np.errstate(invalid="ignore"):
        err = 2.0 * (np.abs(m[0] - m[1]) + np.abs(m[0] - m[2])) + 1e-14 * (1.0 + np.abs(m[0]))
    center = np.full(a.shape[:-1], np.nan)
    ok = np.isfinite(m[0])
    center[ok] = u.func(a[ok])
    return _MeanSamples(I, a, b, center, m[0], err, n)


def _field_scale(values: np.ndarray) -> float:
    v = np.abs(values[np.isfinite(values)])
    return max(1.0, float(np.median(v))) if len(v) else 1.0


def _decide(viol: np.ndarray, err: np.ndarray, tol: float):
    """Per-sample pass / fail masks; samples in neither are undecided."""
    ok = np.isfinite(viol) & np.isfinite(err)
    with np.errstate(invalid="ignore"):
        passed = ok & (viol + err <= tol)
        failed = ok & (viol - err > tol)
    return passed, failed


def _verdict(passed: np.ndarray, failed: np.ndarray, min_decided: float) -> Verdict:
    if failed.any():
        return Verdict.FAIL
    if passed.size and passed.mean() >= min_decided:
        return Verdict.PASS
    return Verdict.INCONCLUSIVE


def _mean_witness(cls: str, kind: str, s: _MeanSamples, viol: np.ndarray, failed: np.ndarray,
                  tol: float) -> Optional[Witness]:
    if not failed.any():
        return None
    k = int(np.argmax(np.where(failed, viol, -np.inf)))
    q = Quaternion.from_array
    return Witness(cls, kind, q(s.I[k]), q(s.a[k]), q(s.b[k]),
                   float(s.center[k]), float(s.mean[k]), tol, s.nodes)


def _mean_fragment(u, s: _MeanSamples, sub_cls: str, harm_cls: str, p: SamplingPolicy) -> ClassificationReport:
    scale = _field_scale(s.center)
    tol = p.tol * scale
    viol = s.center - s.mean
    # a center at a -inf pole satisfies the sub-mean inequality trivially
    pole = s.center == -np.inf
    viol = np.where(pole, -np.inf, viol)
    err = np.where(pole, 0.0, s.err)
    sub_pass, sub_fail = _decide(viol, err, tol)
    sub_pass |= pole & np.isfinite(s.mean)
    harm_pass, harm_fail = _decide(np.abs(viol), err, tol)

    report = ClassificationReport()
    report.verdicts[sub_cls] = _verdict(sub_pass, sub_fail, p.min_decided)
    report.verdicts[harm_cls] = _verdict(harm_pass, harm_fail, p.min_decided)
    for cls, kind, v, f in ((sub_cls, "mean_sub", viol, sub_fail), (harm_cls, "mean_harm", np.abs(viol), harm_fail)):
        w = _mean_witness(cls, kind, s, v, f, tol)
        if w is not None:
            report.witnesses.append(w)
    finite = np.isfinite(viol)
    report.stats[f"{sub_cls}.min_margin"] = float(np.min(-viol[finite])) if finite.any() else math.nan
    report.stats[f"{sub_cls}.samples"] = float(viol.size)
    report.stats[f"{sub_cls}.decided"] = float((sub_pass | sub_fail).sum())
    report.stats[f"{sub_cls}.tol"] = tol
    return report


# ---------------------------------------------------------------------------
# weak subharmonicity
# ---------------------------------------------------------------------------

def _weak_circles(region: Ball, p: SamplingPolicy, upper_tube: Optional[float] = None, units=None):
    """Circles ``a + e^{It} b`` with ``a, b`` in ``L_I`` inside the slice discs of ``region``.

    With ``upper_tube`` set, only ``I = i`` is used and circles stay in
    ``Im > upper_tube`` (the half-plane model of a symmetric region).
    """
    rng = p.rng(1 if upper_tube is None else 3)
    units = sphere_sample_array(p.n_units) if units is None else units
    Is, As, Bs = [], [], []
    fractions = (np.arange(p.n_radii) + 1.0) / (p.n_radii + 1.0)
    for v in units:
        I = np.concatenate([[0.0], v])
        c, R = region.slice_disc(Quaternion.from_array(I))
        if R <= 0.0:
            continue
        if upper_tube is None:
            rho = R * np.sqrt(rng.uniform(size=p.n_centers))
            phi = rng.uniform(0, 2 * math.pi, size=p.n_centers)
            a = c + rho * np.exp(1j * phi)
            d = R - rho
        else:
            # rejection-free sampling of the upper half of the disc above the tube
            rho = R * np.sqrt(rng.uniform(size=p.n_centers))
            phi = rng.uniform(0, math.pi, size=p.n_centers)
            a = c.real + rho * np.exp(1j * phi)
            a = a.real + 1j * np.maximum(a.imag, upper_tube * 2)
            d = np.minimum(R - np.abs(a - c), a.imag - upper_tube)
        psi = rng.uniform(0, 2 * math.pi, size=(p.n_centers, p.n_radii))
        b = d[:, None] * fractions[None, :] * np.exp(1j * psi)
        good = d > 0
        a_q = slice_embed(np.repeat(a[good], p.n_radii), I)
        b_q = slice_embed(b[good].ravel(), I)
        Is.append(np.broadcast_to(I, a_q.shape))
        As.append(a_q)
        Bs.append(b_q)
    if not As:
        return np.zeros((0, 4)), np.zeros((0, 4)), np.zeros((0, 4))
    return np.concatenate(Is), np.concatenate(As), np.concatenate(Bs)


def _drop_punctured(region: Ball, I, a, b):
    if not region.punctures:
        return I, a, b
    hit = _disc_hits(region.punctures, a, b, qmul(I, b), 1e-9)
    return I[~hit], a[~hit], b[~hit]


def test_weak_subharmonic(u: ScalarField, region: Optional[Ball] = None,
                          p: SamplingPolicy = SamplingPolicy()) -> ClassificationReport:
    """Sub-mean inequality ``u(a) <= l_I(u; a, b)`` over circles inside slices."""
    region = default_region(u) if region is None else region
    I, a, b = _drop_punctured(region, *_weak_circles(region, p))
    s = _circle_means(u, I, a, b, p.nodes)
    return _mean_fragment(u, s, "weak_sub", "weak_harm", p)


# ---------------------------------------------------------------------------
# strong subharmonicity
# ---------------------------------------------------------------------------

def _random_sphere3(rng, n):
    d = rng.normal(size=(n, 4))
    return d / np.linalg.norm(d, axis=-1, keepdims=True)


def _hessian_fragment(u: ScalarField, region: Ball, p: SamplingPolicy) -> ClassificationReport:
    rng = p.rng(4)
    avoid = [q.array for q in (*region.punctures, *u.singular)]
    lo_all, hi_all, norm_all, pts_all, frames_all = [], [], [], [], []
    for v in sphere_sample_array(p.n_units):
        frame = frame_complete(UnitImaginary.from_vector(v))
        pts = region.sample(rng, p.n_centers)
        keep = region.boundary_distance(pts) > 0.05 * region.radius
        for q in avoid:
            keep &= qnorm(pts - q) > 0.05
        pts = pts[keep]
        if not len(pts):
            continue
        h11, h12, h22 = slice_hessians(u, frame, pts, check=False)
        lo, hi = hermitian_eigenvalues(h11, h12, h22)
        lo_all.append(lo)
        hi_all.append(hi)
        norm_all.append(np.sqrt(h11 ** 2 + h22 ** 2 + 2 * np.abs(h12) ** 2))
        pts_all.append(pts)
        frames_all += [frame] * len(pts)
    report = ClassificationReport()
    if not lo_all:
        return report
    lo, hi = np.concatenate(lo_all), np.concatenate(hi_all)
    hnorm, pts = np.concatenate(norm_all), np.concatenate(pts_all)
    ok = np.isfinite(lo) & np.isfinite(hi)
    tol = p.hess_rtol * np.maximum(1.0, np.where(ok, hnorm, 1.0))
    with np.errstate(invalid="ignore"):
        sub_fail = ok & (lo < -tol)
        harm_fail = ok & (np.maximum(np.abs(lo), np.abs(hi)) > tol)
    report.verdicts["strong_sub"] = _verdict(ok & ~sub_fail, sub_fail, p.min_decided)
    report.verdicts["strong_harm"] = _verdict(ok & ~harm_fail, harm_fail, p.min_decided)
    for cls, kind, fail, score in (("strong_sub", "hessian_sub", sub_fail, -lo),
                                   ("strong_harm", "hessian_harm", harm_fail, np.maximum(np.abs(lo), np.abs(hi)))):
        if fail.any():
            k = int(np.argmax(np.where(fail, score, -np.inf)))
            fr = frames_all[k]
            lhs = float(lo[k]) if kind == "hessian_sub" else float(score[k])
            report.witnesses.append(Witness(cls, kind, fr.I, Quaternion.from_array(pts[k]), fr.J,
                                            lhs, 0.0, float(tol[k])))
    report.stats["hessian.min_eigenvalue"] = float(np.min(lo[ok])) if ok.any() else math.nan
    report.stats["hessian.samples"] = float(ok.sum())
    return report


def _combine(a: Verdict, b: Verdict) -> Verdict:
    if Verdict.FAIL in (a, b):
        return Verdict.FAIL
    if a == b == Verdict.PASS:
        return Verdict.PASS
    return Verdict.INCONCLUSIVE


def test_strong_subharmonic(u: ScalarField, region: Optional[Ball] = None,
                            p: SamplingPolicy = SamplingPolicy()) -> ClassificationReport:
    """Sub-mean inequality over circles ``a + e^{It} b`` with arbitrary ``b``, plus
    positive semidefiniteness of the slice Hessian for fields declared C^2.
    """
    region = default_region(u) if region is None else region
    rng = p.rng(2)
    fractions = (np.arange(p.n_radii) + 1.0) / (p.n_radii + 1.0)
    Is, As, Bs = [], [], []
    for v in sphere_sample_array(p.n_units):
        I = np.concatenate([[0.0], v])
        a = region.sample(rng, p.n_centers)
        d = region.boundary_distance(a)
        r = (d[:, None] * fractions[None, :]).ravel()
        b = _random_sphere3(rng, len(r)) * r[:, None]
        As.append(np.repeat(a, p.n_radii, axis=0))
        Bs.append(b)
        Is.append(np.broadcast_to(I, b.shape))
    I, a, b = _drop_punctured(region, np.concatenate(Is), np.concatenate(As), np.concatenate(Bs))
    s = _circle_means(u, I, a, b, p.nodes)
    report = _mean_fragment(u, s, "strong_sub", "strong_harm", p)
    if u.c2:
        hess = _hessian_fragment(u, region, p)
        for cls in ("strong_sub", "strong_harm"):
            if cls in hess.verdicts:
                report.verdicts[cls] = _combine(report.verdicts[cls], hess.verdicts[cls])
        report.witnesses += hess.witnesses
        report.stats.update(hess.stats)
    return report


# ---------------------------------------------------------------------------
# J-plurisubharmonicity
# ---------------------------------------------------------------------------

def _axial_fragment(u: ScalarField, region: Ball, p: SamplingPolicy):
    """Spread of ``u(x + I y)`` over the sampled units at fixed ``(x, y)``."""
    rng = p.rng(5)
    units = sphere_sample_array(max(p.n_units, 2))
    c = region.center.w
    R = region.radius
    rho = R * np.sqrt(rng.uniform(size=p.n_centers))
    phi = rng.uniform(0, math.pi, size=p.n_centers)
    x = c + rho * np.cos(phi)
    y = np.maximum(rho * np.sin(phi), 2 * p.tube)
    keep = (x - c) ** 2 + y ** 2 < R ** 2
    x, y = x[keep], y[keep]
    pts = np.zeros((len(x), len(units), 4))
    pts[..., 0] = x[:, None]
    pts[..., 1:] = y[:, None, None] * units[None, :, :]
    inside = u.in_domain(pts)
    vals = np.full(pts.shape[:-1], np.nan)
    vals[inside] = u.func(pts[inside])
    rows = np.all(np.isfinite(vals), axis=-1)
    scale = _field_scale(vals[rows].ravel()) if rows.any() else 1.0
    tol = p.tol * scale
    spread = np.where(rows, np.ptp(np.where(np.isfinite(vals), vals, 0.0), axis=-1), np.nan)
    with np.errstate(invalid="ignore"):
        failed = rows & (spread > tol)
    passed = rows & ~failed
    witness = None
    if failed.any():
        k = int(np.argmax(np.where(failed, spread, -np.inf)))
        i_max, i_min = int(np.argmax(vals[k])), int(np.argmin(vals[k]))
        q = Quaternion.from_array
        witness = Witness("J_psh", "axial", q(np.concatenate([[0.0], units[i_max]])),
                          q(pts[k, i_max]), q(pts[k, i_min]),
                          float(vals[k, i_max]), float(vals[k, i_min]), tol)
    return _verdict(passed, failed, p.min_decided), witness, float(np.nanmax(spread)) if rows.any() else math.nan


def test_J_plurisubharmonic(u: ScalarField, region: Optional[Ball] = None,
                            p: SamplingPolicy = SamplingPolicy()) -> ClassificationReport:
    """Axial constancy on ``region`` minus the real axis, then planar circle means of
    ``v(x + iy) = u(x + i y)`` over circles in the upper half-disc.
    """
    region = default_region(u) if region is None else region
    report = ClassificationReport()
    if not region.symmetric:
        report.verdicts["J_psh"] = report.verdicts["J_ph"] = Verdict.INCONCLUSIVE
        report.stats["J.symmetric"] = 0.0
        return report
    axial_v, axial_w, spread = _axial_fragment(u, region, p)
    report.stats["J.axial_spread"] = spread
    I, a, b = _weak_circles(region, p, upper_tube=p.tube, units=np.array([[1.0, 0.0, 0.0]]))
    I, a, b = _drop_punctured(region, I, a, b)
    s = _circle_means(u, I, a, b, p.nodes)
    planar = _mean_fragment(u, s, "J_psh", "J_ph", p)
    for cls in ("J_psh", "J_ph"):
        report.verdicts[cls] = _combine(axial_v, planar.verdicts[cls])
    if axial_w is not None:
        report.witnesses.append(axial_w)
        report.witnesses.append(Witness("J_ph", *(getattr(axial_w, f) for f in
                                                  ("kind", "I", "a", "b", "lhs", "rhs", "tol", "nodes"))))
    report.witnesses += planar.witnesses
    report.stats.update({k.replace("J_psh.", "J.planar_"): v for k, v in planar.stats.items()})
    return report


def classify(u: ScalarField, p: SamplingPolicy = SamplingPolicy(),
             region: Optional[Ball] = None) -> ClassificationReport:
    report = test_weak_subharmonic(u, region, p)
    report = report.merge(test_strong_subharmonic(u, region, p))
    report = report.merge(test_J_plurisubharmonic(u, region, p))
    report.verdicts = {k: report.verdicts[k] for k in CLASSES if k in report.verdicts}
    return report


# ---------------------------------------------------------------------------
# maximum principle and composition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MaxPrinciple:
    interior_max: float
    boundary_max: float
    tol: float

    @property
    def violated(self) -> bool:
        return self.interior_max > self.boundary_max + self.tol

    @property
    def verdict(self) -> Verdict:
        return Verdict.FAIL if self.violated else Verdict.PASS


def max_principle_check(u: ScalarField, I, center: complex, radius: float,
                        n_radial: int = 64, n_angular: int = 256, tol: float = 1e-9) -> MaxPrinciple:
    """Compare the grid maximum of ``u_I`` inside a disc of ``L_I`` with its boundary maximum."""
    I = Quaternion.coerce(I)
    t = np.exp(2j * math.pi * np.arange(n_angular) / n_angular)
    r = radius * np.arange(n_radial) / n_radial
    inner = slice_embed(center + r[:, None] * t[None, :], I).reshape(-1, 4)
    edge = slice_embed(center + radius * t, I)
    if not (np.all(u.in_domain(edge)) and np.all(u.in_domain(inner) | _is_puncture(u, inner))):
        raise DomainEscape("disc is not contained in the field's domain")
    with np.errstate(invalid="ignore"):
        vin = u.func(inner)
    vin = np.where(u.in_domain(inner), vin, -np.inf)
    return MaxPrinciple(float(np.max(vin)), float(np.max(u.func(edge))), tol)


def _is_puncture(u: ScalarField, pts: np.ndarray) -> np.ndarray:
    out = np.zeros(pts.shape[:-1], dtype=bool)
    for q in getattr(u.domain, "punctures", ()):
        out |= qnorm(pts - q.array) == 0.0
    return out


@dataclass
class CompositionReport:
    report: ClassificationReport
    guaranteed: bool


def composition_probe(u: ScalarField, f: RegularPoly, cls: str = "weak",
                      p: SamplingPolicy = SamplingPolicy(), probe: Ball = UNIT_BALL) -> CompositionReport:
    """Classify ``u o f`` on ``probe`` for weak membership.

    ``cls`` states which class ``u`` is known to belong to; weak membership of
    the composition is then guaranteed for ``strong`` and for slice-preserving
    ``f`` when ``weak``.
    """
    if cls not in ("weak", "strong"):
        raise ValueError("cls must be 'weak' or 'strong'")
    pts = probe.sample(p.rng(6), 4096)
    pts = np.concatenate([pts, probe.center.array + 0.999 * probe.radius * _random_sphere3(p.rng(7), 1024)])
    if not np.all(u.in_domain(f.evaluate(pts))):
        raise DomainEscape("f maps probe points outside the domain of u")
    composed = u.compose(f, domain=probe, label=f"{u.label} o f")
    report = test_weak_subharmonic(composed, Ball(probe.center, probe.radius), p)
    guaranteed = cls == "strong" or f.is_slice_preserving()
    return CompositionReport(report, guaranteed)
