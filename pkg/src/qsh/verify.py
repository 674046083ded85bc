"""Oracle checks run by ``qsh verify``: each compares a computed quantity with a pinned tolerance."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import fields as F
from .calculus import CircleSpec, circle_mean, dbar1_d1, mollified, mollify_at, slice_hessian, chain_rule_check
from .classify import SamplingPolicy, classify
from .green import (
    GreenSpec,
    affine_image,
    ball_green,
    ball_green_slice_laplacian,
    moebius_sweep,
    sandwich_check,
    slice_green,
    slice_green_axial,
    unit_disc_oracle,
)
from .quaternion import CANONICAL_FRAME, Quaternion, frame_complete, qnorm
from .regular import holomorphy_matrix_check, random_poly

# Probe for the smoothing counter-example: a point of L_i, kernel radius 0.3, 16 nodes per axis.
MOLLIFIER_PROBE = Quaternion(0.5, 0.5)
MOLLIFIER_EPS = 0.3
MOLLIFIER_GRID = 16


@dataclass
class CheckResult:
    name: str
    criterion: str
    passed: bool
    metrics: dict[str, float] = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self, timing: bool = True) -> dict:
        out = {"name": self.name, "criterion": self.criterion, "passed": self.passed,
               "metrics": {k: _finite(v) for k, v in sorted(self.metrics.items())}}
        if timing:
            out["seconds"] = round(self.seconds, 3)
        return out


def _finite(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream])


def _ball_points(rng, n, rmin=0.0, rmax=1.0):
    d = rng.normal(size=(n, 4))
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    r = rng.uniform(rmin ** 4, rmax ** 4, size=(n, 1)) ** 0.25
    return d * r


def _frame(rng):
    return frame_complete(rng.normal(size=3))


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def check_hessian(seed: int = 0, tol_scale: float = 1.0) -> CheckResult:
    rng = _rng(seed, 1)
    target = np.array([[0, 0], [0, -1]], dtype=complex)
    err_re = 0.0
    for q in _ball_points(rng, 20, 0.0, 2.0):
        H = slice_hessian(F.re_q2(), _frame(rng), q)
        err_re = max(err_re, float(np.max(np.abs(H.matrix() - target))))
    err_log = 0.0
    u = F.log_abs()
    for q in _ball_points(rng, 20, 0.2, 1.5):
        frame = _frame(rng)
        z1, z2 = (complex(v) for v in frame.split(q))
        s = abs(z1) ** 2 + abs(z2) ** 2
        exact = np.array([[abs(z2) ** 2, -z1 * z2.conjugate()],
                          [-z2 * z1.conjugate(), abs(z1) ** 2]]) / (2 * s ** 2)
        H = slice_hessian(u, frame, q).matrix()
        err_log = max(err_log, float(np.linalg.norm(H - exact) / np.linalg.norm(exact)))
    ok = err_re < 1e-5 * tol_scale and err_log < 1e-4 * tol_scale
    return CheckResult("hessian golden values", "1", ok, {"re_q2_abs_err": err_re, "log_abs_rel_err": err_log})


def chain_rule_cases(seed: int = 0, n: int = 50):
    """``(u, f, frame, q0)`` tuples with ``f(q0)`` well inside the domain of ``u``."""
    rng = _rng(seed, 2)
    catalog = [F.abs_sq(), F.re_q2(), F.log_abs(), F.abs_pow(1.5), F.log_dist(Quaternion(0.2, -0.3, 0.1, 0.4)),
               F.coord(2), F.re_sq(), F.im_sq()]
    cases = []
    k = 0
    while len(cases) < n:
        u = catalog[k % len(catalog)]
        real = k % 3 == 0
        f = random_poly(rng, int(rng.integers(1, 4)), 0.6, real=real)
        frame = _frame(rng)
        z = complex(*rng.uniform(-0.7, 0.7, size=2))
        q0 = Quaternion.from_array(frame.to_slice(z))
        fq = f(q0).array
        k += 1
        if any(qnorm(fq - s.array) < 0.3 for s in u.singular):
            continue
        cases.append((u, f, frame, q0))
    return cases


def check_chain_rule(seed: int = 0, tol_scale: float = 1.0) -> CheckResult:
    worst = 0.0
    worst_sp = 0.0
    n_sp = 0
    for u, f, frame, q0 in chain_rule_cases(seed):
        r = chain_rule_check(u, f, frame, q0)
        worst = max(worst, r.residual)
        if r.slice_preserving_rhs is not None:
            n_sp += 1
            worst_sp = max(worst_sp, abs(r.lhs - r.slice_preserving_rhs))
    ok = worst < 1e-4 * tol_scale and worst_sp < 1e-4 * tol_scale and n_sp > 0
    return CheckResult("chain rule identity", "2", ok,
                       {"max_residual": worst, "slice_preserving_residual": worst_sp, "slice_preserving_cases": float(n_sp)})


def check_holomorphy(seed: int = 0, tol_scale: float = 1.0) -> CheckResult:
    rng = _rng(seed, 3)
    dbar = jac_nonreal = jac_real = 0.0
    for _ in range(10):
        f = random_poly(rng, int(rng.integers(0, 5)), 0.5)
        frame = _frame(rng)
        zs = [complex(*rng.uniform(-0.8, 0.8, size=2)) for _ in range(7)] + list(rng.uniform(-0.8, 0.8, size=3))
        for z in zs:
            c = holomorphy_matrix_check(f, frame, frame.to_slice(complex(z)))
            dbar = max(dbar, c.dbar_residual)
            if c.real_point:
                jac_real = max(jac_real, c.jacobian_residual)
            else:
                jac_nonreal = max(jac_nonreal, c.jacobian_residual)
    tol = 1e-6 * tol_scale
    ok = dbar < tol and jac_nonreal < tol and jac_real < tol
    return CheckResult("holomorphy matrix", "3", ok,
                       {"dbar_max": dbar, "jacobian_nonreal_max": jac_nonreal, "jacobian_real_max": jac_real})


EXPECTED_CLASSES = {
    "re_q2": {"J_ph": "pass", "weak_harm": "pass", "strong_sub": "fail"},
    "log_abs": {"J_ph": "pass", "strong_sub": "pass", "strong_harm": "fail"},
    "coord:x1": {"weak_harm": "pass", "J_psh": "fail"},
    "abs_pow:1.5": {"strong_sub": "pass"},
}


def check_classifier(seed: int = 0, tol_scale: float = 1.0) -> CheckResult:
    fields = {"re_q2": F.re_q2(), "log_abs": F.log_abs(), "coord:x1": F.coord(1), "abs_pow:1.5": F.abs_pow(1.5)}
    wrong = 0
    metrics = {}
    for name, expect in EXPECTED_CLASSES.items():
        report = classify(fields[name], SamplingPolicy(seed=seed))
        for cls, verdict in expect.items():
            got = str(report.verdicts[cls])
            metrics[f"{name}.{cls}"] = 1.0 if got == verdict else 0.0
            wrong += got != verdict
    return CheckResult("classifier concordance", "4", wrong <= 0 * tol_scale and tol_scale > 0,
                       {"misclassified": float(wrong), **metrics})


def check_quadrature(seed: int = 0, tol_scale: float = 1.0) -> CheckResult:
    rng = _rng(seed, 5)
    smooth = [F.re_q2(), F.abs_sq(), F.coord(1), F.re_sq(), F.im_sq(), F.constant(2.5)]
    worst = 0.0
    for u in smooth:
        for _ in range(10):
            I = rng.normal(size=3)
            a = Quaternion.from_array(rng.normal(size=4) * 0.5)
            b = Quaternion.from_array(rng.normal(size=4) * 0.5)
            m64 = circle_mean(u, CircleSpec(I, a, b, 64))
            m128 = circle_mean(u, CircleSpec(I, a, b, 128))
            worst = max(worst, abs(m128 - m64) / max(1.0, abs(m128)))
    # fields singular at the origin, on circles that stay at distance >= 0.5 from it
    for u in (F.log_abs(), F.abs_pow(1.5)):
        for _ in range(10):
            I = rng.normal(size=3)
            a = rng.normal(size=4)
            a /= np.linalg.norm(a)
            b = rng.normal(size=4)
            b *= 0.5 / np.linalg.norm(b)
            m64 = circle_mean(u, CircleSpec(I, a, b, 64))
            m128 = circle_mean(u, CircleSpec(I, a, b, 128))
            worst = max(worst, abs(m128 - m64) / max(1.0, abs(m128)))
    x0sq = F.ScalarField(lambda q: q[..., 0] ** 2, F.WHOLE_SPACE, "x0^2", c2=True)
    mean = circle_mean(x0sq, CircleSpec(Quaternion(0, 1), 0, 1))
    ok = worst < 1e-10 * tol_scale and abs(mean - 0.5) < 1e-10 * tol_scale
    return CheckResult("circle mean quadrature", "5", ok, {"doubling_rel_change": worst, "x0sq_mean_err": abs(mean - 0.5)})


def check_green(seed: int = 0, tol_scale: float = 1.0) -> CheckResult:
    rng = _rng(seed, 6)
    lap = 0.0
    for _ in range(20):
        q0 = Quaternion.from_array(_ball_points(rng, 1, 0.0, 0.6)[0])
        frame = _frame(rng)
        q1, _ = frame.split(q0.array)
        z = complex(q1) + 0.3 * np.exp(1j * rng.uniform(0, 2 * math.pi))
        u = F.ball_green_field(q0, 1.0)
        fd = dbar1_d1(u, frame, frame.to_slice(z))
        lap = max(lap, abs(fd - ball_green_slice_laplacian(q0, frame, z)))
    lap = float(lap)

    oracle = unit_disc_oracle(0.3)
    planar = axial = embedded = 0.0
    for _ in range(50):
        x, y = rng.uniform(-0.6, 0.6), rng.uniform(0.01, 0.7)
        I1, I2 = (v / np.linalg.norm(v) for v in rng.normal(size=(2, 3)))
        g1 = slice_green_axial(oracle, x, y, I1)
        g2 = slice_green_axial(oracle, x, y, I2)
        planar = max(planar, abs(g1 - float(oracle(x + 1j * y))))
        axial = max(axial, abs(g1 - g2))
        # through the quaternion x + I y the modulus |y I| is only recovered up to round-off
        embedded = max(embedded, abs(slice_green(oracle, 0.3, np.concatenate([[x], y * I1])) - g1))

    sandwich = -math.inf
    for _ in range(5):
        q0 = Quaternion.from_array(rng.normal(size=4))
        rho = rng.uniform(0.5, 2.0)
        spec = GreenSpec.ball(q0, rho)
        res = sandwich_check(spec, rho * rng.uniform(0.3, 1.0), rho * rng.uniform(1.0, 3.0), n=100,
                             seed=int(rng.integers(1 << 31)))
        sandwich = max(sandwich, res.worst)

    affine = 0.0
    for _ in range(20):
        spec = GreenSpec.ball(Quaternion.from_array(rng.normal(size=4)), rng.uniform(0.5, 2.0))
        a, b = Quaternion.from_array(rng.normal(size=4)), Quaternion.from_array(rng.normal(size=4))
        image = affine_image(spec, a, b)
        q = spec.domain.sample(rng, 1)[0]
        fq = (a + Quaternion.from_array(q) * b).array
        affine = max(affine, abs(ball_green(image, fq) - ball_green(spec, q)))

    ok = (lap < 1e-4 * tol_scale and planar <= 0.0 * tol_scale and axial <= 0.0 * tol_scale
          and embedded < 1e-12 * tol_scale
          and sandwich <= 1e-12 * tol_scale and affine < 1e-12 * tol_scale and tol_scale > 0)
    return CheckResult("green functions", "6", ok, {
        "slice_laplacian_err": lap, "planar_oracle_err": planar, "axial_spread": axial,
        "embedded_roundoff": embedded, "sandwich_worst": sandwich, "affine_err": affine,
    })


def check_moebius(seed: int = 0, tol_scale: float = 1.0) -> CheckResult:
    rng = _rng(seed, 7)
    n = 10_000
    q0 = _ball_points(rng, n, 0.0, 0.95)
    q = _ball_points(rng, n, 0.0, 0.95)
    s = moebius_sweep(q0, q)
    violations = s.violations(1e-12 * tol_scale)
    flag_mismatch = int(np.sum(s.equality != (s.slice_distance < 1e-9)))
    # points on the pole's slice must be flagged and give equality
    unit = q0[:100, 1:] / np.linalg.norm(q0[:100, 1:], axis=-1, keepdims=True)
    w = rng.uniform(-0.6, 0.6, size=(100, 2))
    on_slice = np.concatenate([w[:, :1], w[:, 1:] * unit], axis=-1)
    e = moebius_sweep(q0[:100], on_slice)
    flag_mismatch += int(np.sum(~e.equality)) + int(np.sum(s.equality & (s.margin <= 0) & ~s.equality))
    eq_gap = float(np.max(np.abs(e.margin)))
    strict_missing = int(np.sum(~s.equality & (s.margin <= 0)))
    sign_err = float(np.max(np.abs(s.inner - s.closed_form)))
    sign_neg = int(np.sum(s.closed_form < 0))
    contraction = float(np.max(s.delta_after - s.delta_before))
    ok = (violations == 0 and flag_mismatch == 0 and eq_gap <= 1e-12 * tol_scale and strict_missing == 0
          and sign_err <= 1e-10 * tol_scale and sign_neg == 0 and contraction <= 1e-12 * tol_scale)
    return CheckResult("moebius inequality", "7", ok, {
        "violations": float(violations), "flag_mismatches": float(flag_mismatch), "equality_gap": eq_gap,
        "strict_missing": float(strict_missing), "sign_oracle_err": sign_err, "delta_increase_max": contraction,
    })


def mollified_slice_laplacian(eps: float = MOLLIFIER_EPS, grid: int = MOLLIFIER_GRID,
                              probe: Quaternion = MOLLIFIER_PROBE, h: float = 1e-2) -> float:
    """``dbar1 d1 (Re(q^2) * chi_eps)`` at the probe point of ``L_i``."""
    return dbar1_d1(mollified(F.re_q2(), eps, grid), CANONICAL_FRAME, probe, h)


def mollified_log_sequence(q=Quaternion(0.5, 0.3, -0.2, 0.1), eps=(0.2, 0.1, 0.05), grid: int = 16):
    u = F.log_abs()
    return [mollify_at(u, e, q, grid) for e in eps], u(q)


def check_mollifier(seed: int = 0, tol_scale: float = 1.0) -> CheckResult:
    lap = mollified_slice_laplacian()
    seq, base = mollified_log_sequence()
    chain = seq + [base]
    rises = max(chain[k + 1] - chain[k] for k in range(len(chain) - 1))
    counter = lap < -1e-3 * tol_scale
    monotone = rises <= 1e-8 * tol_scale
    return CheckResult("mollifier counter-example", "8", counter and monotone, {
        "re_q2_mollified_dbar1d1": lap, "counter_example_found": float(counter),
        "log_monotone_max_rise": rises, "log_monotone": float(monotone),
    })


CHECKS: dict[str, Callable[..., CheckResult]] = {
    "1": check_hessian,
    "2": check_chain_rule,
    "3": check_holomorphy,
    "4": check_classifier,
    "5": check_quadrature,
    "6": check_green,
    "7": check_moebius,
    "8": check_mollifier,
}


def run_checks(seed: int = 0, tol_scale: float = 1.0, only=None) -> list[CheckResult]:
    results = []
    for key, fn in CHECKS.items():
        if only and key not in only:
            continue
        t = time.perf_counter()
        r = fn(seed, tol_scale)
        r.seconds = time.perf_counter() - t
        results.append(r)
    return results
