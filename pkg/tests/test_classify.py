import math

import numpy as np
import pytest

from qsh import classify as C
from qsh import fields as F
from qsh.classify import SamplingPolicy, Verdict
from qsh.errors import DomainEscape
from qsh.quaternion import Quaternion
from qsh.regular import RegularPoly

FAST = SamplingPolicy(n_units=16, n_centers=32, n_radii=3)
POLE = Quaternion(0.1, 0.3, -0.2, 0.1)


@pytest.fixture(scope="module")
def re_q2_report():
    return C.classify(F.re_q2(), FAST)


@pytest.fixture(scope="module")
def log_report():
    return C.classify(F.log_abs(), FAST)


def test_coordinate_is_weakly_harmonic():
    r = C.test_weak_subharmonic(F.coord(1), None, FAST)
    assert r["weak_sub"] is Verdict.PASS and r["weak_harm"] is Verdict.PASS


def test_negative_log_pole_is_not_weakly_subharmonic():
    u = F.log_dist(POLE).scaled(-1.0)
    r = C.test_weak_subharmonic(u, None, FAST)
    assert r["weak_sub"] is Verdict.FAIL
    w = next(w for w in r.witnesses if w.cls == "weak_sub")
    assert w.replay(u) > w.tol


def test_zero_passes_every_subharmonic_class():
    r = C.classify(F.constant(0.0), FAST)
    for cls in ("weak_sub", "strong_sub", "J_psh"):
        assert r[cls] is Verdict.PASS


def test_power_of_norm_is_strongly_subharmonic():
    assert C.test_strong_subharmonic(F.abs_pow(1.5), None, FAST)["strong_sub"] is Verdict.PASS


def test_re_q2_verdicts(re_q2_report):
    r = re_q2_report
    assert r["weak_harm"] is Verdict.PASS
    assert r["strong_sub"] is Verdict.FAIL
    assert r["J_ph"] is Verdict.PASS


def test_re_q2_witness_leaves_the_slice(re_q2_report):
    u = F.re_q2()
    strong = [w for w in re_q2_report.witnesses if w.cls == "strong_sub"]
    assert strong
    for w in strong:
        assert w.replay(u) > w.tol
        if w.kind == "mean_sub":
            # b is not in L_I, so the circle is not contained in a slice
            v = w.b.array[1:]
            I = w.I.array[1:]
            assert np.linalg.norm(v - np.dot(v, I) * I) > 1e-6


def test_log_verdicts(log_report):
    r = log_report
    assert r["strong_sub"] is Verdict.PASS
    assert r["strong_harm"] is Verdict.FAIL
    assert r["J_ph"] is Verdict.PASS


def test_coordinate_is_not_J_plurisubharmonic():
    r = C.test_J_plurisubharmonic(F.coord(1), None, FAST)
    assert r["J_psh"] is Verdict.FAIL
    w = next(w for w in r.witnesses if w.cls == "J_psh")
    assert w.kind == "axial" and w.replay(F.coord(1)) > w.tol


def test_J_needs_a_symmetric_region():
    r = C.test_J_plurisubharmonic(F.re_q2(), F.Ball(Quaternion(0, 0.5), 0.3), FAST)
    assert r["J_psh"] is Verdict.INCONCLUSIVE


def test_reports_are_deterministic():
    a = C.classify(F.coord(1), FAST).to_dict()
    b = C.classify(F.coord(1), FAST).to_dict()
    assert a == b


def test_report_is_json_ready(re_q2_report):
    import json
    json.dumps(re_q2_report.to_dict(), allow_nan=False)


def test_max_principle():
    r = C.max_principle_check(F.coord(0), Quaternion(0, 1), 0j, 1.0)
    assert not r.violated and r.boundary_max == pytest.approx(1.0)
    u = F.weak_green_field(Quaternion(0.3))
    r = C.max_principle_check(F.ScalarField(u.func, F.WHOLE_SPACE, "g"), Quaternion(0, 0, 1), 0j, 1.0 - 1e-12)
    assert r.boundary_max == pytest.approx(0.0, abs=1e-9) and r.interior_max < 0
    r = C.max_principle_check(F.constant(5.0), Quaternion(0, 0, 1), 0.2 + 0.1j, 0.5)
    assert r.verdict is Verdict.PASS and r.interior_max == r.boundary_max == 5.0


def test_composition_probe():
    r = C.composition_probe(F.abs_sq(), RegularPoly.of(0, 0, 1), "strong", FAST)
    assert r.guaranteed and r.report["weak_sub"] is Verdict.PASS
    r = C.composition_probe(F.re_q2(), RegularPoly.of(-1, 0, 1), "weak", FAST)
    assert r.guaranteed and r.report["weak_harm"] is Verdict.PASS
    r = C.composition_probe(F.re_q2(), RegularPoly.of(0, Quaternion(0, 0, 1)), "weak", FAST)
    assert not r.guaranteed
    assert r.report["weak_sub"] in (Verdict.PASS, Verdict.FAIL, Verdict.INCONCLUSIVE)


def test_composition_probe_checks_the_image():
    with pytest.raises(DomainEscape):
        C.composition_probe(F.ball_green_field(Quaternion(), 0.5), RegularPoly.of(0, 1), "strong", FAST)


def test_policy_validation():
    with pytest.raises(ValueError):
        SamplingPolicy(n_units=0)
    with pytest.raises(ValueError):
        SamplingPolicy(tol=0.0)
    assert math.isfinite(SamplingPolicy().tol)
