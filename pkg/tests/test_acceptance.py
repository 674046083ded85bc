"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines.  The
tolerances live in :mod:`qsh.verify`; each test echoes the measured metrics.
"""

import subprocess
import sys

import pytest

from qsh.verify import CHECKS

TOLERANCES = {
    "1": "Re(q^2) entrywise < 1e-5; log|q| relative < 1e-4",
    "2": "chain-rule residual < 1e-4 on 50 cases",
    "3": "dbar entries and Jacobian identities < 1e-6",
    "4": "zero misclassifications",
    "5": "64->128 relative change < 1e-10; mean of x0^2 = 0.5 +- 1e-10",
    "6": "slice Laplacian < 1e-4; planar/axial exact; sandwich and affine <= 1e-12",
    "7": "zero violations beyond 1e-12; sign oracle 1e-10; distance non-increasing",
    "8": "dbar1 d1 of smoothed Re(q^2) < -1e-3; smoothed log monotone within 1e-8",
}


def report(criterion: str, passed: bool, detail: str) -> None:
    print(f"\n{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}")


@pytest.mark.parametrize("criterion", sorted(CHECKS))
def test_criterion(criterion):
    result = CHECKS[criterion](0, 1.0)
    metrics = ", ".join(f"{k}={v:.3g}" for k, v in sorted(result.metrics.items()))
    report(criterion, result.passed, f"{result.name} [{TOLERANCES[criterion]}] {metrics}")
    assert result.passed, metrics


@pytest.fixture(scope="module")
def verify_runs():
    cmd = [sys.executable, "-m", "qsh.cli", "verify", "--json", "--no-timing", "--seed", "0"]
    return [subprocess.run(cmd, capture_output=True, timeout=300) for _ in range(2)]


def test_criterion_9_report_is_deterministic(verify_runs):
    a, b = verify_runs
    same = a.stdout == b.stdout and len(a.stdout) > 0
    report("9a", same, f"verify --json --no-timing byte-identical over two runs ({len(a.stdout)} bytes)")
    assert same


def test_criterion_9_verify_exits_zero(verify_runs):
    run = verify_runs[0]
    report("9b", run.returncode == 0, f"verify exit code {run.returncode}; {run.stderr.decode().strip()}")
    assert run.returncode == 0
