import json
import math

import pytest

from qsh import classify as C
from qsh.classify import SamplingPolicy
from qsh.cli import main, parse_field, UsageError

FAST = ["--n-units", "8", "--n-centers", "16", "--n-radii", "2"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_expectations(capsys):
    code, out, _ = run(capsys, "classify", "--field", "coord:x1", "--expect", "weak_harm=pass",
                       "--expect", "J_psh=fail", *FAST)
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"version", "command", "config", "results", "witnesses"}
    verdicts = {r["class"]: r["verdict"] for r in doc["results"] if "class" in r}
    assert verdicts["weak_harm"] == "pass" and verdicts["J_psh"] == "fail"


def test_classify_mismatch_exits_one(capsys):
    code, _, err = run(capsys, "classify", "--field", "re_q2", "--expect", "strong_sub=pass", *FAST)
    assert code == 1 and "strong_sub" in err


def test_classify_is_reproducible_from_echoed_config(capsys):
    _, out, _ = run(capsys, "classify", "--field", "log_abs", "--seed", "4", *FAST)
    doc = json.loads(out)
    policy = SamplingPolicy(**doc["config"]["policy"])
    report = C.classify(parse_field(doc["config"]["field"]), policy).to_dict()
    assert [{"class": c, "verdict": v} for c, v in report["verdicts"].items()] == doc["results"][:-1]


@pytest.mark.parametrize("argv", [
    ["classify", "--field", "bogus"],
    ["classify", "--field", "abs_pow:x"],
    ["classify", "--field", "coord:x7"],
    ["classify", "--field", "re_q2", "--expect", "nope=pass"],
    ["green", "--ball", "0,1", "--pole", "2", "--at", "0"],
    ["green", "--ball", "0,1", "--pole", "1+", "--at", "0"],
    ["green", "--slice-disc", "--pole", "0.3i", "--at", "0"],
    ["moebius", "--pole", "2i", "--at", "0"],
    ["moebius", "--pole", "0.3", "--at", "0"],
])
def test_usage_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_green_values(capsys):
    code, out, _ = run(capsys, "green", "--ball", "0,1", "--pole", "0", "--at", "0.5j", "--at", "0")
    assert code == 0
    rows = [line.split("\t") for line in out.splitlines()]
    assert float(rows[0][1]) == pytest.approx(math.log(0.5))
    assert rows[1][1] == "-inf"


def test_green_json_minus_infinity_token(capsys):
    _, out, _ = run(capsys, "green", "--ball", "0,1", "--pole", "0", "--at", "0", "--json")
    doc = json.loads(out)
    assert doc["results"][0]["value"] == "-inf"


def test_green_slice_disc(capsys):
    code, out, _ = run(capsys, "green", "--slice-disc", "--pole", "0.3", "--at", "0.3+0.4k")
    expect = math.log(0.4 / abs(1 - (0.3 + 0.4j) * 0.3))
    assert code == 0 and float(out.split("\t")[1]) == pytest.approx(expect, abs=1e-15)


def test_green_grid_csv(capsys, tmp_path):
    path = tmp_path / "g.csv"
    code, _, _ = run(capsys, "green", "--ball", "0,1", "--pole", "0", "--grid", "5", "--out", str(path))
    lines = path.read_text().splitlines()
    assert code == 0 and lines[0] == "x0,x1,x2,x3,value"
    assert any(line.endswith(",-inf") for line in lines[1:])


def test_moebius_rows(capsys):
    code, out, _ = run(capsys, "moebius", "--pole", "0.5i", "--at", "0.5j", "--at", "0.3+0.1i", "--json")
    rows = json.loads(out)["results"]
    assert code == 0
    assert rows[0]["margin"] > 0 and not rows[0]["equality"]
    assert rows[1]["equality"] and abs(rows[1]["margin"]) < 1e-12


def test_moebius_random_sweep(capsys):
    code, out, _ = run(capsys, "moebius", "--pole", "0.5i", "--random", "1000", "--seed", "7", "--json")
    summary = json.loads(out)["results"][-1]["summary"]
    assert code == 0 and summary["violations"] == 0


def test_sample_field(capsys):
    code, out, _ = run(capsys, "sample-field", "--field", "log_abs", "--grid", "3")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "x0,x1,x2,x3,value" and len(lines) == 9


def test_config_precedence(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "qsh.conf"
    cfg.write_text("# sampling\nseed = 3\nn_units = 8\nn_centers = 16\nn_radii = 2\n")
    monkeypatch.setenv("QSH_SEED", "11")
    _, out, _ = run(capsys, "classify", "--field", "re_q2", "--config", str(cfg), "--n-units", "4")
    policy = json.loads(out)["config"]["policy"]
    assert policy["seed"] == 3 and policy["n_units"] == 4 and policy["n_centers"] == 16
    _, out, _ = run(capsys, "classify", "--field", "re_q2", *FAST)
    assert json.loads(out)["config"]["policy"]["seed"] == 11


def test_bad_config_key(capsys, tmp_path):
    cfg = tmp_path / "qsh.conf"
    cfg.write_text("colour = blue\n")
    code, _, err = run(capsys, "classify", "--field", "re_q2", "--config", str(cfg))
    assert code == 2 and "colour" in err


def test_verify_debug_corrupt_fails(capsys):
    code, out, err = run(capsys, "verify", "--debug-corrupt", "--no-timing")
    assert code == 1 and "verification failed" in err
    assert out.splitlines()[0].startswith("[FAIL]")


def test_parse_field_catalog():
    for spec in ("re_q2", "log_abs", "abs_pow:1.5", "coord:x2", "ball_green:0.1i,1", "weak_green:0.5i",
                 "axial:re_z2", "abs_sq", "re_sq", "im_sq", "const:2", "log_dist:1+i"):
        parse_field(spec)
    with pytest.raises(UsageError):
        parse_field("weak_green:2i")
