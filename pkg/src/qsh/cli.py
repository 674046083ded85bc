"""Command-line front end: ``qsh classify | green | moebius | verify | sample-field``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import fields as F
from .classify import CLASSES, SamplingPolicy, classify
from .errors import NoClosedForm, QshError
from .green import (
    GreenSpec,
    SymmetricSlice,
    green_value,
    moebius_inequality_check,
    moebius_sweep,
    unit_disc_oracle,
    weak_green_bounds,
)
from .quaternion import Quaternion, as_unit, format_quaternion, parse_quaternion, slice_embed
from .verify import run_checks


class UsageError(Exception):
    """Bad field spec, literal or option value (exit code 2)."""


# ---------------------------------------------------------------------------
# field specs
# ---------------------------------------------------------------------------

FIELD_HELP = ("re_q2 | log_abs | abs_pow:ALPHA | coord:x0..x3 | ball_green:Q0,R | weak_green:Q0 | "
              "axial:NAME | abs_sq | re_sq | im_sq | const:C | log_dist:P")


def _quat(text: str) -> Quaternion:
    try:
        return parse_quaternion(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{what} must be a number, got {text!r}") from None


def parse_field(spec: str) -> F.ScalarField:
    name, _, arg = spec.partition(":")
    simple = {"re_q2": F.re_q2, "log_abs": F.log_abs, "abs_sq": F.abs_sq, "re_sq": F.re_sq, "im_sq": F.im_sq}
    try:
        if name in simple:
            if arg:
                raise UsageError(f"{name} takes no parameter")
            return simple[name]()
        if name == "abs_pow":
            return F.abs_pow(_float(arg, "alpha"))
        if name == "coord":
            if arg not in ("x0", "x1", "x2", "x3"):
                raise UsageError("coord needs one of x0, x1, x2, x3")
            return F.coord(int(arg[1]))
        if name == "ball_green":
            q0, _, R = arg.rpartition(",")
            if not q0:
                raise UsageError("ball_green needs Q0,R")
            R = _float(R, "R")
            if not R > 0:
                raise UsageError("R must be positive")
            return F.ball_green_field(_quat(q0), R)
        if name == "weak_green":
            q0 = _quat(arg)
            if not q0.norm() < 1.0:
                raise UsageError("weak_green pole must satisfy |q0| < 1")
            return F.weak_green_field(q0)
        if name == "axial":
            return F.axial(arg)
        if name == "const":
            return F.constant(_float(arg, "constant"))
        if name == "log_dist":
            return F.log_dist(_quat(arg))
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown field {spec!r}; expected {FIELD_HELP}")


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _clean(obj):
    """Replace non-finite floats by tokens and numpy scalars by Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _report(command: str, config: dict, results, witnesses=()) -> str:
    doc = {"version": __version__, "command": command, "config": config,
           "results": list(results), "witnesses": list(witnesses)}
    return json.dumps(_clean(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("QSH_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"QSH_SEED must be an integer, got {env!r}") from None
    return 0


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _policy(args) -> SamplingPolicy:
    try:
        return SamplingPolicy(n_units=args.n_units, n_centers=args.n_centers, n_radii=args.n_radii,
                              tol=args.tol, seed=_resolve_seed(args), nodes=args.nodes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_classify(args) -> int:
    u = parse_field(args.field)
    policy = _policy(args)
    expects = {}
    for item in args.expect or ():
        cls, _, verdict = item.partition("=")
        if cls not in CLASSES or verdict not in ("pass", "fail", "inconclusive"):
            raise UsageError(f"--expect needs CLASS=pass|fail|inconclusive with CLASS in {CLASSES}")
        expects[cls] = verdict
    report = classify(u, policy).to_dict()
    config = {"field": args.field, "policy": vars(policy)}
    results = [{"class": cls, "verdict": v} for cls, v in report["verdicts"].items()]
    mismatched = [c for c, v in expects.items() if report["verdicts"][c] != v]
    doc = {"stats": report["stats"]}
    if expects:
        doc["expect"] = expects
        doc["mismatched"] = mismatched
    _emit(_report("classify", config, results + [doc], report["witnesses"]), args.out)
    if mismatched:
        print(f"expectation failed for: {', '.join(mismatched)}", file=sys.stderr)
        return 1
    return 0


def _green_spec(args) -> GreenSpec:
    pole = _quat(args.pole)
    try:
        if args.slice_disc:
            if not pole.is_real(0.0):
                raise UsageError("--slice-disc needs a real pole")
            return GreenSpec(SymmetricSlice(unit_disc_oracle(pole.w)), pole, "weak")
        if args.ball is None:
            raise UsageError("give --ball C,R or --slice-disc")
        c, _, R = args.ball.rpartition(",")
        if not c:
            raise UsageError("--ball needs C,R")
        return GreenSpec.ball(_quat(c), _float(R, "R"), pole, args.flavor)
    except QshError as exc:
        raise UsageError(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _green_at(spec: GreenSpec, q: Quaternion) -> dict:
    try:
        return {"at": format_quaternion(q), "value": float(green_value(spec, q.array))}
    except NoClosedForm:
        b = weak_green_bounds(spec.pole, q)
        return {"at": format_quaternion(q), "lower": b.lower_classical, "lower_regular": b.lower_regular,
                "upper": b.upper}


def cmd_green(args) -> int:
    spec = _green_spec(args)
    if isinstance(spec.domain, F.Ball) and spec.flavor == "weak" and not spec.pole.is_real(0.0):
        dom = spec.domain
        if not (dom.center.isclose(Quaternion(), 0.0) and dom.radius == 1.0):
            raise UsageError("weak Green functions with non-real pole are only bounded on the unit ball")
    elif isinstance(spec.domain, F.Ball) and not spec.pole.isclose(spec.domain.center, 0.0):
        raise UsageError("closed forms need the ball centered at the pole")
    pts = [_quat(t) for t in args.at or ()]
    rows = []
    for q in pts:
        try:
            rows.append(_green_at(spec, q))
        except QshError as exc:
            raise UsageError(f"{format_quaternion(q)}: {exc}") from None
    if args.grid:
        _emit(_green_grid(spec, args.grid, as_unit(_quat(args.unit))), args.out)
        return 0
    if args.json:
        config = {"ball": args.ball, "slice_disc": args.slice_disc, "pole": args.pole, "flavor": spec.flavor}
        _emit(_report("green", config, rows), args.out)
        return 0
    lines = []
    for r in rows:
        if "value" in r:
            lines.append(f"{r['at']}\t{_fmt(r['value'])}")
        else:
            lines.append(f"{r['at']}\tlower={_fmt(r['lower'])}\tlower_regular={_fmt(r['lower_regular'])}\t"
                         f"upper={_fmt(r['upper'])}")
    _emit("".join(line + "\n" for line in lines), args.out)
    return 0


def _grid_csv(points: np.ndarray, values: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x0", "x1", "x2", "x3", "value"])
    for p, v in zip(points, values):
        w.writerow([repr(float(c)) for c in p] + [_fmt(v)])
    return buf.getvalue()


def _slice_grid(center: complex, radius: float, n: int, I) -> np.ndarray:
    t = np.linspace(-radius, radius, n)
    z = center + t[:, None] + 1j * t[None, :]
    return slice_embed(z.ravel(), I)


def _green_grid(spec: GreenSpec, n: int, I) -> str:
    if n < 2:
        raise UsageError("--grid needs at least 2 points per axis")
    if isinstance(spec.domain, F.Ball):
        c, R = spec.domain.slice_disc(I)
    else:
        c, R = 0j, 1.0
    pts = _slice_grid(c, R, n, I)
    pts = pts[spec.domain.contains(pts)]
    vals = []
    for p in pts:
        try:
            vals.append(float(green_value(spec, p)))
        except NoClosedForm:
            vals.append(weak_green_bounds(spec.pole, Quaternion.from_array(p)).lower_classical)
    return _grid_csv(pts, np.array(vals))


def cmd_moebius(args) -> int:
    pole = _quat(args.pole)
    if not pole.norm() < 1.0:
        raise UsageError("the pole must satisfy |q0| < 1")
    if pole.is_real():
        raise UsageError("the pole must be non-real")
    seed = _resolve_seed(args)
    config = {"pole": args.pole, "seed": seed, "random": args.random}
    rows = []
    for text in args.at or ():
        q = _quat(text)
        if not q.norm() < 1.0:
            raise UsageError(f"{text}: points must lie in the unit ball")
        m = moebius_inequality_check(pole, q)
        rows.append({"at": format_quaternion(q), "M": m.rhs, "M_regular": m.lhs, "margin": m.margin,
                     "equality": m.equality, "delta_before": m.delta_before, "delta_after": m.delta_after})
    summary = None
    if args.random:
        rng = np.random.default_rng(seed)
        d = rng.normal(size=(args.random, 4))
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        pts = d * rng.uniform(size=(args.random, 1)) ** 0.25 * 0.999
        s = moebius_sweep(np.broadcast_to(pole.array, pts.shape), pts)
        summary = {"samples": args.random, "violations": s.violations(),
                   "equalities": int(np.sum(s.equality)), "min_margin": float(np.min(s.margin)),
                   "max_delta_increase": float(np.max(s.delta_after - s.delta_before)),
                   "max_sign_oracle_err": float(np.max(np.abs(s.inner - s.closed_form)))}
    if args.json:
        results = rows + ([{"summary": summary}] if summary else [])
        _emit(_report("moebius", config, results), args.out)
    else:
        cols = ("M", "M_regular", "margin", "equality", "delta_before", "delta_after")
        lines = ["at\t" + "\t".join(cols)]
        for r in rows:
            lines.append(r["at"] + "\t" + "\t".join(str(r[c]) if c == "equality" else _fmt(r[c]) for c in cols))
        if summary:
            lines.append("summary\t" + "\t".join(f"{k}={v}" for k, v in summary.items()))
        _emit("".join(line + "\n" for line in lines), args.out)
    return 1 if summary and summary["violations"] else 0


def cmd_verify(args) -> int:
    seed = _resolve_seed(args)
    results = run_checks(seed, -1.0 if args.debug_corrupt else 1.0)
    failed = [r for r in results if not r.passed]
    if args.json:
        config = {"seed": seed, "debug_corrupt": args.debug_corrupt}
        _emit(_report("verify", config, [r.to_dict(timing=not args.no_timing) for r in results]), args.out)
    else:
        lines = []
        for r in results:
            tail = "" if args.no_timing else f" ({r.seconds:.2f}s)"
            lines.append(f"[{'PASS' if r.passed else 'FAIL'}] {r.criterion} {r.name}{tail}")
        _emit("".join(line + "\n" for line in lines), args.out)
    if failed:
        print(f"verification failed: {failed[0].criterion} {failed[0].name}", file=sys.stderr)
        return 1
    return 0


def cmd_sample_field(args) -> int:
    u = parse_field(args.field)
    if args.grid < 2:
        raise UsageError("--grid needs at least 2 points per axis")
    I = as_unit(_quat(args.unit))
    center = _quat(args.center)
    pts = _slice_grid(0j, args.radius, args.grid, I) + center.array
    pts = pts[u.in_domain(pts)]
    _emit(_grid_csv(pts, u.func(pts)), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _read_config(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for n, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise UsageError(f"{path}:{n}: expected key=value")
                out[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    return out


def _apply_config(sub: argparse.ArgumentParser, values: dict) -> None:
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        if key not in known or key in ("help", "config"):
            raise UsageError(f"unknown config key {key!r}")
        action = known[key]
        if action.type is not None:
            try:
                defaults[key] = action.type(raw)
            except ValueError:
                raise UsageError(f"bad value for {key}: {raw!r}") from None
        elif isinstance(action.const, bool):
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = raw
    sub.set_defaults(**defaults)


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="qsh", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qsh {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    table = {}

    def add(name, func, help_text):
        p = subs.add_parser(name, help=help_text)
        p.add_argument("--config", help="key=value file; flags override it")
        p.add_argument("--seed", type=int, default=None, help="random seed (default: $QSH_SEED or 0)")
        p.add_argument("--out", help="write output to this file instead of stdout")
        p.set_defaults(func=func)
        table[name] = p
        return p

    p = add("classify", cmd_classify, "classify a field into the subharmonicity classes")
    p.add_argument("--field", required=True, help=FIELD_HELP)
    p.add_argument("--expect", action="append", metavar="CLASS=VERDICT",
                   help="exit 1 unless the verdict matches (repeatable)")
    defaults = SamplingPolicy()
    p.add_argument("--n-units", type=int, default=defaults.n_units)
    p.add_argument("--n-centers", type=int, default=defaults.n_centers)
    p.add_argument("--n-radii", type=int, default=defaults.n_radii)
    p.add_argument("--nodes", type=int, default=defaults.nodes)
    p.add_argument("--tol", type=float, default=defaults.tol)

    p = add("green", cmd_green, "evaluate Green functions on balls and the unit slice disc")
    p.add_argument("--ball", metavar="C,R", help="ball center literal and radius")
    p.add_argument("--slice-disc", action="store_true", help="unit ball through the unit-disc oracle (real pole)")
    p.add_argument("--pole", required=True)
    p.add_argument("--flavor", choices=("weak", "strong"), default="strong")
    p.add_argument("--at", action="append", metavar="Q", help="evaluation point (repeatable)")
    p.add_argument("--grid", type=int, default=0, metavar="N", help="export an N x N slice grid as CSV")
    p.add_argument("--unit", default="i", help="imaginary unit of the exported slice")
    p.add_argument("--json", action="store_true")

    p = add("moebius", cmd_moebius, "compare classical and regular Moebius maps")
    p.add_argument("--pole", required=True)
    p.add_argument("--at", action="append", metavar="Q")
    p.add_argument("--random", type=int, default=0, metavar="N", help="sweep N random points of the ball")
    p.add_argument("--json", action="store_true")

    p = add("verify", cmd_verify, "run the oracle checks")
    p.add_argument("--json", action="store_true")
    p.add_argument("--no-timing", action="store_true", help="omit timings (byte-deterministic output)")
    p.add_argument("--debug-corrupt", action="store_true", help="flip every tolerance to force failures")

    p = add("sample-field", cmd_sample_field, "export a field on a square of a slice as CSV")
    p.add_argument("--field", required=True, help=FIELD_HELP)
    p.add_argument("--unit", default="i")
    p.add_argument("--center", default="0")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--grid", type=int, default=21, metavar="N")
    return parser, table


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser, table = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
        if args.config:
            _apply_config(table[args.command], _read_config(args.config))
            args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"qsh: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
