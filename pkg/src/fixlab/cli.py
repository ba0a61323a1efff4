"""Command-line front end.

Exit status: 0 ok, 1 validation failure, 2 config or usage error,
3 divergence guard fired, 4 anchor solver did not converge.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import convergence_report, export_anchor_csv, export_csv
from .anchor import AnchorNonConvergence, attach_vi, estimate_Q
from .checks import SUITES, run_suites
from .config import ConfigError, Experiment, load, preset_document, preset_names
from .engine import StopReason, run
from .families import FAMILY_KINDS
from .operators import OPERATOR_KINDS
from .schedules import SCHEDULE_FAMILIES
from .validation import SchemeMismatch, validate

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_DIVERGED, EXIT_ANCHOR = 0, 1, 2, 3, 4


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def _fmt_vec(v):
    return "(" + ", ".join(f"{x:.12g}" for x in np.asarray(v, dtype=float)) + ")"


def _write_json(path: Path, data):
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8", newline="")


def report_path(csv_path) -> Path:
    """``traj.csv`` -> ``traj.report.json`` in the same directory."""
    p = Path(csv_path)
    return p.with_name(p.stem + ".report.json")


def _solve_anchor(exp: Experiment):
    T, f = exp.anchor_maps()
    a = exp.anchor
    res = estimate_Q(T, f, a["t0"], a["sigma"], a["path_tol"], a["inner_tol"], a["max_stages"])
    fs = T.fixed_set()
    if fs.known:
        pts = fs.grid(101)
        if len(pts):
            attach_vi(res, f, pts, exp.space)
    return res


def cmd_run(args) -> int:
    try:
        exp = load(args.config)
        point = None
        if args.reference == "vector":
            if args.point is None:
                raise ConfigError("--reference vector needs --point x1,x2,...")
            point = exp.space.element([float(v) for v in args.point.split(",")])
    except (ConfigError, ValueError) as exc:
        _err(exc)
        return EXIT_CONFIG
    if args.reference == "anchor":
        try:
            res = _solve_anchor(exp)
        except ConfigError as exc:
            _err(exc)
            return EXIT_CONFIG
        except AnchorNonConvergence as exc:
            _err(f"{exc}; best estimate {_fmt_vec(exc.best)}")
            return EXIT_ANCHOR
        point = res.q_hat
    theorem = exp.theorem or "2.1"
    try:
        hyp = validate(exp.process, theorem)
    except SchemeMismatch:
        hyp = validate(exp.process, "2.1")
    traj = run(exp.process, point)
    rep = convergence_report(traj, point, hyp)
    out = Path(args.out)
    try:
        export_csv(traj, out)
        _write_json(report_path(out), rep.to_json())
    except OSError as exc:
        _err(exc)
        return EXIT_CONFIG
    dist = "" if rep.final_dist is None else f", final dist {rep.final_dist:.6g}"
    print(f"{traj.stop.value} after {rep.iterations} iterations: final residual {rep.final_residual:.6g}{dist}")
    print(f"wrote {out} and {report_path(out)}")
    if traj.stop == StopReason.DIVERGED:
        _err(f"iterate norm exceeded divergence radius {exp.process.stop.divergence_radius:g}; "
             "the boundedness assumption fails for this run")
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        exp = load(args.config)
        rep = validate(exp.process, args.theorem)
    except (ConfigError, SchemeMismatch) as exc:
        _err(exc)
        return EXIT_CONFIG
    print(rep.format())
    return EXIT_OK if rep.passed else EXIT_VALIDATION


def cmd_anchor(args) -> int:
    try:
        exp = load(args.config)
        res = _solve_anchor(exp)
    except ConfigError as exc:
        _err(exc)
        return EXIT_CONFIG
    except AnchorNonConvergence as exc:
        _err(f"{exc}")
        print(f"best estimate {_fmt_vec(exc.best)} (inner residual {exc.residual:.3e})")
        return EXIT_ANCHOR
    print(f"q_hat = {_fmt_vec(res.q_hat)}")
    print(f"stages {len(res.path)}, t_last {res.t_last:.6g}, eps(t_last) = {res.eps:.3e}, "
          f"error estimate {res.error_estimate:.3e}")
    if res.vi_residual_max is not None:
        verdict = "ok" if res.vi_residual_max <= res.tol_vi else "VIOLATED"
        print(f"vi residual max {res.vi_residual_max:.3e} (tolerance {res.tol_vi:.3e}) {verdict}")
    else:
        print("vi residual: fixed set unknown, not evaluated")
    if args.out:
        try:
            export_anchor_csv(res, args.out)
        except OSError as exc:
            _err(exc)
            return EXIT_CONFIG
        print(f"wrote {args.out}")
    if not res.converged:
        _err(f"path did not settle within {len(res.path)} stages; best estimate printed above")
        return EXIT_ANCHOR
    return EXIT_OK


def cmd_check(args) -> int:
    results = run_suites(args.suite, args.seed)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def catalog() -> dict:
    presets = {}
    for name in preset_names():
        doc = preset_document(name)
        presets[name] = {"theorem": doc.get("theorem"), "description": doc.get("description", "")}
    return {
        "operators": dict(OPERATOR_KINDS),
        "families": dict(FAMILY_KINDS),
        "schedules": dict(SCHEDULE_FAMILIES),
        "presets": presets,
    }


def cmd_catalog(args) -> int:
    cat = catalog()
    if args.json:
        print(json.dumps(cat, indent=2))
        return EXIT_OK
    for section, entries in cat.items():
        print(f"{section}:")
        for name, desc in entries.items():
            if isinstance(desc, dict):
                desc = f"[theorem {desc['theorem']}] {desc['description']}"
            print(f"  {name:24s} {desc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fixlab", description="Fixed-point iteration lab for l_p spaces.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a config and write the trajectory CSV plus a JSON report")
    r.add_argument("config", help="config file or bundled preset name")
    r.add_argument("--out", required=True, help="trajectory CSV path")
    r.add_argument("--reference", choices=("anchor", "vector", "none"), default="none",
                   help="reference point for the distance column")
    r.add_argument("--point", help="comma-separated reference vector for --reference vector")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("validate", help="itemized hypothesis report for a theorem")
    v.add_argument("config")
    v.add_argument("--theorem", required=True, choices=("2.1", "3.1", "3.2", "3.3"))
    v.set_defaults(func=cmd_validate)

    a = sub.add_parser("anchor", help="estimate the limit of the anchor path")
    a.add_argument("config")
    a.add_argument("--out", help="path CSV")
    a.set_defaults(func=cmd_anchor)

    c = sub.add_parser("check", help="run property suites")
    c.add_argument("--suite", choices=tuple(SUITES) + ("all",), default="all")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_check)

    k = sub.add_parser("catalog", help="list operators, families, schedules and presets")
    k.add_argument("--json", action="store_true")
    k.set_defaults(func=cmd_catalog)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
