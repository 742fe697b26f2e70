"""Command-line entry point: ``lagflow run|pipeline-supercritical|compare|mollify|rotate``.

Exit codes: 0 success, 1 numerical abort or rejected transform, 2 usage
error (invalid config, mismatched sampling), 3 an enabled assertion failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .initial import BuilderError
from .grid import ScalarField, gradient, read_snapshot, write_snapshot
from .mollify import mollify
from .monitors import hessian_extrema, phase_extrema, read_csv
from .rotate import RotationError, rotate_with_info, spectral_identity_error
from .scenario import EXIT_ABORT, EXIT_ASSERT, EXIT_OK, EXIT_USAGE, run_pipeline, run_scenario


def _print(obj):
    print(json.dumps(obj, indent=2, default=float))


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    code, summary = run_scenario(cfg, workers=args.workers)
    _print({"passed": summary.get("passed", False), "assertions": summary.get("assertions", {}), "abort": summary.get("abort")})
    return code


def _cmd_pipeline(args) -> int:
    cfg = load_config(args.config)
    code, summary = run_pipeline(cfg, workers=args.workers)
    _print(summary)
    return code


def _parse_tol(text: str) -> tuple[float, bool]:
    """``"1e-4"`` is absolute; ``"10%"`` is relative."""
    text = text.strip()
    if text.endswith("%"):
        return float(text[:-1]) / 100.0, True
    return float(text), False


def _within(a: np.ndarray, b: np.ndarray, tol: float, relative: bool) -> tuple[float, bool]:
    diff = np.abs(a - b)
    if relative:
        scale = np.maximum(np.abs(a), np.abs(b))
        rel = np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), 0.0)
        worst = float(rel.max()) if rel.size else 0.0
    else:
        worst = float(diff.max()) if diff.size else 0.0
    return worst, worst <= tol


def _snapshot_files(d: Path) -> list[Path]:
    return sorted((d / "snapshots").glob("snap_*.txt"))


def _full_gradient(field) -> np.ndarray:
    if isinstance(field, ScalarField):
        return gradient(field)
    return field.full_values()


def _compare_grad(a: Path, b: Path, tol: float, relative: bool) -> int:
    fa, fb = _snapshot_files(a), _snapshot_files(b)
    if not fa or len(fa) != len(fb):
        print(f"mismatched snapshots: {len(fa)} vs {len(fb)}", file=sys.stderr)
        return EXIT_USAGE
    worst = 0.0
    for pa, pb in zip(fa, fb):
        A, ta, _ = read_snapshot(pa)
        B, tb, _ = read_snapshot(pb)
        if A.grid != B.grid or abs(ta - tb) > 1e-12 * max(1.0, abs(ta)):
            print(f"mismatched sampling at {pa.name}: t={ta} vs t={tb}", file=sys.stderr)
            return EXIT_USAGE
        w, _ = _within(_full_gradient(A), _full_gradient(B), tol, relative)
        worst = max(worst, w)
    ok = worst <= tol
    _print({"grad": {"max_discrepancy": worst, "tol": tol, "relative": relative, "passed": ok}})
    return EXIT_OK if ok else EXIT_ASSERT


def _cmd_compare(args) -> int:
    a, b = Path(args.dir_a), Path(args.dir_b)
    tol, relative = _parse_tol(args.tol)
    if args.grad:
        return _compare_grad(a, b, tol, relative)
    try:
        ca, cb = read_csv(a / "monitors.csv"), read_csv(b / "monitors.csv")
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    if ca["t"].shape != cb["t"].shape or np.abs(ca["t"] - cb["t"]).max(initial=0.0) > 1e-12:
        print("mismatched sampling: cadence grids differ", file=sys.stderr)
        return EXIT_USAGE
    cols = args.cols.split(",") if args.cols else [c for c in ca if c != "t"]
    report = {}
    for col in cols:
        if col not in ca or col not in cb:
            print(f"unknown column {col!r}", file=sys.stderr)
            return EXIT_USAGE
        worst, ok = _within(ca[col], cb[col], tol, relative)
        report[col] = {"max_discrepancy": worst, "passed": ok}
    passed = all(r["passed"] for r in report.values())
    _print({"columns": report, "tol": tol, "relative": relative, "passed": passed})
    return EXIT_OK if passed else EXIT_ASSERT


def _default_out(src: Path, tag: str) -> Path:
    return src.with_name(f"{src.stem}_{tag}{src.suffix}")


def _cmd_mollify(args) -> int:
    field, t, offset = read_snapshot(args.snapshot)
    if not isinstance(field, ScalarField):
        print("mollify needs a scalar snapshot", file=sys.stderr)
        return EXIT_USAGE
    if not args.k > 0:
        print("--k must be positive", file=sys.stderr)
        return EXIT_USAGE
    out = mollify(field, args.k)
    path = Path(args.out) if args.out else _default_out(Path(args.snapshot), f"k{args.k:g}")
    write_snapshot(path, out, t, offset)
    _print(
        {
            "output": str(path),
            "hessian_range_before": hessian_extrema(field),
            "hessian_range_after": hessian_extrema(out),
            "theta_range_before": phase_extrema(field),
            "theta_range_after": phase_extrema(out),
        }
    )
    return EXIT_OK


def _cmd_rotate(args) -> int:
    field, t, offset = read_snapshot(args.snapshot)
    if not isinstance(field, ScalarField):
        print("rotate needs a scalar snapshot", file=sys.stderr)
        return EXIT_USAGE
    try:
        out, info = rotate_with_info(field, args.sigma)
    except RotationError as exc:
        print(f"rotation rejected: {exc}", file=sys.stderr)
        return EXIT_ABORT
    path = Path(args.out) if args.out else _default_out(Path(args.snapshot), f"rot{args.sigma:g}")
    write_snapshot(path, out, t, 0.0)
    _print(
        {
            "output": str(path),
            "graph_margin": info.plan.margin,
            "newton_iterations": info.newton_iterations,
            "curl_residual": info.curl_residual,
            "spectral_identity_error": spectral_identity_error(field, out, info),
            "hessian_range_after": hessian_extrema(out),
        }
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lagflow", description=__doc__.splitlines()[0])
    p.add_argument("--workers", type=int, default=1, help="cap on monitor worker threads (results unchanged)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="evolve a scenario and audit it")
    r.add_argument("config")
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("pipeline-supercritical", help="rotate, mollify, rotate, evolve, rotate back")
    s.add_argument("config")
    s.set_defaults(func=_cmd_pipeline)

    c = sub.add_parser("compare", help="compare two run directories")
    c.add_argument("dir_a")
    c.add_argument("dir_b")
    c.add_argument("--cols", default=None, help="comma-separated monitor columns (default: all)")
    c.add_argument("--tol", default="1e-8", help="absolute, or relative with a trailing %%")
    c.add_argument("--grad", action="store_true", help="compare gradients of the snapshots instead")
    c.set_defaults(func=_cmd_compare)

    m = sub.add_parser("mollify", help="heat-kernel mollify a snapshot")
    m.add_argument("snapshot")
    m.add_argument("--k", type=float, required=True)
    m.add_argument("--out", default=None)
    m.set_defaults(func=_cmd_mollify)

    t = sub.add_parser("rotate", help="Lagrangian rotation of a snapshot")
    t.add_argument("snapshot")
    t.add_argument("--sigma", type=float, required=True)
    t.add_argument("--out", default=None)
    t.set_defaults(func=_cmd_rotate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.workers < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except (ConfigError, BuilderError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
