"""Scenario runner behind the CLI: build data, evolve, monitor, audit and
write ``monitors.csv``, snapshots and ``summary.json`` into a run directory."""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .config import ScenarioConfig
from .flow import FlowAbort, StepperConfig, curl_residual, evolve, gmcf_evolve
from .grid import ScalarField, VectorField, write_snapshot
from .mollify import mollify
from .monitors import (
    convexity_audit,
    decay_audit,
    hessian_extrema,
    hessian_range,
    holder_audit,
    max_principle_audit,
    phase_extrema,
    records,
    split_residuals,
    write_csv,
)
from .pipeline import PipelineConfig, pipeline_supercritical
from .rotate import RotationError
from .symmat import theta

log = logging.getLogger(__name__)

OUT_ENV = "LAGFLOW_OUT"
SQRT3 = math.sqrt(3.0)

EXIT_OK = 0
EXIT_ABORT = 1
EXIT_USAGE = 2
EXIT_ASSERT = 3


def output_dir(cfg: ScenarioConfig) -> Path:
    """Relative ``output.dir`` resolves against ``$LAGFLOW_OUT`` (or the cwd)."""
    d = Path(cfg.output.dir)
    if d.is_absolute():
        return d
    return Path(os.environ.get(OUT_ENV, ".")) / d


def stepper_config(cfg: ScenarioConfig, abort_dir=None) -> StepperConfig:
    r = cfg.run
    return StepperConfig(
        t_end=float(r.t_end),
        cadence=r.cadence,
        cfl_safety=float(r.cfl_safety),
        sample_times=r.sample_times,
        abort_dir=abort_dir,
    )


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def write_summary(path: Path, summary: dict) -> Path:
    path.write_text(json.dumps(summary, indent=2, default=_json_default) + "\n")
    return path


def verify_initial(cfg: ScenarioConfig, u0: ScalarField) -> dict:
    """Independent monitor pass over the builder's advertised property."""
    kind, p = cfg.initial.kind, cfg.initial.params
    lam = hessian_extrema(u0)
    th = phase_extrema(u0)
    check = {"lambda_min": lam[0], "lambda_max": lam[1], "theta_min": th[0], "theta_max": th[1]}
    if kind == "quadratic":
        ok = float(np.abs(u0.values).max()) == 0.0
    elif kind == "supercritical":
        ok = th[0] >= math.pi / 2 + p.get("margin", 0.05) and lam[0] >= 0.0
    elif kind == "trig" and p.get("hessian_range") is not None:
        lo, hi = p["hessian_range"]
        ok = lo <= lam[0] and lam[1] <= hi
    elif kind == "split":
        res = split_residuals(u0)
        ok = all(res[e][0] <= 1e-10 for e in p.get("axes", [0]))
    else:
        ok = bool(np.isfinite(u0.values).all())
    check["passed"] = bool(ok)
    return check


def _snapshots(run_dir: Path, traj, vector: bool = False):
    snap_dir = run_dir / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)
    for i, s in enumerate(traj):
        write_snapshot(snap_dir / f"snap_{i:05d}.txt", s.field, s.time, getattr(s, "offset", 0.0))


def _assert(summary: dict, name: str, passed: bool, **details):
    summary["assertions"][name] = {"passed": bool(passed), **details}


def run_scenario(cfg: ScenarioConfig, workers: int = 1) -> tuple[int, dict]:
    run_dir = output_dir(cfg)
    run_dir.mkdir(parents=True, exist_ok=True)
    grid = cfg.grid.build()
    u0 = cfg.initial.build(grid)
    summary: dict = {"config": cfg.source, "grid": {"N": grid.points, "lengths": grid.lengths}}
    summary["assertions"] = {}

    initial_check = verify_initial(cfg, u0)
    summary["initial_check"] = initial_check
    _assert(summary, "initial_property", initial_check["passed"])
    if cfg.mollify.k is not None:
        u0 = mollify(u0, float(cfg.mollify.k))
        summary["mollified_k"] = float(cfg.mollify.k)

    stepper = stepper_config(cfg, abort_dir=run_dir)
    if cfg.run.flow == "gmcf":
        return _run_gmcf(cfg, u0, stepper, run_dir, summary)

    try:
        traj = evolve(u0, stepper)
    except FlowAbort as exc:
        summary["abort"] = {"message": str(exc), "snapshot": str(exc.snapshot) if exc.snapshot else None}
        write_summary(run_dir / "summary.json", summary)
        return EXIT_ABORT, summary

    rows = records(traj, workers=workers, convex_tol=cfg.monitors.convex_tol)
    write_csv(run_dir / "monitors.csv", rows)
    if cfg.run.snapshots:
        _snapshots(run_dir, traj)

    mon, tol = cfg.monitors, cfg.tolerances
    final = traj[-1]
    obs: dict = {"t_end": final.time, "steps": final.step_count, "offset": final.offset}
    obs["hessian_range"] = hessian_range(rows)
    if mon.t0 > 0:
        obs["hessian_range_after_t0"] = hessian_range(rows, mon.t0)

    if cfg.initial.kind == "quadratic":
        drift = abs(final.offset - final.time * theta(u0.background))
        phi = float(np.abs(final.field.values).max())
        obs["offset_drift"] = drift
        _assert(summary, "constant_hessian", drift <= tol.offset and phi <= tol.offset, offset_drift=drift, phi_sup=phi)

    if mon.max_principle and len(rows) >= 2:
        rep = max_principle_audit(rows, mon.t0)
        obs["max_principle"] = asdict(rep)
        _assert(summary, "max_principle", rep.ok(tol.max_principle), worst=rep.worst(), tol=tol.max_principle)

    if mon.decay:
        dec = decay_audit(rows, max(mon.t0, 0.0))
        obs["C3"] = dec.constant
        _assert(summary, "decay_bounded", dec.bounded, constant=dec.constant)
        a_vals = [r.scaled_a for r in rows if r.t > 0 and r.t >= mon.t0]
        obs["A_constant"] = max(a_vals) if a_vals else 0.0

    if mon.holder:
        obs["holder_C"] = holder_audit(traj, mon.holder_t_cap)

    if mon.convexity:
        m = convexity_audit(rows)
        obs["lambda_min_run"] = m
        _assert(summary, "convexity", m >= -tol.convexity, lambda_min=m)

    if mon.split:
        r0 = rows[0].split_residual_max
        r1 = rows[-1].split_residual_max
        obs["split_residual"] = {"initial": r0, "final": r1}
        _assert(summary, "split", r1 <= max(10 * r0, tol.split), initial=r0, final=r1)

    if mon.ty_ii:
        pinched = [r for r in rows if max(abs(r.lambda_min), abs(r.lambda_max)) <= SQRT3]
        _assert(summary, "ty_ii_cross_check", all(r.ty_ii_ok for r in pinched), samples=len(pinched))

    if tol.hessian_bound is not None:
        lo, hi = obs.get("hessian_range_after_t0", obs["hessian_range"])
        b = float(tol.hessian_bound)
        _assert(summary, "hessian_bound", -b <= lo and hi <= b, bound=b, range=[lo, hi])

    if tol.theta_floor is not None:
        worst = min(r.theta_min for r in rows)
        _assert(summary, "theta_floor", worst >= float(tol.theta_floor), theta_min=worst, floor=float(tol.theta_floor))

    obs["osc_grad"] = {"initial": rows[0].osc_grad, "final": rows[-1].osc_grad}
    summary["observed"] = obs
    summary["passed"] = all(a["passed"] for a in summary["assertions"].values())
    write_summary(run_dir / "summary.json", summary)
    return (EXIT_OK if summary["passed"] else EXIT_ASSERT), summary


def _run_gmcf(cfg, u0, stepper, run_dir, summary):
    f0 = VectorField.gradient_of(u0)
    try:
        traj = gmcf_evolve(f0, stepper)
    except FlowAbort as exc:
        summary["abort"] = {"message": str(exc), "snapshot": None}
        write_summary(run_dir / "summary.json", summary)
        return EXIT_ABORT, summary
    curls = [curl_residual(s.field) for s in traj]
    with open(run_dir / "gmcf.csv", "w") as fh:
        fh.write("t,curl_residual\n")
        for s, c in zip(traj, curls):
            fh.write(f"{s.time:.17g},{c:.17g}\n")
    if cfg.run.snapshots:
        _snapshots(run_dir, traj)
    summary["observed"] = {"t_end": traj[-1].time, "curl_max": max(curls)}
    summary["passed"] = all(a["passed"] for a in summary["assertions"].values())
    write_summary(run_dir / "summary.json", summary)
    return (EXIT_OK if summary["passed"] else EXIT_ASSERT), summary


def run_pipeline(cfg: ScenarioConfig, workers: int = 1) -> tuple[int, dict]:
    run_dir = output_dir(cfg)
    run_dir.mkdir(parents=True, exist_ok=True)
    grid = cfg.grid.build()
    u0 = cfg.initial.build(grid)
    summary: dict = {"config": cfg.source, "initial_check": verify_initial(cfg, u0)}
    p = cfg.pipeline
    pcfg = PipelineConfig(sigma0=float(p.sigma0), k=float(p.k), eta=float(p.eta), audit_tol=cfg.tolerances.max_principle)
    try:
        res = pipeline_supercritical(u0, stepper_config(cfg, abort_dir=run_dir), pcfg)
    except RotationError as exc:
        summary.update(passed=False, error=str(exc))
        write_summary(run_dir / "summary.json", summary)
        return EXIT_ABORT, summary
    except FlowAbort as exc:
        summary.update(passed=False, error=str(exc), snapshot=str(exc.snapshot) if exc.snapshot else None)
        write_summary(run_dir / "summary.json", summary)
        return EXIT_ABORT, summary
    write_csv(run_dir / "monitors.csv", res.rows)
    if cfg.run.snapshots:
        _snapshots(run_dir, res.trajectory)
        write_snapshot(run_dir / "final_original.txt", res.final_original, res.trajectory[-1].time)
    summary.update(res.summary())
    summary["passed"] = bool(summary["passed"] and summary["initial_check"]["passed"])
    write_summary(run_dir / "summary.json", summary)
    return (EXIT_OK if summary["passed"] else EXIT_ASSERT), summary
