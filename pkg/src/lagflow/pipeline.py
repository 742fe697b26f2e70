"""Supercritical-phase pipeline: small rotation, heat-kernel approximation,
quarter-turn rotation into the pinched regime, evolution with a phase
audit, and rotation back to the original coordinates.

Each stage records whether its cone/window assertion held.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .flow import FlowState, StepperConfig, evolve
from .grid import ScalarField
from .mollify import mollify
from .monitors import hessian_extrema, phase_extrema, records
from .rotate import rotate_with_info, spectral_identity_error

log = logging.getLogger(__name__)


@dataclass
class StageResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)


@dataclass
class PipelineResult:
    stages: list[StageResult]
    trajectory: list[FlowState]
    rows: list
    final_original: ScalarField | None = None

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.stages)

    def summary(self) -> dict:
        return {
            "passed": self.passed,
            "stages": [{"name": s.name, "passed": s.passed, **s.details} for s in self.stages],
        }


@dataclass
class PipelineConfig:
    sigma0: float = 0.05
    k: float = 16.0
    eta: float = 0.05
    cone_tol: float = 1e-12
    mollify_tol: float = 1e-10
    rotation_tol: float = 5e-5
    audit_tol: float = 1e-6


def _rotate_stage(name, field, sigma, threshold, cfg: PipelineConfig):
    rotated, info = rotate_with_info(field, sigma)
    ident = spectral_identity_error(field, rotated, info)
    th_min, th_max = phase_extrema(rotated)
    lam = hessian_extrema(rotated)
    ok = ident <= cfg.rotation_tol and th_min >= threshold - cfg.rotation_tol
    details = {
        "sigma": sigma,
        "spectral_identity_error": ident,
        "curl_residual": info.curl_residual,
        "theta_min": th_min,
        "threshold": threshold,
        "lambda_min": lam[0],
        "lambda_max": lam[1],
    }
    return rotated, StageResult(name, bool(ok), details)


def pipeline_supercritical(u0: ScalarField, stepper: StepperConfig, cfg: PipelineConfig | None = None) -> PipelineResult:
    cfg = cfg or PipelineConfig()
    n = u0.grid.n
    base = (n - 1) * np.pi / 2
    stages: list[StageResult] = []

    th0, _ = phase_extrema(u0)
    stages.append(StageResult("input", th0 >= base - cfg.cone_tol, {"theta_min": th0, "threshold": base}))

    # small rotation: phase drops by n * sigma0
    tau1 = base - n * cfg.sigma0
    if cfg.sigma0 != 0.0:
        v0, st = _rotate_stage("small_rotation", u0, cfg.sigma0, tau1, cfg)
        stages.append(st)
    else:
        v0 = u0
    v_min, _ = phase_extrema(v0)

    # heat-kernel approximation keeps the Hessian in the (convex) cone
    vk = mollify(v0, cfg.k)
    vk_min, _ = phase_extrema(vk)
    ok = vk_min >= v_min - cfg.mollify_tol and vk_min >= tau1 - cfg.mollify_tol
    stages.append(
        StageResult(
            "mollify",
            bool(ok),
            {"k": cfg.k, "theta_min_before": v_min, "theta_min_after": vk_min, "threshold": tau1},
        )
    )

    # quarter turn lands in the pinched regime
    tau2 = tau1 - n * np.pi / 4
    w0, st = _rotate_stage("quarter_rotation", vk, np.pi / 4, tau2, cfg)
    lo, hi = st.details["lambda_min"], st.details["lambda_max"]
    in_window = -(1 + cfg.eta) <= lo and hi <= 1 + cfg.eta
    st.details["pinching_window"] = 1 + cfg.eta
    st.passed = bool(st.passed and in_window)
    stages.append(st)

    traj = evolve(w0, stepper)
    rows = records(traj)
    worst = min(r.theta_min for r in rows)
    stages.append(
        StageResult(
            "evolve",
            bool(worst >= tau2 - cfg.audit_tol),
            {"theta_min": worst, "threshold": tau2, "t_end": stepper.t_end},
        )
    )

    # back to the original frame
    back = traj[-1].field
    total = np.pi / 4 + cfg.sigma0
    u_end, info = rotate_with_info(back, -np.pi / 4)
    if cfg.sigma0 != 0.0:
        u_end, info = rotate_with_info(u_end, -cfg.sigma0)
    th_end, _ = phase_extrema(u_end)
    stages.append(
        StageResult(
            "rotate_back",
            bool(th_end >= base - cfg.rotation_tol),
            {"sigma": -total, "theta_min": th_end, "threshold": base},
        )
    )
    for s in stages:
        log.info("stage %s: %s", s.name, "ok" if s.passed else "FAILED")
    return PipelineResult(stages, traj, rows, u_end)
