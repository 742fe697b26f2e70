"""Diagnostics evaluated along trajectories: Hessian spectrum and phase
extrema, maximum-principle audits, derivative decay, time-Holder ratios,
second fundamental form, splitting detection and the matrix side
conditions.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .grid import ScalarField, hessian, oscillation, periodic_gradient, third_derivatives
from .symmat import eigvals_field, metric_inverse_field, theta_field, ty_condition_ii_field

CSV_COLUMNS = (
    "t",
    "lambda_min",
    "lambda_max",
    "theta_min",
    "theta_max",
    "sup_d3_sq",
    "scaled_d3",
    "holder_ratio",
    "a_sq_max",
    "scaled_a",
    "osc_grad",
    "ty_ii_ok",
    "convex_ok",
    "split_residual_max",
)


@dataclass
class MonitorRecord:
    t: float
    lambda_min: float
    lambda_max: float
    theta_min: float
    theta_max: float
    sup_d3_sq: float
    scaled_d3: float
    holder_ratio: float
    a_sq_max: float
    scaled_a: float
    osc_grad: float
    ty_ii_ok: bool
    convex_ok: bool
    split_residuals: tuple[float, ...] = ()

    @property
    def split_residual_max(self) -> float:
        # residual of the best-split axis (the grid sup is already inside each entry)
        return min(self.split_residuals) if self.split_residuals else math.nan

    def row(self) -> list[str]:
        vals = asdict(self)
        vals["split_residual_max"] = self.split_residual_max
        out = []
        for col in CSV_COLUMNS:
            v = vals[col]
            out.append(str(int(v)) if isinstance(v, (bool, np.bool_)) else format(float(v), ".17g"))
        return out


def hessian_extrema(field: ScalarField) -> tuple[float, float]:
    lam = eigvals_field(hessian(field))
    return float(lam[..., 0].min()), float(lam[..., -1].max())


def phase_extrema(field: ScalarField) -> tuple[float, float]:
    th = theta_field(hessian(field))
    return float(th.min()), float(th.max())


def sup_d3_sq(field: ScalarField) -> float:
    """``sup_x sum_{ijk} u_ijk^2``."""
    T = third_derivatives(field)
    n = field.grid.n
    return float((T.reshape(field.grid.shape + (n**3,)) ** 2).sum(-1).max())


def curvature_norm(field: ScalarField) -> tuple[np.ndarray, float]:
    """``|A|^2 = g^{il} g^{jm} g^{kp} u_ijk u_lmp`` with ``g = I + (D^2 u)^2``."""
    n = field.grid.n
    T = third_derivatives(field)
    G = metric_inverse_field(hessian(field))
    if n == 1:
        A2 = T[..., 0, 0, 0] ** 2 * G[..., 0, 0] ** 3
    else:
        A2 = np.einsum("...il,...jm,...kp,...ijk,...lmp->...", G, G, G, T, T, optimize=True)
    return A2, float(A2.max())


def osc_grad(field: ScalarField) -> float:
    """Largest oscillation over components of the periodic part of ``Du``
    (the deviation of the graph from a plane)."""
    Dp = periodic_gradient(field)
    return max(oscillation(Dp[..., i]) for i in range(field.grid.n))


def split_residuals(field: ScalarField) -> tuple[tuple[float, float], ...]:
    """Per axis ``e``: ``(residual, mean u_ee)`` with residual the larger of
    ``osc(u_ee)`` and ``sup |u_ej|`` over ``j != e``."""
    H = hessian(field)
    n = field.grid.n
    out = []
    for e in range(n):
        diag = H[..., e, e]
        res = oscillation(diag)
        for j in range(n):
            if j != e:
                res = max(res, float(np.abs(H[..., e, j]).max()))
        out.append((res, float(diag.mean())))
    return tuple(out)


def splitting_detect(field: ScalarField, tol: float) -> list[tuple[int, float]]:
    """Coordinate directions along which ``u`` splits off a quadratic:
    ``u_ee`` constant and the mixed entries of row ``e`` vanishing, both
    within ``tol``. Returns ``(axis, pinned value)`` pairs."""
    if field.grid.n < 2:
        return []
    return [(e, val) for e, (res, val) in enumerate(split_residuals(field)) if res <= tol]


def ty_ii_all(field: ScalarField) -> bool:
    return bool(ty_condition_ii_field(hessian(field)).min() >= 0.0)


# ---------------------------------------------------------------------------
# records along a trajectory


def _grad_periodic(state) -> np.ndarray:
    return periodic_gradient(state.field)


def record(state, history: Sequence = (), convex_tol: float = 1e-6) -> MonitorRecord:
    """Monitor row for a flow state. ``history`` holds ``(t, Dphi)`` of
    earlier samples for the running time-Holder ratio."""
    f = state.field
    t = float(state.time)
    H = hessian(f)
    lam = eigvals_field(H)
    th = theta_field(H)
    d3 = sup_d3_sq(f)
    _, a2 = curvature_norm(f)
    Dp = periodic_gradient(f)
    ratio = 0.0
    for t_prev, D_prev in history:
        if t > t_prev:
            ratio = max(ratio, float(np.abs(Dp - D_prev).max()) / math.sqrt(t - t_prev))
    return MonitorRecord(
        t=t,
        lambda_min=float(lam[..., 0].min()),
        lambda_max=float(lam[..., -1].max()),
        theta_min=float(th.min()),
        theta_max=float(th.max()),
        sup_d3_sq=d3,
        scaled_d3=t * d3,
        holder_ratio=ratio,
        a_sq_max=a2,
        scaled_a=t * a2,
        osc_grad=max(oscillation(Dp[..., i]) for i in range(f.grid.n)),
        ty_ii_ok=bool(ty_condition_ii_field(H).min() >= 0.0),
        convex_ok=bool(lam[..., 0].min() >= -convex_tol),
        split_residuals=tuple(r for r, _ in split_residuals(f)),
    )


def records(trajectory: Sequence, workers: int = 1, convex_tol: float = 1e-6) -> list[MonitorRecord]:
    """Monitor rows for every sample; the result does not depend on ``workers``."""
    grads = [(float(s.time), _grad_periodic(s)) for s in trajectory]
    jobs = [(s, grads[:i]) for i, s in enumerate(trajectory)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda a: record(a[0], a[1], convex_tol), jobs))
    return [record(s, h, convex_tol) for s, h in jobs]


def write_csv(path, rows: Sequence[MonitorRecord]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(r.row())
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}


# ---------------------------------------------------------------------------
# audits


@dataclass
class MaxPrincipleReport:
    theta_min_drop: float
    theta_max_rise: float
    lambda_range_growth: float

    def worst(self) -> float:
        return max(self.theta_min_drop, self.theta_max_rise, self.lambda_range_growth)

    def ok(self, tol: float = 1e-6) -> bool:
        return self.worst() <= tol


def _after(rows: Sequence[MonitorRecord], t0: float) -> list[MonitorRecord]:
    return [r for r in rows if r.t >= t0]


def max_principle_audit(rows: Sequence[MonitorRecord], t0: float = 0.0) -> MaxPrincipleReport:
    """Largest drop of ``theta_min``, rise of ``theta_max`` and outward growth
    of the Hessian spectral interval between consecutive samples with
    ``t >= t0``."""
    rows = _after(rows, t0)
    if len(rows) < 2:
        raise ValueError("need at least two samples")
    drop = rise = grow = 0.0
    for a, b in zip(rows, rows[1:]):
        drop = max(drop, a.theta_min - b.theta_min)
        rise = max(rise, b.theta_max - a.theta_max)
        grow = max(grow, b.lambda_max - a.lambda_max, a.lambda_min - b.lambda_min)
    return MaxPrincipleReport(drop, rise, grow)


@dataclass
class DecayReport:
    constant: float
    bounded: bool
    values: np.ndarray
    peak_time: float = 0.0
    rebound: float = 0.0


def decay_audit(rows: Sequence[MonitorRecord], t0: float = 0.0) -> DecayReport:
    """Observed constant ``sup_t t * sup|D^3 u|^2`` over samples with
    ``t > 0`` and ``t >= t0``. ``rebound`` is the largest rise of the
    sequence above its running minimum after the peak; ``bounded`` means the
    rebound stays within 10% of the peak."""
    rows = [r for r in rows if r.t > 0 and r.t >= t0]
    vals = np.array([r.scaled_d3 for r in rows])
    if vals.size == 0:
        return DecayReport(0.0, True, vals)
    i = int(np.argmax(vals))
    tail = vals[i:]
    rebound = float((tail - np.minimum.accumulate(tail)).max())
    peak = float(vals[i])
    return DecayReport(peak, rebound <= 0.1 * peak, vals, rows[i].t, rebound)


def holder_audit(trajectory: Sequence, t_cap: float) -> float:
    """``sup over t' < t <= t_cap`` of ``|Du(t) - Du(t')|_inf / sqrt(t - t')``."""
    samples = [(float(s.time), periodic_gradient(s.field)) for s in trajectory if s.time <= t_cap]
    if not samples or samples[0][0] != 0.0:
        raise ValueError("trajectory must include the t = 0 sample")
    ratio = 0.0
    for i, (t, D) in enumerate(samples):
        for tp, Dp in samples[:i]:
            if t > tp:
                ratio = max(ratio, float(np.abs(D - Dp).max()) / math.sqrt(t - tp))
    return ratio


def convexity_audit(rows: Sequence[MonitorRecord]) -> float:
    """Smallest Hessian eigenvalue seen along the run."""
    return min(r.lambda_min for r in rows)


def hessian_range(rows: Sequence[MonitorRecord], t0: float = 0.0) -> tuple[float, float]:
    rows = _after(rows, t0)
    return min(r.lambda_min for r in rows), max(r.lambda_max for r in rows)
