"""Method-of-lines integration of ``u_t = sum_i arctan(lambda_i(D^2 u))`` and of
the first-order gradient system ``f^a_t = g^{ij}(f) f^a_{ij}``.

The spatial mean of each potential update is moved into a scalar offset so
the periodic part stays zero-mean; the offset carries the drift
(``t * theta(S)`` for quadratic data).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .grid import Grid, ScalarField, VectorField, d1, d2, hessian, periodic_hessian, write_snapshot
from .symmat import metric_inverse_field, theta_field

log = logging.getLogger(__name__)

STENCIL_SYMBOL = 4.0 / 3.0


class FlowAbort(RuntimeError):
    """Non-finite values appeared during a step."""

    def __init__(self, message: str, snapshot: Path | None = None):
        super().__init__(message)
        self.snapshot = snapshot


@dataclass
class FlowState:
    field: ScalarField
    time: float = 0.0
    offset: float = 0.0
    step_count: int = 0
    last_dt: float = 0.0

    def copy(self) -> "FlowState":
        return replace(self, field=self.field.copy())

    def full_values(self) -> np.ndarray:
        return self.field.full_values() + self.offset


@dataclass
class StepperConfig:
    t_end: float
    cadence: float | None = None
    cfl_safety: float = 0.5
    scheme: str = "ssprk3"
    sample_times: Sequence[float] | None = None
    abort_dir: Path | None = None

    def __post_init__(self):
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError(f"cfl_safety must be in (0, 1], got {self.cfl_safety}")
        if self.t_end < 0:
            raise ValueError("t_end must be >= 0")
        if self.cadence is not None and self.cadence <= 0:
            raise ValueError("cadence must be positive")
        if self.scheme != "ssprk3":
            raise ValueError(f"unknown scheme {self.scheme!r}")

    def output_times(self) -> list[float]:
        times = {0.0, float(self.t_end)}
        if self.cadence is not None:
            k = 1
            while k * self.cadence < self.t_end * (1 - 1e-12):
                times.add(k * self.cadence)
                k += 1
        if self.sample_times is not None:
            times.update(float(t) for t in self.sample_times if 0.0 <= t <= self.t_end)
        return sorted(times)


def rhs_potential(field: ScalarField) -> np.ndarray:
    """Pointwise ``theta(D^2 u)``."""
    return theta_field(hessian(field))


def cfl_dt(grid_or_field, safety: float = 1.0) -> float:
    """``safety * min(h^2) / (2 n c)`` with ``c = 4/3`` the bound of the
    fourth-order second-difference symbol; the diffusion symbol ``g^{-1}`` is
    at most the identity, so the bound is data-independent."""
    grid = grid_or_field.grid if hasattr(grid_or_field, "grid") else grid_or_field
    if not 0.0 < safety <= 1.0:
        raise ValueError(f"safety must be in (0, 1], got {safety}")
    h2 = min(h * h for h in grid.spacing)
    return safety * h2 / (2 * grid.n * STENCIL_SYMBOL)


def _ssprk3(y, dt, L):
    """Shu-Osher form of the three-stage third-order SSP Runge-Kutta scheme on
    a tuple of arrays/scalars."""
    k0 = L(y)
    y1 = tuple(a + dt * b for a, b in zip(y, k0))
    k1 = L(y1)
    y2 = tuple(0.75 * a + 0.25 * (b + dt * c) for a, b, c in zip(y, y1, k1))
    k2 = L(y2)
    return tuple(a / 3.0 + 2.0 / 3.0 * (b + dt * c) for a, b, c in zip(y, y2, k2))


def _abort(state: FlowState, message: str, abort_dir) -> FlowAbort:
    path = None
    if abort_dir is not None:
        abort_dir = Path(abort_dir)
        abort_dir.mkdir(parents=True, exist_ok=True)
        path = write_snapshot(abort_dir / "abort_snapshot.txt", state.field, state.time, state.offset)
    return FlowAbort(f"{message} at t={state.time:.6g} (step {state.step_count})", path)


def step(state: FlowState, dt: float, abort_dir=None) -> FlowState:
    """One SSP-RK3 step of the potential equation."""
    grid = state.field.grid
    S = state.field.background
    spacing = grid.spacing
    if dt > cfl_dt(grid, 1.0) * (1 + 1e-12):
        raise ValueError(f"dt={dt} exceeds the stability bound {cfl_dt(grid, 1.0)}")

    def L(y):
        r = theta_field(periodic_hessian(y[0], spacing) + S)
        if not np.all(np.isfinite(r)):
            raise _abort(state, "non-finite right-hand side", abort_dir)
        m = r.mean()
        return (r - m, m)

    phi, c = _ssprk3((state.field.values, state.offset), dt, L)
    if not (np.all(np.isfinite(phi)) and math.isfinite(c)):
        raise _abort(state, "non-finite state", abort_dir)
    phi = phi - phi.mean()
    return FlowState(
        ScalarField(grid, S, phi),
        time=state.time + dt,
        offset=float(c),
        step_count=state.step_count + 1,
        last_dt=dt,
    )


def _march(state, config: StepperConfig, stepper, hooks):
    dt_max = cfl_dt(state.field.grid, config.cfl_safety)
    out = [state]
    for hook in hooks:
        hook(state)
    targets = config.output_times()[1:]
    for target in targets:
        while state.time < target:
            remaining = target - state.time
            if remaining <= 1e-14 * max(1.0, target):
                break
            n_sub = max(1, math.ceil(remaining / dt_max - 1e-9))
            dt = remaining / n_sub
            state = stepper(state, dt)
            if n_sub == 1:
                # land exactly on the output time
                state = replace(state, time=target)
        for hook in hooks:
            hook(state)
        out.append(state)
        log.debug("t=%.6g steps=%d", state.time, state.step_count)
    return out


def evolve(u0: ScalarField, config: StepperConfig, hooks: Sequence[Callable] = ()) -> list[FlowState]:
    """Advance to ``config.t_end``; returns the states at the output times
    (always including ``t = 0`` and ``t_end``)."""
    state = FlowState(u0.gauged() if abs(u0.values.mean()) > 0 else u0.copy())
    return _march(state, config, lambda s, dt: step(s, dt, config.abort_dir), hooks)


# ---------------------------------------------------------------------------
# gradient system


@dataclass
class GradientState:
    field: VectorField
    time: float = 0.0
    step_count: int = 0
    last_dt: float = 0.0


def _jacobian(p: np.ndarray, S: np.ndarray, spacing) -> np.ndarray:
    """``J[..., a, i] = d f^a / d x_i``."""
    n = p.shape[-1]
    J = np.empty(p.shape + (n,))
    for a in range(n):
        for i in range(n):
            J[..., a, i] = d1(p[..., a], i, spacing[i])
    return J + S


def rhs_gradient_system(p: np.ndarray, S: np.ndarray, spacing) -> np.ndarray:
    """``g^{ij}(f) f^a_{ij}`` with ``g = I + J^T J``."""
    n = p.shape[-1]
    J = _jacobian(p, S, spacing)
    if n == 1:
        return d2(p[..., 0], 0, spacing[0])[..., None] / (1.0 + J[..., 0, 0] ** 2)[..., None]
    out = np.empty_like(p)
    if n == 2:
        # closed-form 2x2 metric and inverse
        J00, J01, J10, J11 = J[..., 0, 0], J[..., 0, 1], J[..., 1, 0], J[..., 1, 1]
        g00 = 1.0 + J00 * J00 + J10 * J10
        g01 = J00 * J01 + J10 * J11
        g11 = 1.0 + J01 * J01 + J11 * J11
        det = g00 * g11 - g01 * g01
        for a in range(2):
            Ha = periodic_hessian(p[..., a], spacing)
            out[..., a] = (g11 * Ha[..., 0, 0] - 2.0 * g01 * Ha[..., 0, 1] + g00 * Ha[..., 1, 1]) / det
        return out
    g_inv = np.linalg.inv(np.eye(n) + np.einsum("...ai,...aj->...ij", J, J))
    for a in range(n):
        Ha = periodic_hessian(p[..., a], spacing)
        out[..., a] = np.einsum("...ij,...ij->...", g_inv, Ha)
    return out


def gmcf_step(state: GradientState, dt: float) -> GradientState:
    f = state.field
    spacing = f.grid.spacing

    def L(y):
        r = rhs_gradient_system(y[0], f.background, spacing)
        if not np.all(np.isfinite(r)):
            raise FlowAbort(f"non-finite gradient-system update at t={state.time:.6g}")
        return (r,)

    (p,) = _ssprk3((f.values,), dt, L)
    return GradientState(
        VectorField(f.grid, f.background, p),
        time=state.time + dt,
        step_count=state.step_count + 1,
        last_dt=dt,
    )


def gmcf_evolve(f0: VectorField, config: StepperConfig, hooks: Sequence[Callable] = ()) -> list[GradientState]:
    return _march(GradientState(f0.copy()), config, gmcf_step, hooks)


def curl_residual(f: VectorField) -> float:
    """Sup of ``|d_i f^j - d_j f^i|`` over the grid (0 in one dimension)."""
    n = f.grid.n
    h = f.grid.spacing
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            c = d1(f.values[..., j], i, h[i]) - d1(f.values[..., i], j, h[j])
            worst = max(worst, float(np.abs(c).max()))
    return worst
