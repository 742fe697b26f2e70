"""Lagrangian coordinate rotation ``z = exp(i sigma) w`` applied to graph
potentials.

A graph ``{(x, Du(x))}`` is rewritten in rotated coordinates as
``{(r, Dv(r))}`` with

    r(x) = cos(sigma) x + sin(sigma) Du(x)
    s(x) = -sin(sigma) x + cos(sigma) Du(x),   Dv(r(x)) = s(x).

Every Hessian eigenvalue transforms as ``tan(arctan(lambda) - sigma)``. On the
torus the period lattice is stretched by ``A = cos(sigma) I + sin(sigma) S``,
so only diagonal backgrounds (axis-aligned transformed lattices) are
supported in more than one dimension. The transformed fundamental domain is
re-gridded with the same number of points per axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, ScalarField, hessian, periodic_gradient, periodic_hessian
from .symmat import TAN_MARGIN, eigvals_field, rotate_spectrum

INTERP_POINTS = 8
NEWTON_MAX_ITER = 50
NEWTON_TOL = 1e-13


class RotationError(ValueError):
    pass


@dataclass
class RotationPlan:
    sigma: float
    field: ScalarField
    margin: float
    margin_location: tuple[float, ...]

    @property
    def graphical(self) -> bool:
        return self.margin > 0


@dataclass
class RotationInfo:
    plan: RotationPlan
    preimages: np.ndarray  # x(r) for every target grid point, shape grid.shape + (n,)
    newton_iterations: int
    curl_residual: float
    linear_drift: np.ndarray


def _jacobian_min_eig(field: ScalarField, sigma: float) -> np.ndarray:
    n = field.grid.n
    J = np.cos(sigma) * np.eye(n) + np.sin(sigma) * hessian(field)
    return eigvals_field(J)[..., 0]


def graph_condition_margin(field: ScalarField, sigma: float) -> float:
    """Min over the grid of ``lambda_min(cos(sigma) I + sin(sigma) D^2 u)``."""
    return float(_jacobian_min_eig(field, sigma).min())


def plan_rotation(field: ScalarField, sigma: float) -> RotationPlan:
    lam = _jacobian_min_eig(field, sigma)
    k = np.unravel_index(np.argmin(lam), lam.shape)
    loc = tuple(float(ax[i]) for ax, i in zip(field.grid.axes(), k))
    return RotationPlan(float(sigma), field, float(lam[k]), loc)


# ---------------------------------------------------------------------------
# periodic Lagrange interpolation


def _lagrange_weights(xi: np.ndarray, p: int) -> np.ndarray:
    w = np.ones(xi.shape + (p,))
    for m in range(p):
        for l in range(p):
            if l != m:
                w[..., m] *= (xi - l) / (m - l)
    return w


def periodic_interpolate(values: np.ndarray, grid: Grid, points: np.ndarray, p: int = INTERP_POINTS):
    """Tensor-product ``p``-point Lagrange interpolation of periodic data.

    ``values`` has shape ``grid.shape + trailing``; ``points`` has shape
    ``(M, n)``. Returns shape ``(M,) + trailing``.
    """
    n = grid.n
    points = np.atleast_2d(points)
    M = points.shape[0]
    idx, wts = [], []
    for axis in range(n):
        t = points[:, axis] / grid.spacing[axis]
        base = np.floor(t).astype(int) - (p // 2 - 1)
        xi = t - base
        idx.append((base[:, None] + np.arange(p)[None, :]) % grid.points[axis])
        wts.append(_lagrange_weights(xi, p))
    trailing = values.shape[n:]
    out = np.zeros((M,) + trailing)
    # gather the p^n stencil one axis-combination at a time
    for combo in np.ndindex(*(p,) * n):
        w = np.ones(M)
        sel = []
        for axis, c in enumerate(combo):
            w = w * wts[axis][:, c]
            sel.append(idx[axis][:, c])
        vals = values[tuple(sel)]
        out += w.reshape((M,) + (1,) * len(trailing)) * vals
    return out


# ---------------------------------------------------------------------------


def _check_background(S: np.ndarray, n: int):
    if n > 1 and np.abs(S - np.diag(np.diag(S))).max() > 0:
        raise RotationError("rotation on the torus needs a diagonal background in n > 1")


def _reconstruct_potential(grad: np.ndarray, grid: Grid):
    """Least-squares periodic potential with the given gradient (zero-mean
    gauge), via Fourier projection onto gradients. Returns
    ``(psi, curl_residual, mean_of_grad)``."""
    n = grid.n
    shape = grid.shape
    ks = np.meshgrid(
        *[2 * np.pi * np.fft.fftfreq(N, d=L / N) for N, L in zip(grid.points, grid.lengths)],
        indexing="ij",
    )
    ghat = [np.fft.fftn(grad[..., i]) for i in range(n)]
    k2 = sum(k * k for k in ks)
    k2[(0,) * n] = 1.0
    psi_hat = sum(-1j * k * g for k, g in zip(ks, ghat)) / k2
    psi_hat[(0,) * n] = 0.0
    psi = np.real(np.fft.ifftn(psi_hat))
    mean = np.array([g[(0,) * n].real / grid.size for g in ghat])
    resid = 0.0
    for i in range(n):
        back = np.real(np.fft.ifftn(1j * ks[i] * psi_hat))
        resid = max(resid, float(np.abs(grad[..., i] - mean[i] - back).max()))
    return psi.reshape(shape), resid, mean


def rotate_with_info(field: ScalarField, sigma: float):
    grid = field.grid
    n = grid.n
    S = field.background
    _check_background(S, n)
    plan = plan_rotation(field, sigma)
    if not plan.graphical:
        raise RotationError(
            f"graph condition fails for sigma={sigma}: margin {plan.margin:.3e} at x={plan.margin_location}"
        )
    H = hessian(field)
    lam = eigvals_field(H)
    angle = np.arctan(lam) - sigma
    if np.abs(angle).max() >= 0.5 * np.pi - TAN_MARGIN:
        raise RotationError(f"rotated eigenvalue angle within {TAN_MARGIN} of vertical")

    c, s = np.cos(sigma), np.sin(sigma)
    A = c * np.eye(n) + s * S
    B = c * S - s * np.eye(n)
    S_new = rotate_spectrum(S, sigma)
    new_grid = Grid(grid.points, tuple(A[i, i] * L for i, L in enumerate(grid.lengths)))

    Dphi = periodic_gradient(field)
    D2phi = periodic_hessian(field.values, grid.spacing)
    table = np.concatenate([Dphi, D2phi.reshape(grid.shape + (n * n,))], axis=-1)

    r = new_grid.coords().reshape(-1, n)
    x = np.linalg.solve(A, r.T).T
    tol = NEWTON_TOL * max(1.0, max(new_grid.lengths))
    iterations = 0
    for iterations in range(1, NEWTON_MAX_ITER + 1):
        vals = periodic_interpolate(table, grid, x)
        grad, hess = vals[:, :n], vals[:, n:].reshape(-1, n, n)
        F = x @ A.T + s * grad - r
        err = np.abs(F).max(axis=1)
        if err.max() <= tol:
            break
        J = A + s * hess
        dx = np.linalg.solve(J, F[..., None])[..., 0]
        alpha = np.ones(len(x))
        for _ in range(20):
            trial = x - alpha[:, None] * dx
            gt = periodic_interpolate(Dphi, grid, trial)
            Ft = trial @ A.T + s * gt - r
            worse = np.abs(Ft).max(axis=1) > err
            if not worse.any():
                break
            alpha = np.where(worse, 0.5 * alpha, alpha)
        x = trial
    else:
        raise RotationError(f"Newton inversion did not converge in {NEWTON_MAX_ITER} iterations")

    grad = periodic_interpolate(Dphi, grid, x)
    s_vals = x @ B.T + c * grad
    g = s_vals - r @ S_new.T
    psi, curl, drift = _reconstruct_potential(g.reshape(new_grid.shape + (n,)), new_grid)
    out = ScalarField(new_grid, S_new, psi - psi.mean())
    info = RotationInfo(plan, x.reshape(new_grid.shape + (n,)), iterations, curl, drift)
    return out, info


def rotate_field(field: ScalarField, sigma: float) -> ScalarField:
    return rotate_with_info(field, sigma)[0]


def spectral_identity_error(source: ScalarField, rotated: ScalarField, info: RotationInfo) -> float:
    """Max over target points of ``|arctan lambda_i(D^2 v)(r) - (arctan
    lambda_i(D^2 u)(x(r)) - sigma)|``, eigenvalues matched in sorted order."""
    n = source.grid.n
    sigma = info.plan.sigma
    Hu = periodic_interpolate(
        periodic_hessian(source.values, source.grid.spacing), source.grid, info.preimages.reshape(-1, n)
    ) + source.background
    Hv = hessian(rotated).reshape(-1, n, n)
    lhs = np.arctan(eigvals_field(Hv))
    rhs = np.arctan(eigvals_field(Hu)) - sigma
    return float(np.abs(lhs - rhs).max())


def phase_shift_error(source: ScalarField, rotated: ScalarField, info: RotationInfo) -> float:
    """Max of ``|theta(D^2 v)(r) - theta(D^2 u)(x(r)) + n sigma|``."""
    n = source.grid.n
    sigma = info.plan.sigma
    Hu = periodic_interpolate(
        periodic_hessian(source.values, source.grid.spacing), source.grid, info.preimages.reshape(-1, n)
    ) + source.background
    Hv = hessian(rotated).reshape(-1, n, n)
    th_v = np.arctan(eigvals_field(Hv)).sum(-1)
    th_u = np.arctan(eigvals_field(Hu)).sum(-1)
    return float(np.abs(th_v - th_u + n * sigma).max())
