"""Initial potentials. Every builder checks the pointwise property it
advertises on the grid before returning."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .grid import Grid, ScalarField
from .monitors import hessian_extrema, phase_extrema, split_residuals


class BuilderError(ValueError):
    pass


def quadratic(grid: Grid, S) -> ScalarField:
    return ScalarField.zeros(grid, S)


def trig(
    grid: Grid,
    amplitudes: Sequence[float],
    wavenumbers: Sequence,
    phases: Sequence[float] | None = None,
    S=None,
    hessian_range: tuple[float, float] | None = None,
) -> ScalarField:
    """``phi(x) = sum_m a_m cos(k_m . x + p_m)`` with integer wave vectors
    relative to the period (``k_m`` in units of ``2 pi / L``)."""
    n = grid.n
    amplitudes = list(amplitudes)
    phases = [0.0] * len(amplitudes) if phases is None else list(phases)
    waves = [np.atleast_1d(np.asarray(k, dtype=float)) for k in wavenumbers]
    if not len(waves) == len(amplitudes) == len(phases):
        raise BuilderError("amplitudes, wavenumbers and phases must have equal length")
    if any(k.size != n for k in waves):
        raise BuilderError(f"each wave vector needs {n} components")

    def phi(*x):
        out = 0.0
        for a, k, p in zip(amplitudes, waves, phases):
            arg = sum(2 * np.pi * kj / L * xj for kj, L, xj in zip(k, grid.lengths, x))
            out = out + a * np.cos(arg + p)
        return out

    field = ScalarField.from_function(grid, phi, S)
    if hessian_range is not None:
        lo, hi = hessian_extrema(field)
        if lo < hessian_range[0] or hi > hessian_range[1]:
            raise BuilderError(f"Hessian range [{lo}, {hi}] outside advertised {hessian_range}")
    return field


def c11_squarewave(grid: Grid, a: float, S=None) -> ScalarField:
    """1D potential with ``u'' = a`` on the first half period and ``-a`` on
    the second: ``u'`` is a triangle wave and ``u`` is piecewise quadratic,
    ``C^{1,1}`` but not ``C^2``."""
    if grid.n != 1:
        raise BuilderError("square-wave data is one-dimensional")
    L = grid.lengths[0]
    half = L / 2

    def phi(x):
        x = np.mod(x, L)
        first = a * (x**2 / 2 - half * x / 2)
        second = a * (3 * half * x / 2 - x**2 / 2) - a * half**2
        return np.where(x < half, first, second)

    return ScalarField.from_function(grid, phi, S)


def supercritical(
    grid: Grid,
    c: float = 1.2,
    eps: float = 0.3,
    margin: float = 0.05,
    max_halvings: int = 30,
) -> ScalarField:
    """Two-dimensional data ``c |x|^2 / 2 + eps p(x)``, ``eps`` halved until
    the phase exceeds ``pi/2 + margin`` and the Hessian is positive
    semidefinite at every grid point."""
    if grid.n != 2:
        raise BuilderError("supercritical builder is two-dimensional")
    target = np.pi / 2 + margin
    if 2 * np.arctan(c) <= target:
        raise BuilderError(f"background phase 2 arctan({c}) does not exceed pi/2 + {margin}")
    kx, ky = (2 * np.pi / L for L in grid.lengths)

    def shape(x, y):
        return np.cos(kx * x) + np.cos(ky * y) + 0.5 * np.cos(kx * x - ky * y)

    base = ScalarField.from_function(grid, shape, c * np.eye(2))
    for _ in range(max_halvings):
        field = ScalarField(grid, base.background, eps * base.values)
        th_min, _ = phase_extrema(field)
        lam_min, _ = hessian_extrema(field)
        if th_min >= target and lam_min >= 0.0:
            return field
        eps *= 0.5
    raise BuilderError("could not satisfy the supercritical margin")


def split(
    grid: Grid,
    axes: Sequence[int] = (0,),
    amplitude: float = 0.1,
    wavenumber: int = 1,
    tol: float = 1e-10,
) -> ScalarField:
    """``sum_{e in axes} x_e^2 / 2 + amplitude * sin(k x_t)`` with ``x_t`` the
    first axis not in ``axes``."""
    n = grid.n
    axes = sorted(set(int(a) for a in axes))
    rest = [j for j in range(n) if j not in axes]
    if not axes or not rest:
        raise BuilderError("split data needs at least one split axis and one transverse axis")
    S = np.zeros((n, n))
    for e in axes:
        S[e, e] = 1.0
    t = rest[0]
    k = 2 * np.pi * wavenumber / grid.lengths[t]
    field = ScalarField.from_function(grid, lambda *x: amplitude * np.sin(k * x[t]), S)
    res = split_residuals(field)
    for e in axes:
        if res[e][0] > tol or abs(res[e][1] - 1.0) > tol:
            raise BuilderError(f"axis {e} is not split: residual {res[e][0]}")
    return field
