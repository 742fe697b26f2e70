"""Periodic grids, potential fields with a quadratic background, and
fourth-order centered finite differences.

A potential is stored as ``u(x) = x.S.x/2 + phi(x)`` where ``S`` is a constant
symmetric matrix and ``phi`` is periodic on the fundamental domain
``[0, L_1) x ... x [0, L_n)``. Derivatives of order one and two pick up the
background exactly; third derivatives only see ``phi``.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

MIN_POINTS = 16
MAX_DIM = 3


@dataclass(frozen=True)
class Grid:
    points: tuple[int, ...]
    lengths: tuple[float, ...]

    def __post_init__(self):
        points = tuple(int(p) for p in self.points)
        lengths = tuple(float(l) for l in self.lengths)
        if not 1 <= len(points) <= MAX_DIM:
            raise ValueError(f"dimension must be 1..{MAX_DIM}, got {len(points)}")
        if len(lengths) != len(points):
            raise ValueError("points and lengths must have the same dimension")
        if any(p < MIN_POINTS for p in points):
            raise ValueError(f"need at least {MIN_POINTS} points per axis, got {points}")
        if any(not np.isfinite(l) or l <= 0 for l in lengths):
            raise ValueError(f"lengths must be positive, got {lengths}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def uniform(cls, n: int, points: int, length: float = 2 * np.pi) -> "Grid":
        return cls((points,) * n, (length,) * n)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(l / p for l, p in zip(self.lengths, self.points))

    @property
    def size(self) -> int:
        return int(np.prod(self.points))

    def axes(self) -> list[np.ndarray]:
        return [np.arange(p) * h for p, h in zip(self.points, self.spacing)]

    def coords(self) -> np.ndarray:
        """Grid coordinates, shape ``shape + (n,)``."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)


def _as_background(background, n: int) -> np.ndarray:
    if background is None:
        return np.zeros((n, n))
    S = np.array(background, dtype=float)
    if S.ndim == 0:
        S = S * np.eye(n)
    S = S.reshape(n, n)
    if not np.allclose(S, S.T, rtol=0, atol=1e-14 * (1 + np.abs(S).max())):
        raise ValueError("background matrix must be symmetric")
    return 0.5 * (S + S.T)


@dataclass
class ScalarField:
    """``u(x) = x.S.x/2 + phi(x)`` on a periodic grid; ``values`` holds ``phi``."""

    grid: Grid
    background: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.background = _as_background(self.background, self.grid.n)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            if self.values.size != self.grid.size:
                raise ValueError(
                    f"values have {self.values.size} entries, grid has {self.grid.size}"
                )
            self.values = self.values.reshape(self.grid.shape)

    @classmethod
    def zeros(cls, grid: Grid, background=None) -> "ScalarField":
        return cls(grid, background, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid: Grid, func, background=None, gauge: bool = True):
        """Sample the periodic part ``func(*axes_mesh)`` on the grid."""
        mesh = np.meshgrid(*grid.axes(), indexing="ij")
        values = np.broadcast_to(np.asarray(func(*mesh), dtype=float), grid.shape).copy()
        f = cls(grid, background, values)
        return f.gauged() if gauge else f

    def gauged(self) -> "ScalarField":
        return ScalarField(self.grid, self.background, self.values - self.values.mean())

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.background.copy(), self.values.copy())

    def background_values(self) -> np.ndarray:
        x = self.grid.coords()
        return 0.5 * np.einsum("...i,ij,...j->...", x, self.background, x)

    def full_values(self) -> np.ndarray:
        return self.background_values() + self.values


@dataclass
class VectorField:
    """``f(x) = S x + p(x)`` with ``p`` periodic; ``values`` holds ``p`` with
    shape ``grid.shape + (n,)``."""

    grid: Grid
    background: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        n = self.grid.n
        self.background = np.array(self.background, dtype=float).reshape(n, n)
        self.values = np.asarray(self.values, dtype=float).reshape(self.grid.shape + (n,))

    @classmethod
    def gradient_of(cls, field: ScalarField) -> "VectorField":
        return cls(field.grid, field.background.copy(), periodic_gradient(field))

    def full_values(self) -> np.ndarray:
        x = self.grid.coords()
        return np.einsum("ij,...j->...i", self.background, x) + self.values

    def copy(self) -> "VectorField":
        return VectorField(self.grid, self.background.copy(), self.values.copy())


# ---------------------------------------------------------------------------
# stencils


def _wrap_pad(a: np.ndarray, axis: int, width: int = 2) -> np.ndarray:
    n = a.shape[axis]
    idx = np.arange(-width, n + width) % n
    return np.take(a, idx, axis=axis)


def _slab(p: np.ndarray, axis: int, shift: int, n: int) -> np.ndarray:
    sl = [slice(None)] * p.ndim
    sl[axis] = slice(2 + shift, 2 + shift + n)
    return p[tuple(sl)]


def d1(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Fourth-order centered first difference with periodic wrap."""
    n = a.shape[axis]
    p = _wrap_pad(a, axis)
    return (
        8.0 * (_slab(p, axis, 1, n) - _slab(p, axis, -1, n))
        - (_slab(p, axis, 2, n) - _slab(p, axis, -2, n))
    ) / (12.0 * h)


def d2(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Fourth-order centered second difference with periodic wrap."""
    n = a.shape[axis]
    p = _wrap_pad(a, axis)
    return (
        16.0 * (_slab(p, axis, 1, n) + _slab(p, axis, -1, n))
        - (_slab(p, axis, 2, n) + _slab(p, axis, -2, n))
        - 30.0 * a
    ) / (12.0 * h * h)


def _apply_multi_index(a: np.ndarray, index: Sequence[int], spacing) -> np.ndarray:
    out = a
    for axis, count in sorted(Counter(index).items()):
        h = spacing[axis]
        if count == 1:
            out = d1(out, axis, h)
        elif count == 2:
            out = d2(out, axis, h)
        else:
            out = d1(d2(out, axis, h), axis, h)
    return out


def derivative(field: ScalarField, index: Sequence[int] = ()) -> np.ndarray:
    """Partial derivative of the full potential for a multi-index of axes.

    ``index=(0, 0, 1)`` is ``u_xxy``. Orders 1 and 2 include the exact
    contribution of the quadratic background; order 3 sees only ``phi``.
    """
    index = tuple(int(i) for i in index)
    if len(index) > 3:
        raise ValueError(f"derivative order {len(index)} > 3 not supported")
    n = field.grid.n
    if any(i < 0 or i >= n for i in index):
        raise ValueError(f"multi-index {index} out of range for dimension {n}")
    if not index:
        return field.full_values()
    out = _apply_multi_index(field.values, index, field.grid.spacing)
    if len(index) == 1:
        x = field.grid.coords()
        out = out + x @ field.background[index[0]]
    elif len(index) == 2:
        out = out + field.background[index[0], index[1]]
    return out


def periodic_gradient(field: ScalarField) -> np.ndarray:
    """``D phi`` (periodic part of ``Du``), shape ``grid.shape + (n,)``."""
    h = field.grid.spacing
    return np.stack([d1(field.values, i, h[i]) for i in range(field.grid.n)], axis=-1)


def gradient(field: ScalarField) -> np.ndarray:
    x = field.grid.coords()
    return periodic_gradient(field) + x @ field.background


def periodic_hessian(values: np.ndarray, spacing) -> np.ndarray:
    n = values.ndim
    H = np.empty(values.shape + (n, n))
    for i in range(n):
        H[..., i, i] = d2(values, i, spacing[i])
        first = d1(values, i, spacing[i])
        for j in range(i + 1, n):
            H[..., i, j] = H[..., j, i] = d1(first, j, spacing[j])
    return H


def hessian(field: ScalarField) -> np.ndarray:
    """Per-point ``S + D^2 phi``, shape ``grid.shape + (n, n)``."""
    return periodic_hessian(field.values, field.grid.spacing) + field.background


def third_derivatives(field: ScalarField) -> np.ndarray:
    """Full tensor ``u_ijk``, shape ``grid.shape + (n, n, n)``."""
    n = field.grid.n
    out = np.empty(field.grid.shape + (n, n, n))
    done = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                key = tuple(sorted((i, j, k)))
                if key not in done:
                    done[key] = _apply_multi_index(field.values, key, field.grid.spacing)
                out[..., i, j, k] = done[key]
    return out


def sup_norm(values) -> float:
    return float(np.max(np.abs(values))) if np.size(values) else 0.0


def oscillation(values) -> float:
    values = np.asarray(values)
    return float(values.max() - values.min()) if values.size else 0.0


# ---------------------------------------------------------------------------
# snapshot files


def _header(grid: Grid, background, time: float, offset: float, kind: str) -> str:
    return json.dumps(
        {
            "kind": kind,
            "n": grid.n,
            "N": list(grid.points),
            "lengths": [float(l) for l in grid.lengths],
            "background": [float(v) for v in np.asarray(background).ravel()],
            "time": float(time),
            "offset": float(offset),
        }
    )


def write_snapshot(path, field, time: float = 0.0, offset: float = 0.0) -> Path:
    """Write a ScalarField or VectorField: JSON header line, then one CSV row
    per grid point in row-major order, 17 significant digits."""
    path = Path(path)
    kind = "vector" if isinstance(field, VectorField) else "scalar"
    rows = field.values.reshape(field.grid.size, -1)
    with open(path, "w") as fh:
        fh.write(_header(field.grid, field.background, time, offset, kind) + "\n")
        for row in rows:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")
    return path


def read_snapshot(path):
    """Returns ``(field, time, offset)``."""
    with open(path) as fh:
        header = json.loads(fh.readline())
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    grid = Grid(tuple(header["N"]), tuple(header["lengths"]))
    n = grid.n
    S = np.array(header["background"], dtype=float).reshape(n, n)
    if header.get("kind", "scalar") == "vector":
        field = VectorField(grid, S, data.reshape(grid.shape + (n,)))
    else:
        field = ScalarField(grid, S, data.reshape(grid.shape))
    return field, float(header["time"]), float(header["offset"])
