"""Heat-kernel mollification on the periodic grid.

The kernel at time ``1/k`` is a Gaussian of variance ``2/k`` per axis,
wrapped onto the period by summing lattice images and sampled at the grid
offsets. Convolution acts on the periodic part only: the heat kernel fixes
the Hessian of a quadratic, so the background is carried through unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, ScalarField

IMAGE_TOL = 1e-17


def wrapped_gaussian_weights(points: int, length: float, variance: float) -> np.ndarray:
    """Normalized weights ``w[j]`` for offset ``j * h`` (indices mod ``points``)."""
    h = length / points
    j = np.arange(points)
    offsets = np.minimum(j, points - j) * h
    w = np.exp(-(offsets**2) / (2.0 * variance))
    m = 1
    while True:
        added = np.exp(-((offsets + m * length) ** 2) / (2.0 * variance)) + np.exp(
            -((offsets - m * length) ** 2) / (2.0 * variance)
        )
        w = w + added
        if added.max() < IMAGE_TOL:
            break
        m += 1
    return w / w.sum()


@dataclass
class MollifierKernel:
    k: float
    grid: Grid
    weights: tuple[np.ndarray, ...]

    @property
    def time(self) -> float:
        return 1.0 / self.k

    def matrix(self, axis: int) -> np.ndarray:
        """Circulant matrix ``C[i, j] = w[(i - j) mod N]`` for one axis."""
        w = self.weights[axis]
        n = w.size
        idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
        return w[idx]


def make_kernel(grid: Grid, k: float) -> MollifierKernel:
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    variance = 2.0 / k
    weights = tuple(
        wrapped_gaussian_weights(p, l, variance) for p, l in zip(grid.points, grid.lengths)
    )
    return MollifierKernel(float(k), grid, weights)


def convolve(field: ScalarField, kernel: MollifierKernel) -> ScalarField:
    """Separable periodic convolution of the periodic part."""
    if field.grid != kernel.grid:
        raise ValueError(f"grid mismatch: field {field.grid} vs kernel {kernel.grid}")
    out = field.values
    for axis in range(field.grid.n):
        C = kernel.matrix(axis)
        out = np.moveaxis(np.tensordot(C, out, axes=([1], [axis])), 0, axis)
    return ScalarField(field.grid, field.background.copy(), out)


def mollify(field: ScalarField, k: float) -> ScalarField:
    return convolve(field, make_kernel(field.grid, k))


def approx_sequence(field: ScalarField, ks) -> list[ScalarField]:
    """Mollified approximants for an increasing list of ``k``."""
    ks = [float(k) for k in ks]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError(f"k-list must be strictly increasing, got {ks}")
    return [mollify(field, k) for k in ks]
