"""Small symmetric matrices: eigen-decomposition, Lagrangian phase, induced
metric, spectral rotation and the pointwise matrix predicates.

Scalar routines take a single ``(n, n)`` matrix (n <= 3). The ``*_field``
variants act on stacks of shape ``(..., n, n)`` and are what the grid code
uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TAN_MARGIN = 1e-8
JACOBI_SWEEPS = 30
JACOBI_TOL = 1e-14


@dataclass(frozen=True)
class SymMat:
    """Symmetric matrix stored by its upper triangle (row-major)."""

    n: int
    upper: tuple[float, ...]

    def __post_init__(self):
        if not 1 <= self.n <= 3:
            raise ValueError("SymMat supports n <= 3")
        if len(self.upper) != self.n * (self.n + 1) // 2:
            raise ValueError("wrong number of upper-triangle entries")

    @classmethod
    def from_array(cls, M) -> "SymMat":
        M = _as_sym(M)
        n = M.shape[0]
        return cls(n, tuple(float(M[i, j]) for i in range(n) for j in range(i, n)))

    def array(self) -> np.ndarray:
        M = np.empty((self.n, self.n))
        it = iter(self.upper)
        for i in range(self.n):
            for j in range(i, self.n):
                M[i, j] = M[j, i] = next(it)
        return M

    def __array__(self, dtype=None, copy=None):
        return self.array() if dtype is None else self.array().astype(dtype)


def _as_sym(M) -> np.ndarray:
    if isinstance(M, SymMat):
        return M.array()
    M = np.array(M, dtype=float)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or not 1 <= M.shape[0] <= 3:
        raise ValueError(f"expected an n x n matrix with n <= 3, got shape {M.shape}")
    scale = 1.0 + np.abs(M).max()
    if np.abs(M - M.T).max() > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    return 0.5 * (M + M.T)


def _fix_signs(Q: np.ndarray) -> np.ndarray:
    # largest-magnitude component positive; the last column instead makes det Q = +1
    Q = Q.copy()
    n = Q.shape[1]
    for c in range(n - 1):
        k = np.argmax(np.abs(Q[:, c]))
        if Q[k, c] < 0:
            Q[:, c] = -Q[:, c]
    if np.linalg.det(Q) < 0:
        Q[:, n - 1] = -Q[:, n - 1]
    return Q


def _eig2(M: np.ndarray):
    # eigenvectors are scale invariant; normalizing avoids subnormal round-off
    scale = np.abs(M).max()
    if scale == 0.0:
        return np.zeros(2), np.eye(2)
    lam, Q = _eig2_unit(M / scale)
    return lam * scale, Q


def _eig2_unit(M: np.ndarray):
    a, b, d = M[0, 0], M[0, 1], M[1, 1]
    mean = 0.5 * (a + d)
    rad = math.hypot(0.5 * (a - d), b)
    lam = np.array([mean - rad, mean + rad])
    if b == 0.0 and rad == 0.0:
        return lam, np.eye(2)
    # eigenvector for the larger eigenvalue, from the better-conditioned row
    if a >= d:
        v = np.array([lam[1] - d, b])
    else:
        v = np.array([b, lam[1] - a])
    norm = math.hypot(v[0], v[1])
    if norm == 0.0:
        return lam, np.eye(2)
    v = v / norm
    Q = np.array([[-v[1], v[0]], [v[0], v[1]]])
    return lam, Q


def _jacobi(M: np.ndarray):
    A = M.copy()
    n = A.shape[0]
    V = np.eye(n)
    scale = max(np.abs(A).max(), np.finfo(float).tiny)
    for _ in range(JACOBI_SWEEPS):
        off = math.sqrt(sum(A[p, q] ** 2 for p in range(n) for q in range(p + 1, n)))
        if off <= JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                diff = A[q, q] - A[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    t = apq / diff  # tau would overflow; t ~ 1/(2 tau)
                else:
                    tau = diff / (2.0 * apq)
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                R = np.eye(n)
                R[p, p] = R[q, q] = c
                R[p, q] = s
                R[q, p] = -s
                A = R.T @ A @ R
                A[p, q] = A[q, p] = 0.0
                V = V @ R
    lam = np.diag(A).copy()
    order = np.argsort(lam, kind="stable")
    return lam[order], V[:, order]


def eigen_sym(M):
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns).

    Closed form for n <= 2, cyclic Jacobi for n = 3. Column signs are fixed so
    the largest-magnitude component is positive, except the last column which
    is chosen to make ``det Q = +1``.
    """
    M = _as_sym(M)
    n = M.shape[0]
    if n == 1:
        return np.array([M[0, 0]]), np.eye(1)
    if n == 2:
        lam, Q = _eig2(M)
    else:
        lam, Q = _jacobi(M)
    return lam, _fix_signs(Q)


def eigvals(M) -> np.ndarray:
    return eigen_sym(M)[0]


def theta(M) -> float:
    """Lagrangian phase ``sum_i arctan(lambda_i)``."""
    return float(np.sum(np.arctan(eigvals(M))))


def metric(M):
    """``(g, g_inv)`` with ``g = I + M^2``."""
    M = _as_sym(M)
    lam, Q = eigen_sym(M)
    g = np.eye(M.shape[0]) + M @ M
    g_inv = (Q / (1.0 + lam**2)) @ Q.T
    return g, 0.5 * (g_inv + g_inv.T)


def rotate_eigenvalue(lam, sigma: float):
    """``tan(arctan(lam) - sigma)``, rejecting results within ``TAN_MARGIN`` of
    a vertical tangent."""
    lam = np.asarray(lam, dtype=float)
    angle = np.arctan(lam) - sigma
    bad = np.abs(angle) >= 0.5 * np.pi - TAN_MARGIN
    if np.any(bad):
        worst = lam[bad].ravel()[0] if lam.ndim else float(lam)
        raise ValueError(
            f"graph condition violated: eigenvalue {worst!r} rotated by sigma={sigma!r} "
            f"leaves (-pi/2, pi/2)"
        )
    return np.tan(angle)


def rotate_spectrum(M, sigma: float) -> np.ndarray:
    """``Q diag(tan(arctan(lambda_i) - sigma)) Q^T`` (same eigenvectors)."""
    lam, Q = eigen_sym(M)
    out = (Q * rotate_eigenvalue(lam, sigma)) @ Q.T
    return 0.5 * (out + out.T)


def ty_condition_i(M, n: int | None = None) -> bool:
    """``sum arctan(lambda_i) >= (n - 2) pi / 2``."""
    M = _as_sym(M)
    n = M.shape[0] if n is None else n
    return theta(M) >= (n - 2) * np.pi / 2


def ty_condition_ii_min(M) -> float:
    """``min over (i, j)`` of ``3 + lambda_i^2 + 2 lambda_i lambda_j``."""
    lam = eigvals(M)
    return float(np.min(3.0 + lam[:, None] ** 2 + 2.0 * lam[:, None] * lam[None, :]))


def ty_condition_ii(M) -> bool:
    return ty_condition_ii_min(M) >= 0.0


@dataclass(frozen=True)
class PhaseCone:
    """Matrices with ``theta(A) >= threshold``."""

    threshold: float
    n: int

    def __post_init__(self):
        half = self.n * np.pi / 2
        if not -half < self.threshold < half:
            raise ValueError(f"threshold {self.threshold} outside (-{half}, {half})")

    @classmethod
    def supercritical(cls, n: int, shift: float = 0.0) -> "PhaseCone":
        """Threshold ``(n - 1) pi / 2 - shift``."""
        return cls((n - 1) * np.pi / 2 - shift, n)

    @property
    def is_convex(self) -> bool:
        return self.threshold >= (self.n - 2) * np.pi / 2

    def contains(self, M, tol: float = 0.0) -> bool:
        return phase_gap(M, self) >= -tol


def phase_gap(M, cone: PhaseCone) -> float:
    return theta(M) - cone.threshold


# ---------------------------------------------------------------------------
# vectorized over stacks of matrices


def eigvals_field(H: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues for a stack ``(..., n, n)``."""
    n = H.shape[-1]
    if n == 1:
        return H[..., 0, :].copy()
    if n == 2:
        a, b, d = H[..., 0, 0], H[..., 0, 1], H[..., 1, 1]
        mean = 0.5 * (a + d)
        rad = np.hypot(0.5 * (a - d), b)
        return np.stack([mean - rad, mean + rad], axis=-1)
    return np.linalg.eigvalsh(H)


def theta_field(H: np.ndarray) -> np.ndarray:
    """Pointwise phase. For n = 2 this is ``arg((1 + i l1)(1 + i l2))``, i.e.
    ``atan2(tr H, 1 - det H)``; no branch cut is crossed because the sum of two
    arctangents lies in ``(-pi, pi)``."""
    n = H.shape[-1]
    if n == 1:
        return np.arctan(H[..., 0, 0])
    if n == 2:
        a, b, d = H[..., 0, 0], H[..., 0, 1], H[..., 1, 1]
        return np.arctan2(a + d, 1.0 - (a * d - b * b))
    return np.arctan(eigvals_field(H)).sum(axis=-1)


def metric_inverse_field(H: np.ndarray) -> np.ndarray:
    """``(I + H^2)^{-1}`` per point."""
    n = H.shape[-1]
    if n == 1:
        return 1.0 / (1.0 + H * H)
    g = np.eye(n) + H @ H
    if n == 2:
        a, b, d = g[..., 0, 0], g[..., 0, 1], g[..., 1, 1]
        det = a * d - b * b
        out = np.empty_like(g)
        out[..., 0, 0] = d / det
        out[..., 1, 1] = a / det
        out[..., 0, 1] = out[..., 1, 0] = -b / det
        return out
    return np.linalg.inv(g)


def ty_condition_ii_field(H: np.ndarray) -> np.ndarray:
    lam = eigvals_field(H)
    vals = 3.0 + lam[..., :, None] ** 2 + 2.0 * lam[..., :, None] * lam[..., None, :]
    return vals.min(axis=(-1, -2))
