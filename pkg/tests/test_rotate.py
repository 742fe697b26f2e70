import math

import numpy as np
import pytest

from lagflow.grid import Grid, ScalarField
from lagflow.initial import trig
from lagflow.monitors import hessian_extrema
from lagflow.rotate import (
    RotationError,
    graph_condition_margin,
    periodic_interpolate,
    phase_shift_error,
    plan_rotation,
    rotate_field,
    rotate_with_info,
    spectral_identity_error,
)
from lagflow.symmat import rotate_spectrum


def cos_field(N, amp, S=None):
    return ScalarField.from_function(Grid.uniform(1, N), lambda x: amp * np.cos(x), S)


def test_graph_margin_examples():
    g = Grid.uniform(1, 32)
    assert graph_condition_margin(ScalarField.zeros(g), math.pi / 4) == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert abs(graph_condition_margin(ScalarField.zeros(g, [[1.0]]), math.pi / 4) - math.sqrt(2)) <= 1e-12
    assert abs(graph_condition_margin(ScalarField.zeros(g, [[-1.0]]), math.pi / 4)) <= 1e-15


def test_vertical_rotation_rejected_with_location():
    g = Grid.uniform(1, 32)
    with pytest.raises(RotationError):
        rotate_field(ScalarField.zeros(g, [[-1.0]]), math.pi / 4)
    with pytest.raises(RotationError, match="margin"):
        rotate_field(cos_field(64, 2.0), math.pi / 3)
    u = cos_field(64, 2.0)
    plan = plan_rotation(u, math.pi / 3)
    assert not plan.graphical and plan.margin_location == (0.0,)


def test_non_diagonal_background_rejected():
    g = Grid.uniform(2, 16)
    with pytest.raises(RotationError, match="diagonal"):
        rotate_field(ScalarField.zeros(g, [[1.0, 0.2], [0.2, 1.0]]), 0.1)


@pytest.mark.parametrize("S,sigma", [([[0.5]], 0.3), (np.diag([1.2, 0.5]), 0.2), (np.diag([1.2, 0.5]), -0.5)])
def test_quadratic_rotation_is_exact(S, sigma):
    S = np.asarray(S, dtype=float)
    g = Grid.uniform(S.shape[0], 32)
    v = rotate_field(ScalarField.zeros(g, S), sigma)
    np.testing.assert_allclose(v.background, rotate_spectrum(S, sigma), atol=1e-14)
    assert np.abs(v.values).max() <= 1e-10
    A = math.cos(sigma) + math.sin(sigma) * np.diag(S)
    np.testing.assert_allclose(v.grid.lengths, A * 2 * np.pi, rtol=1e-14)


def test_pinched_to_convex_window():
    # D^2 u in [-1 + delta, 1 - delta] with delta = 0.5 lands in [1/3, 3]
    delta = 0.5
    u = cos_field(256, 1 - delta)
    assert hessian_extrema(u) == pytest.approx((-0.5, 0.5), abs=1e-6)
    lo, hi = hessian_extrema(rotate_field(u, -math.pi / 4))
    assert delta / (2 - delta) - 1e-6 <= lo and hi <= (2 - delta) / delta + 1e-6


@pytest.mark.parametrize("a,b,sigma", [(-0.9, 0.6, -math.pi / 4), (0.1, 1.5, math.pi / 4)])
def test_eigenvalue_interval_images(a, b, sigma):
    # 1D data whose Hessian sweeps [a, b]; the rotated range is the image interval
    mid, half = (a + b) / 2, (b - a) / 2
    u = cos_field(256, -half, [[mid]])
    lo, hi = hessian_extrema(rotate_field(u, sigma))
    img = np.tan(np.arctan([a, b]) - sigma)
    # extrema fall between target grid points, hence the sampling tolerance
    assert lo == pytest.approx(img[0], rel=1e-4) and hi == pytest.approx(img[1], rel=1e-4)
    if sigma < 0:
        assert lo > 0  # pinched data becomes convex
    else:
        assert -1 < lo and hi <= 1  # convex data becomes pinched


def test_roundtrip_1d():
    u = cos_field(256, 0.5)
    back = rotate_field(rotate_field(u, 0.4), -0.4)
    assert back.grid.points == u.grid.points
    np.testing.assert_allclose(back.grid.lengths, u.grid.lengths, rtol=1e-14)
    assert np.abs(back.values - u.values).max() <= 1e-6


def test_spectral_identity_1d():
    u = cos_field(256, 0.5, [[0.3]])
    v, info = rotate_with_info(u, 0.35)
    assert spectral_identity_error(u, v, info) <= 5e-5
    assert phase_shift_error(u, v, info) <= 5e-5
    assert info.curl_residual <= 1e-6


def test_spectral_identity_2d():
    g = Grid.uniform(2, 256)
    u = trig(g, [0.2, 0.15], [[1, 0], [1, 1]], S=np.diag([1.0, 0.5]))
    v, info = rotate_with_info(u, 0.3)
    assert spectral_identity_error(u, v, info) <= 5e-5
    assert phase_shift_error(u, v, info) <= 5e-5
    assert info.curl_residual <= 1e-6


def test_periodic_interpolation_exact_on_grid_and_accurate_between():
    g = Grid.uniform(2, 32)
    X, Y = np.meshgrid(*g.axes(), indexing="ij")
    vals = np.sin(X) * np.cos(2 * Y)
    pts = g.coords().reshape(-1, 2)
    np.testing.assert_allclose(periodic_interpolate(vals, g, pts), vals.ravel(), atol=1e-14)
    rng = np.random.default_rng(3)
    q = rng.uniform(-3, 10, (200, 2))
    exact = np.sin(q[:, 0]) * np.cos(2 * q[:, 1])
    assert np.abs(periodic_interpolate(vals, g, q) - exact).max() <= 1e-6
