import math

import numpy as np
import pytest

from lagflow.grid import Grid, derivative
from lagflow.initial import BuilderError, c11_squarewave, quadratic, split, supercritical, trig
from lagflow.monitors import hessian_extrema, phase_extrema


def test_quadratic():
    u = quadratic(Grid.uniform(2, 16), np.eye(2))
    assert np.all(u.values == 0) and np.array_equal(u.background, np.eye(2))


def test_trig_checks_range():
    g = Grid.uniform(1, 64)
    u = trig(g, [0.5], [[1]], hessian_range=(-0.5, 0.5))
    assert hessian_extrema(u) == pytest.approx((-0.5, 0.5), abs=1e-6)
    with pytest.raises(BuilderError):
        trig(g, [0.5], [[1]], hessian_range=(-0.4, 0.4))
    with pytest.raises(BuilderError):
        trig(g, [0.5, 0.1], [[1]])
    with pytest.raises(BuilderError):
        trig(g, [0.5], [[1, 1]])


def test_trig_respects_period():
    g = Grid((32,), (3.0,))
    u = trig(g, [1.0], [[2]])
    x = g.axes()[0]
    np.testing.assert_allclose(u.values, np.cos(4 * np.pi * x / 3.0), atol=1e-14)


def test_squarewave_structure():
    a = 1.05
    g = Grid.uniform(1, 256)
    u = c11_squarewave(g, a)
    x = g.axes()[0]
    # exact second differences away from the corners
    d2 = derivative(u, (0, 0))
    away = (np.abs(x - np.pi) > 0.1) & (x > 0.1) & (x < 2 * np.pi - 0.1)
    np.testing.assert_allclose(d2[away], np.where(x[away] < np.pi, a, -a), atol=1e-9)
    # u' is a zero-mean triangle wave: continuous, periodic
    assert abs(u.values.mean()) < 1e-14
    du = derivative(u, (0,))
    assert np.abs(np.diff(du)).max() < 2 * a * g.spacing[0]
    with pytest.raises(BuilderError):
        c11_squarewave(Grid.uniform(2, 16), a)


def test_supercritical_margin():
    u = supercritical(Grid.uniform(2, 64), c=1.2, eps=0.3, margin=0.05)
    assert phase_extrema(u)[0] >= math.pi / 2 + 0.05
    assert hessian_extrema(u)[0] >= 0
    with pytest.raises(BuilderError):
        supercritical(Grid.uniform(2, 32), c=0.9)
    with pytest.raises(BuilderError):
        supercritical(Grid.uniform(1, 32))


def test_supercritical_halves_eps():
    u = supercritical(Grid.uniform(2, 32), c=1.2, eps=5.0)
    assert np.abs(u.values).max() < 5.0 * 3.5 / 2


def test_split():
    u = split(Grid.uniform(2, 32))
    assert np.array_equal(u.background, np.diag([1.0, 0.0]))
    with pytest.raises(BuilderError):
        split(Grid.uniform(2, 32), axes=(0, 1))
