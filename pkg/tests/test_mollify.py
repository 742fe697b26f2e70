import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from lagflow.grid import Grid, ScalarField, gradient, hessian
from lagflow.initial import c11_squarewave, supercritical
from lagflow.mollify import approx_sequence, convolve, make_kernel, mollify, wrapped_gaussian_weights
from lagflow.monitors import hessian_extrema, phase_extrema, sup_d3_sq
from lagflow.symmat import eigvals_field


def test_delta_limit():
    k = make_kernel(Grid.uniform(1, 64), 1e8)
    assert abs(k.weights[0][0] - 1.0) <= 1e-12


@given(st.floats(1e-3, 1e6), st.integers(16, 200))
def test_partition_of_unity(k, N):
    w = make_kernel(Grid.uniform(1, N), k).weights[0]
    assert np.all(w >= 0)
    assert abs(w.sum() - 1.0) <= 1e-14


def test_even_kernel():
    w = make_kernel(Grid.uniform(1, 128), 4.0).weights[0]
    assert np.array_equal(w[1:], w[1:][::-1])


def test_flat_kernel_is_uniform_average():
    w = wrapped_gaussian_weights(32, 2 * np.pi, 1e4)
    np.testing.assert_allclose(w, 1 / 32, rtol=1e-12)


def test_circulant_matrix():
    k = make_kernel(Grid.uniform(1, 16), 3.0)
    C = k.matrix(0)
    np.testing.assert_allclose(C.sum(0), 1.0, atol=1e-15)
    assert np.array_equal(C, C.T)
    assert k.time == pytest.approx(1 / 3)


def test_validation():
    g = Grid.uniform(1, 32)
    with pytest.raises(ValueError):
        make_kernel(g, 0.0)
    with pytest.raises(ValueError):
        convolve(ScalarField.zeros(g), make_kernel(Grid.uniform(1, 64), 1.0))
    with pytest.raises(ValueError):
        approx_sequence(ScalarField.zeros(g), [4, 4])


def test_zero_and_quadratic_fixed():
    g = Grid.uniform(2, 32)
    f = ScalarField.zeros(g, np.diag([1.0, 2.0]))
    out = mollify(f, 4.0)
    assert np.array_equal(out.values, f.values) and np.array_equal(out.background, f.background)
    seq = approx_sequence(f, [1, 4, 16])
    assert all(np.array_equal(s.values, f.values) for s in seq)
    assert len(approx_sequence(f, [1])) == 1


@pytest.mark.parametrize("N,ks", [(128, (4, 16, 64)), (256, (4, 16))])
def test_squarewave_hessian_bounded_by_a(N, ks):
    # the continuous bound |D^2 u^k| <= a holds to 1e-12 once the kernel spans
    # enough cells; at N=256, k=64 the d2 stencil's round-off floor is ~3e-12
    a = 0.9
    u = c11_squarewave(Grid.uniform(1, N), a)
    for k in ks:
        lo, hi = hessian_extrema(mollify(u, k))
        assert -a - 1e-12 <= lo and hi <= a + 1e-12


def test_supercritical_stays_in_cone():
    u = supercritical(Grid.uniform(2, 64))
    for k in (4.0, 16.0, 64.0):
        th_min, _ = phase_extrema(mollify(u, k))
        assert th_min >= math.pi / 2 - 1e-10


def test_gradient_convergence_along_k():
    u = c11_squarewave(Grid.uniform(1, 256), 0.9)
    errs = [np.abs(gradient(v) - gradient(u)).max() for v in approx_sequence(u, [4, 16, 64])]
    assert errs[0] > errs[1] > errs[2]


def test_smoothing_decreases_third_derivative():
    u = c11_squarewave(Grid.uniform(1, 256), 0.9)
    d3 = [sup_d3_sq(mollify(u, k)) for k in (256, 64, 16, 4)]
    assert all(np.isfinite(d3)) and all(x > y for x, y in zip(d3, d3[1:]))


fields_1d = arrays(np.float64, 32, elements=st.floats(-1, 1))
fields_2d = arrays(np.float64, (16, 16), elements=st.floats(-1, 1))


@given(st.one_of(fields_1d, fields_2d), st.floats(0.5, 200))
def test_hessian_range_contraction(values, k):
    g = Grid.uniform(values.ndim, values.shape[0])
    f = ScalarField(g, None, values - values.mean())
    lam0 = eigvals_field(hessian(f))
    lam1 = eigvals_field(hessian(mollify(f, k)))
    scale = 1 + np.abs(lam0).max()
    assert lam1.min() >= lam0.min() - 1e-10 * scale
    assert lam1.max() <= lam0.max() + 1e-10 * scale


@given(st.floats(0.5, 50), st.floats(0.5, 50), arrays(np.float64, (64,), elements=st.floats(-1, 1)))
def test_semigroup(k1, k2, values):
    g = Grid.uniform(1, 64)
    f = ScalarField(g, None, values - values.mean())
    twice = mollify(mollify(f, k1), k2)
    once = mollify(f, 1 / (1 / k1 + 1 / k2))
    assert np.abs(twice.values - once.values).max() <= 1e-12


def test_semigroup_2d(rng):
    g = Grid.uniform(2, 32)
    f = ScalarField(g, None, rng.standard_normal(g.shape))
    a = mollify(mollify(f, 8.0), 24.0)
    b = mollify(f, 6.0)
    assert np.abs(a.values - b.values).max() <= 1e-12
