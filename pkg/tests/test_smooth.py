import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irpnm.linop import DenseMap, SubsampledDCT
from irpnm.smooth import Quadratic, SmoothTerm, StudentT


def central_diff(fun, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def test_scalar_values():
    np.testing.assert_allclose(StudentT(0.25).value(np.array([0.5])), np.log(2.0), rtol=1e-14)
    assert Quadratic().value(np.array([3.0, 4.0])) == 12.5
    np.testing.assert_allclose(StudentT(0.25).deriv2(np.zeros(3)), 8.0)
    np.testing.assert_allclose(StudentT(0.25).deriv2(np.array([1.0])), -0.96, rtol=1e-14)
    np.testing.assert_array_equal(Quadratic().deriv2(np.arange(4.0)), np.ones(4))


def test_zero_at_interpolation(rng):
    A = rng.standard_normal((6, 4))
    x = rng.standard_normal(4)
    f = SmoothTerm(StudentT(0.25), DenseMap(A), A @ x)
    assert f.value(x)[0] == 0.0
    np.testing.assert_allclose(f.grad(x), 0.0, atol=1e-15)


@pytest.mark.parametrize("loss", [StudentT(0.25), StudentT(1.0), Quadratic()])
def test_scalar_derivatives_fd(loss, rng):
    u = rng.uniform(-3, 3, 50)
    h = 1e-5
    d1 = np.array([(loss.value(np.array([t + h])) - loss.value(np.array([t - h]))) / (2 * h)
                   for t in u])
    np.testing.assert_allclose(loss.deriv(u), d1, rtol=1e-5, atol=1e-8)
    d2 = (loss.deriv(u + h) - loss.deriv(u - h)) / (2 * h)
    np.testing.assert_allclose(loss.deriv2(u), d2, rtol=1e-5, atol=1e-8)


@pytest.mark.parametrize("loss", [StudentT(0.25), Quadratic()])
def test_grad_and_hessvec_fd(loss, rng):
    A = DenseMap(rng.standard_normal((8, 5)))
    f = SmoothTerm(loss, A, rng.standard_normal(8))
    for _ in range(50):
        x = rng.standard_normal(5)
        g = f.grad(x)
        fd = central_diff(lambda z: f.value(z)[0], x)
        assert np.linalg.norm(g - fd) <= 1e-5 * max(1.0, np.linalg.norm(g))
        v = rng.standard_normal(5)
        hv = f.hessvec(x, v)
        h = 1e-6
        fd_hv = (f.grad(x + h * v) - f.grad(x - h * v)) / (2 * h)
        assert np.linalg.norm(hv - fd_hv) <= 1e-5 * max(1.0, np.linalg.norm(hv))


def test_quadratic_closed_forms(rng):
    M = rng.standard_normal((7, 3))
    b = rng.standard_normal(7)
    f = SmoothTerm(Quadratic(), DenseMap(M), b)
    x, v = rng.standard_normal(3), rng.standard_normal(3)
    np.testing.assert_allclose(f.grad(x), M.T @ (M @ x - b), atol=1e-12)
    np.testing.assert_allclose(f.hessvec(x, v), M.T @ M @ v, atol=1e-12)
    np.testing.assert_array_equal(f.hessvec(x, np.zeros(3)), np.zeros(3))


def test_residual_cache_is_consistent(rng):
    A = SubsampledDCT(32, np.arange(0, 32, 4))
    f = SmoothTerm(StudentT(0.25), A, rng.standard_normal(8))
    x = rng.standard_normal(32)
    val, u = f.value(x)
    np.testing.assert_array_equal(f.grad(x, u), f.grad(x))
    np.testing.assert_array_equal(f.hess_diag(x, u), f.hess_diag(x))


def test_b_length_checked():
    with pytest.raises(ValueError):
        SmoothTerm(Quadratic(), DenseMap(np.ones((3, 2))), np.ones(2))


def test_nu_positive():
    with pytest.raises(ValueError):
        StudentT(0.0)


@settings(max_examples=200, deadline=None)
@given(u=st.floats(-1e6, 1e6), nu=st.floats(1e-3, 10.0))
def test_studentt_curvature_bounded(u, nu):
    d2 = StudentT(nu).deriv2(np.array([u]))[0]
    assert abs(d2) <= 2.0 / nu * (1 + 1e-12)
    assert d2 >= -2.0 / nu * (1 + 1e-12)
    # sign of the curvature flips exactly at u^2 = nu
    if u * u > nu * (1 + 1e-9):
        assert d2 < 0
    elif u * u < nu * (1 - 1e-9):
        assert d2 > 0
