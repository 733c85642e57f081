import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ethergeom.numerics import (
    IntegrationError,
    IntegratorOptions,
    derivative,
    gauss_legendre_unit,
    gradient,
    hessian,
    integrate,
    jacobian,
    slope_fit,
)


def test_integrate_linear_ode_matches_exponential():
    out = integrate(lambda t, y: -y, np.array([1.0, 2.0]), 0.0, 1.5)
    np.testing.assert_allclose(out, np.exp(-1.5) * np.array([1.0, 2.0]), atol=1e-9)


def test_integrate_zero_interval_returns_initial_state():
    y0 = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(integrate(lambda t, y: y, y0, 0.3, 0.3), y0)


def test_integrate_t_eval_and_breakpoints():
    ts = np.linspace(0.0, 1.0, 5)
    rhs = lambda t, y: abs(t - 0.5) * np.ones_like(y)
    out = integrate(rhs, np.zeros(1), 0.0, 1.0, t_eval=ts, breakpoints=(0.5,))
    np.testing.assert_allclose(out[:, 0], [0.0, 0.09375, 0.125, 0.15625, 0.25], atol=1e-10)


def test_integrate_reports_blow_up():
    with pytest.raises(IntegrationError):
        integrate(lambda t, y: y ** 2, np.ones(1), 0.0, 2.0)


def test_options_reject_non_positive_tolerance():
    with pytest.raises(ValueError):
        IntegratorOptions(rtol=0.0)


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_derivative_of_polynomial(a, b):
    f = lambda x: x[..., 0] ** 3 + a * x[..., 0] * x[..., 1] + b * x[..., 1] ** 2
    x = np.array([0.3, -0.7])
    g = gradient(f, x)
    np.testing.assert_allclose(g, [3 * 0.09 + a * -0.7, a * 0.3 + 2 * b * -0.7], atol=1e-8)


def test_jacobian_layout_is_output_then_direction():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    J = jacobian(lambda x: x @ A.T, np.array([0.1, 0.2]))
    np.testing.assert_allclose(J, A, atol=1e-10)
    D = derivative(lambda x: x @ A.T, np.array([0.1, 0.2]))
    np.testing.assert_allclose(D, A.T, atol=1e-10)


def test_hessian_of_quadratic_form():
    Q = np.array([[2.0, 0.5], [0.5, 1.0]])
    H = hessian(lambda x: 0.5 * np.einsum("...i,ij,...j->...", x, Q, x), np.array([0.4, -0.2]))
    np.testing.assert_allclose(H, Q, atol=1e-8)


@given(st.floats(0.5, 4.0))
def test_slope_fit_recovers_power(p):
    xs = np.array([0.1, 0.05, 0.025])
    assert slope_fit(xs, 3.0 * xs ** p) == pytest.approx(p, abs=1e-10)


def test_gauss_legendre_integrates_polynomials_exactly():
    s, w = gauss_legendre_unit(8)
    assert np.all((s > 0) & (s < 1))
    assert w @ s ** 7 == pytest.approx(1 / 8, abs=1e-14)
