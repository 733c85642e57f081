import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ethergeom import models as M
from ethergeom.numerics import DomainError

coords = st.floats(-0.6, 0.6)
points = st.tuples(coords, coords).map(np.array)


def test_registry_and_unknown_model():
    assert M.get_model("flat-r4").dim == 4
    assert M.get_model("sphere-s2").kappa == 1.0
    with pytest.raises(KeyError):
        M.get_model("torus")


def test_flat_poisson_tensor_is_inverse_form(flat):
    psi = M.poisson_tensor(flat, np.zeros(2))
    np.testing.assert_allclose(psi @ flat.omega(np.zeros(2)), np.eye(2))


def test_singular_form_is_rejected():
    degenerate = M.FlatModel(1, omega=np.zeros((2, 2)))
    with pytest.raises(M.SingularFormError):
        M.poisson_tensor(degenerate, np.zeros(2))


def test_domain_check(hyperbolic):
    hyperbolic.check_domain(np.array([0.3, 0.1]))
    with pytest.raises(DomainError):
        hyperbolic.check_domain(np.array([0.95, 0.0]))


@given(points)
def test_closed_form_curvature_matches_differences(curved, x):
    assert M.validate_curvature(curved, x, tol=1e-6) < 1e-6


def test_sectional_curvature_sign(sphere, hyperbolic):
    for model, sign in ((sphere, 1.0), (hyperbolic, -1.0)):
        x = np.array([0.2, -0.3])
        R = M.curvature_tensor(model, x)
        g = model.metric(x)
        # K = R(e1, e2, e2, e1) / |e1 ∧ e2|² with R_{smjk} lowered on s
        K = np.einsum("s,sm->m", g[:, 0], R[:, :, 0, 1])[1] / (g[0, 0] * g[1, 1])
        assert K == pytest.approx(sign, rel=1e-10)


def test_inconsistent_model_is_detected():
    class Broken(M.ConformalSurface):
        def curvature_closed_form(self, x):
            return 2 * super().curvature_closed_form(x)

    with pytest.raises(M.ModelDefinitionError):
        M.validate_curvature(Broken(1.0, 2.0, "broken"), np.array([0.1, 0.2]))


@given(points)
def test_connection_preserves_area_form(curved, x):
    assert np.max(np.abs(M.omega_covariant_derivative(curved, x))) < 1e-8


@given(points, points)
def test_reflections_are_involutive_isometries(curved, x, z):
    s = curved.reflect(x, curved.reflect(x, z))
    np.testing.assert_allclose(s, z, atol=1e-12)
    np.testing.assert_allclose(curved.reflect(x, x), x, atol=1e-14)
    J = curved.reflect_dz(x, z)
    sz = curved.reflect(x, z)
    assert M.symplectic_defect(curved, J, z, sz) < 1e-10


@given(points, points)
def test_reflection_derivatives_match_differences(curved, x, z):
    from ethergeom.numerics import jacobian
    np.testing.assert_allclose(curved.reflect_dz(x, z), jacobian(lambda zz: curved.reflect(x, zz), z), atol=1e-7)
    np.testing.assert_allclose(curved.reflect_dx(x, z), jacobian(lambda xx: curved.reflect(xx, z), x), atol=1e-7)


def test_reflection_reverses_geodesics(curved):
    x, v = np.array([0.1, 0.2]), np.array([0.3, -0.1])
    np.testing.assert_allclose(curved.reflect(x, curved.geodesic_exp(x, v)), curved.geodesic_exp(x, -v), atol=1e-12)


def test_geodesic_exp_and_log_invert(curved):
    x, v = np.array([-0.2, 0.15]), np.array([0.25, 0.1])
    np.testing.assert_allclose(curved.log(x, curved.geodesic_exp(x, v)), v, atol=1e-12)


def test_geodesic_solves_geodesic_equation(curved):
    from ethergeom.numerics import integrate
    x, v = np.array([0.1, -0.1]), np.array([0.2, 0.3])

    def rhs(_, s):
        pos, vel = s
        acc = -np.einsum("kij,i,j->k", curved.gamma(pos), vel, vel)
        return np.stack([vel, acc])

    end = integrate(rhs, np.stack([x, v]), 0.0, 1.0)
    np.testing.assert_allclose(end[0], curved.geodesic_exp(x, v), atol=1e-8)


def test_sphere_holonomy_rotation_equals_enclosed_area(sphere):
    from ethergeom import paths as P
    loop = P.circle_loop(np.array([0.3, 0.0]), np.zeros(2))
    V = M.parallel_transport(sphere, loop)
    # enclosed spherical area of a stereographic disc of radius r
    r2 = 0.09
    area = 4 * np.pi * r2 / (1 + r2)
    assert M.rotation_angle(sphere, loop.start, V) == pytest.approx(area - 2 * np.pi * (area > np.pi), abs=1e-8)


def test_covariant_hessian_of_flat_quadratic(flat):
    Q = np.array([[1.0, 0.2], [0.2, 3.0]])
    f = lambda x: 0.5 * np.einsum("...i,ij,...j->...", x, Q, x)
    np.testing.assert_allclose(M.covariant_hessian(flat, f, np.array([0.3, 0.4])), Q, atol=1e-8)


def test_sample_points_respect_radius(sphere, rng):
    pts = M.sample_points(sphere, rng, 200, 0.4)
    assert pts.shape == (200, 2)
    assert np.all(np.linalg.norm(pts, axis=1) <= 0.4)
