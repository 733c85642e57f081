import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ethergeom import dynamics as D
from ethergeom import paths as P
from ethergeom.models import parallel_transport

coords = st.floats(-0.4, 0.4)
points = st.tuples(coords, coords).map(np.array)
amps = st.tuples(st.floats(-0.1, 0.1), st.floats(-0.1, 0.1)).map(lambda t: np.array([t]))


def test_flat_path_maps_closed_forms(flat_field):
    path = P.wiggle(np.zeros(2), np.ones(2), [[0.3, 0.1]])
    np.testing.assert_allclose(D.path_symplectomorphism(flat_field, path)(np.array([2.0, 0.0])),
                               [3.0, 1.0], atol=1e-9)
    z = np.array([[0.5, 0.5], [-1.0, 2.0]])
    np.testing.assert_allclose(D.ether_translation(flat_field, path)(z), z + 2.0, atol=1e-9)
    np.testing.assert_allclose(D.ether_exponential(flat_field, np.ones(2), np.array([0.5, -1.0])),
                               [1.5, 0.0], atol=1e-12)


def test_constant_path_gives_identity(curved_field):
    z = np.array([[0.1, 0.2], [0.3, -0.1]])
    np.testing.assert_allclose(D.path_symplectomorphism(curved_field, P.constant(np.array([0.1, 0.1])))(z), z,
                               atol=1e-14)


@given(points, points, amps)
def test_translation_is_pair_of_reflections(curved_field, a, b, c):
    path = P.wiggle(a, b, c)
    z = np.array([[0.1, -0.2], [0.25, 0.3]])
    assert D.reflection_composition_check(curved_field, path, z) < 1e-8


@given(points, points, amps)
def test_symplectic_path_endpoint_and_transport(curved_field, a, b, c):
    path = P.wiggle(a, b, c)
    img, jac = D.path_symplectomorphism(curved_field, path).differential(a)
    np.testing.assert_allclose(img, b, atol=1e-9)
    np.testing.assert_allclose(jac, parallel_transport(curved_field.model, path), atol=1e-8)


def test_path_maps_are_symplectic_and_invertible(curved_field):
    path = P.wiggle(np.array([0.1, 0.2]), np.array([-0.3, 0.25]), [[0.1, -0.05], [0.03, 0.02]])
    sigma = D.path_symplectomorphism(curved_field, path)
    z = np.array([[0.0, 0.0], [0.3, -0.2], [-0.1, 0.4]])
    assert sigma.symplectic_defect(z) < 1e-8
    assert D.ether_translation(curved_field, path).symplectic_defect(z) < 1e-8
    np.testing.assert_allclose(sigma.inverse(sigma(z)), z, atol=1e-9)


def test_groupoid_composition(curved_field):
    a, b, c = np.array([0.1, 0.1]), np.array([-0.2, 0.3]), np.array([0.3, 0.0])
    m1 = D.path_symplectomorphism(curved_field, P.line(a, b))
    m2 = D.path_symplectomorphism(curved_field, P.bezier(b, np.zeros(2), c))
    z = np.array([[0.2, 0.2], [-0.1, 0.0]])
    np.testing.assert_allclose(D.groupoid_compose(m2, m1)(z), m2(m1(z)), atol=1e-9)
    with pytest.raises(ValueError):
        D.groupoid_compose(m1, m1)


def test_reflections_commute_with_symplectic_paths(curved_field):
    path = P.bezier(np.array([0.1, -0.1]), np.array([0.3, 0.3]), np.array([-0.2, 0.2]))
    assert D.reflection_commutation_check(curved_field, path, np.array([[0.0, 0.1], [0.2, 0.2]])) < 1e-8


def test_symplectic_path_depends_on_shape(sphere):
    from ethergeom.ether import make_ether
    f = make_ether(sphere)
    a, b = np.array([-0.2, 0.1]), np.array([0.25, 0.2])
    z = np.array([0.1, -0.3])
    straight = D.path_symplectomorphism(f, P.line(a, b))(z)
    bent = D.path_symplectomorphism(f, P.bezier(a, np.array([0.0, 0.5]), b))(z)
    assert np.max(np.abs(straight - bent)) > 1e-3


def test_ether_exponential_is_geodesic(curved_field):
    x, v = np.array([0.1, 0.2]), np.array([0.2, -0.2])
    np.testing.assert_allclose(D.ether_exponential(curved_field, x, v), curved_field.model.geodesic_exp(x, v),
                               atol=1e-9)
    assert D.exponential_reflection_check(curved_field, x, v) < 1e-9
    np.testing.assert_allclose(D.ether_exponential(curved_field, x, v, t=0.0), x)
