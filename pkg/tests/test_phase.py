import numpy as np
import pytest

from ethergeom import dynamics as D
from ethergeom import ether as E
from ethergeom import paths as P
from ethergeom import phase as PH


@pytest.fixture(scope="module")
def sphere_setup():
    from ethergeom.models import sphere_s2
    m = sphere_s2()
    f = E.make_ether(m)
    path = P.geodesic_arc(m, np.array([-0.2, 0.1]), np.array([0.2, 0.25]))
    return f, path


def test_damped_newton_solves_batched_system():
    F = lambda z: z ** 3 - np.array([8.0, 27.0])
    np.testing.assert_allclose(PH.damped_newton(F, np.array([[1.0, 1.0]])), [[2.0, 3.0]], atol=1e-10)


def test_flat_fixed_point_is_midpoint_shift(flat_field):
    path = P.line(np.zeros(2), np.array([1.0, 0.0]))
    sigma = D.path_symplectomorphism(flat_field, path)
    x = np.array([[0.3, 0.2]])
    np.testing.assert_allclose(PH.fixed_point(flat_field, sigma, x), x - [0.5, 0.0], atol=1e-10)


def test_flat_generating_phase(flat_field):
    g = PH.generating_phase(flat_field, P.line(np.zeros(2), np.array([1.0, 0.0])), np.array([0.3, 0.2]))
    np.testing.assert_allclose(g.dphase, [0.0, -1.0], atol=1e-8)
    assert g.residual < 1e-8


def test_constant_path_has_trivial_phase(flat_field):
    g = PH.generating_phase(flat_field, P.constant(np.array([0.1, 0.1])), np.array([0.3, 0.2]))
    np.testing.assert_allclose(g.fixed_point, [0.3, 0.2], atol=1e-10)
    assert abs(g.phase) < 1e-10


def test_cone_area_of_unit_square(flat):
    square = np.array([[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]])
    area = PH.cone_area(flat, square, np.array([[0.5, 0.5]]), 2)
    assert area[0] == pytest.approx(1.0)


def test_unknown_auxiliary_path():
    with pytest.raises(ValueError):
        PH.auxiliary_path("spiral", np.zeros(2), np.ones(2))


def test_sphere_phase_differential(sphere_setup):
    f, path = sphere_setup
    g = PH.generating_phase(f, path, np.array([0.3, 0.2]), gate=1e-5)
    assert g.mesh_change < 1e-5
    assert g.residual < 1e-4
    assert PH.fixed_point_residual(f, path, np.array([0.3, 0.2])) < 1e-10


def test_sphere_hamilton_jacobi(sphere_setup):
    f, path = sphere_setup
    res, grad, target = PH.hamilton_jacobi_residual(f, path, np.array([0.3, 0.2]), n=64)
    assert res < 1e-4


def test_phase_independent_of_auxiliary_path(sphere_setup):
    f, path = sphere_setup
    x = np.array([0.3, 0.2])
    spread, gap = PH.auxiliary_independence(f, path, np.array([x, x + 0.05]), n=64)
    assert spread < 1e-5
    assert gap < 1e-5
