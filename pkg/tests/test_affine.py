import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ethergeom import affine as AF
from ethergeom import dynamics as D
from ethergeom import ether as E
from ethergeom import paths as P
from ethergeom.models import flat_r2n, sphere_s2

coords = st.floats(-0.3, 0.3)
points = st.tuples(coords, coords).map(np.array)
ROT = np.array([[0.0, -1.0], [1.0, 0.0]])


@pytest.fixture(scope="module")
def linear():
    return AF.linear_family()


@pytest.fixture(scope="module")
def twisted():
    return AF.TwistedFamily([[0.3, -0.2, 0.1, 0.2], [0.1, 0.25, -0.2, 0.05]])


@pytest.fixture(scope="module", params=["linear", "twisted-2", "twisted-4", "sphere", "flat"])
def family(request):
    return {
        "linear": lambda: AF.linear_family(),
        "twisted-2": lambda: AF.TwistedFamily([[0.3, -0.2]]),
        "twisted-4": lambda: AF.TwistedFamily([[0.3, -0.2, 0.1, 0.2], [0.1, 0.25, -0.2, 0.05]]),
        "sphere": lambda: AF.ReflectionFamily(sphere_s2()),
        "flat": lambda: AF.ReflectionFamily(flat_r2n(1)),
    }[request.param]()


def _sample(fam, seed=5):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-0.2, 0.2, fam.dim)
    return x, x + rng.uniform(-0.2, 0.2, fam.dim), rng.normal(size=fam.dim), rng.normal(size=fam.dim)


def test_linear_family_closed_forms(linear):
    x, z = np.array([0.3, -0.1]), np.array([1.0, 0.5])
    f = AF.field_from_inversions(linear)
    np.testing.assert_allclose(f.A(x, z), np.eye(2) - ROT)
    np.testing.assert_allclose(f.gamma(x), 0.0, atol=1e-9)
    np.testing.assert_allclose(AF.inversions_from_field(f, x, z), x + ROT @ (z - x), atol=1e-12)
    # s_x has order four
    w = z
    for _ in range(4):
        w = linear.s(x, w)
    np.testing.assert_allclose(w, z, atol=1e-14)
    assert not linear.involutive


def test_point_reflection_family_is_flat_reflection():
    fam = AF.LinearFamily(-np.eye(2))
    assert fam.involutive
    f = AF.field_from_inversions(fam)
    x, z = np.array([0.1, 0.2]), np.array([-0.4, 0.3])
    np.testing.assert_allclose(AF.inversions_from_field(f, x, z), 2 * x - z, atol=1e-12)
    np.testing.assert_allclose(f.cartan(x), 2 * np.eye(2))


def test_inversions_fix_centre(family):
    f = AF.field_from_inversions(family)
    x = np.full(family.dim, 0.1)
    np.testing.assert_allclose(AF.inversions_from_field(f, x, x), x, atol=1e-14)


def test_internal_translation_linear_closed_form(linear):
    f = AF.field_from_inversions(linear)
    x, y, z = np.array([0.3, 0.1]), np.array([-0.2, 0.4]), np.array([0.5, 0.5])
    g = AF.internal_translation(f, P.wiggle(y, x, [[0.1, 0.2]]))(z)
    np.testing.assert_allclose(g, z + (np.eye(2) - ROT) @ (x - y), atol=1e-10)
    np.testing.assert_allclose(AF.internal_translation(f, P.constant(x))(z), z)


def test_flat_fundamental_translation_matches_path_dynamics(flat):
    ff = AF.fundamental_field(flat)
    path = P.wiggle(np.zeros(2), np.array([1.0, 0.5]), [[0.2, -0.1]])
    z = np.array([[0.3, 0.1], [-0.5, 0.7]])
    np.testing.assert_allclose(AF.internal_translation(ff, path)(z),
                               D.ether_translation(E.ether_flat(flat), path)(z), atol=1e-9)


def test_zero_curvature_of_both_fields(family):
    x, z, u, v = _sample(family)
    assert AF.zero_curvature_residual(AF.field_from_inversions(family), x, z, u, v) < 1e-8
    assert AF.zero_curvature_residual(AF.conjugate_field(family), x, z, u, v) < 1e-8


def test_diagonal_condition(family):
    x, *_ = _sample(family)
    assert AF.diagonal_condition_residual(AF.field_from_inversions(family), x) < 1e-8
    assert AF.diagonal_condition_residual(AF.conjugate_field(family), x) < 1e-8


def test_structural_equation(family):
    x, _, u, v = _sample(family)
    assert AF.structural_equation_residual(AF.field_from_inversions(family), x, u, v) < 1e-8
    assert AF.structural_equation_residual(AF.conjugate_field(family), x, u, v) < 1e-8


def test_twisted_family_has_torsion(twisted):
    x, *_ = _sample(twisted)
    assert np.max(np.abs(AF.field_from_inversions(twisted).torsion(x))) > 0.1


def test_round_trip(family):
    x, z, *_ = _sample(family)
    s_err, A_err = AF.round_trip_residuals(family, x, z)
    assert s_err < 1e-8
    assert A_err < 1e-8


def test_conjugate_inversions_are_inverses(family):
    x, z, *_ = _sample(family)
    minus = AF.conjugate_field(family)
    np.testing.assert_allclose(AF.inversions_from_field(minus, x, z), family.inverse(x, z), atol=1e-9)
    a = AF.field_from_inversions(family).cartan(x)
    np.testing.assert_allclose(minus.cartan(x), a @ np.linalg.inv(a - np.eye(family.dim)), atol=1e-10)


def test_linear_conjugate_closed_form(linear):
    x, z = np.array([0.1, 0.2]), np.array([0.4, -0.3])
    minus = AF.conjugate_field(linear)
    np.testing.assert_allclose(minus.cartan(x), (np.eye(2) - ROT) @ np.linalg.inv(-ROT), atol=1e-14)
    np.testing.assert_allclose(AF.inversions_from_field(minus, x, z), x + ROT.T @ (z - x), atol=1e-12)


def test_translation_factorizes_through_inversions(family):
    x, z, *_ = _sample(family)
    y = x + 0.1
    g = AF.internal_translation(AF.field_from_inversions(family), P.line(y, x))(z)
    np.testing.assert_allclose(g, family.s(x, family.inverse(y, z)), atol=1e-9)
    assert AF.path_independence_gap(AF.field_from_inversions(family), y, x, z=z) < 1e-9


def test_internal_geodesics_are_exchanged_by_inversion(family):
    x, _, _, v = _sample(family)
    plus, minus = AF.field_from_inversions(family), AF.conjugate_field(family)
    w = 0.3 * v / np.linalg.norm(v)
    _, Em = AF.internal_geodesics(plus, minus, x, w)
    Ep_neg, _ = AF.internal_geodesics(plus, minus, x, -w)
    np.testing.assert_allclose(family.s(x, Em), Ep_neg, atol=1e-9)


def test_flat_fundamental_geodesics_are_lines(flat):
    ff = AF.fundamental_field(flat)
    Ep, Em = AF.internal_geodesics(ff, ff, np.ones(2), np.array([0.2, -0.4]), t=0.5)
    np.testing.assert_allclose(Ep, [1.1, 0.8], atol=1e-12)
    np.testing.assert_allclose(Em, [1.1, 0.8], atol=1e-12)


def test_skew_symmetry_discriminates_involutivity(linear):
    x, z = np.array([0.1, 0.2]), np.array([0.3, -0.2])
    assert AF.skew_symmetry_residual(linear, x, z) > 1e-2
    assert AF.skew_symmetry_residual(AF.ReflectionFamily(sphere_s2()), x, z) < 1e-10


@given(points)
def test_cartan_spectrum_avoids_zero_and_one(x):
    for fam in (AF.linear_family(), AF.ReflectionFamily(sphere_s2())):
        assert AF.cartan_spectrum_margin(AF.field_from_inversions(fam), x) > 0.5


def test_sphere_connection_is_levi_civita(sphere):
    x = np.array([0.2, -0.1])
    np.testing.assert_allclose(AF.fundamental_field(sphere).gamma(x), sphere.gamma(x), atol=1e-8)
    np.testing.assert_allclose(AF.fundamental_field(sphere).cartan(x), 2 * np.eye(2), atol=1e-12)


@pytest.mark.parametrize("name", ["linear", "twisted-2", "twisted-4", "sphere", "flat"])
def test_symplectic_inversive_identities(name):
    fam = {
        "linear": lambda: AF.linear_family(),
        "twisted-2": lambda: AF.TwistedFamily([[0.3, -0.2]]),
        "twisted-4": lambda: AF.TwistedFamily([[0.3, -0.2, 0.1, 0.2], [0.1, 0.25, -0.2, 0.05]]),
        "sphere": lambda: AF.ReflectionFamily(sphere_s2()),
        "flat": lambda: AF.ReflectionFamily(flat_r2n(1)),
    }[name]()
    x, z, *_ = _sample(fam)
    report = AF.symplectic_inversive_checks(fam, x, z)
    assert max(report.values()) < 1e-8, report


def test_affine_translocation_flat_linear(flat):
    ff = AF.fundamental_field(flat)
    L = np.array([[0.1, 1.0], [-0.7, 0.2]])
    y = np.array([0.3, -0.2])
    tr = AF.AffineTranslocation(ff, lambda X: X @ L.T, y, du=lambda X: L)
    z = np.array([0.5, 0.1])
    np.testing.assert_allclose(tr.vector_field(0.4, z), L @ (z - y), atol=1e-9)
    Z, rep = AF.affine_translocate(ff, lambda X: X @ L.T, y, 0.8, z, du=lambda X: L)
    assert rep["factorization"] < 1e-8
    assert rep["closed_form"] < 1e-8
    np.testing.assert_allclose(tr.flow(0.8, y), y, atol=1e-10)


def test_affine_translocation_sphere_rotation(sphere):
    rot = lambda X: np.stack([-X[..., 1], X[..., 0]], -1)
    _, rep = AF.affine_translocate(AF.fundamental_field(sphere), rot, np.array([0.3, -0.2]), 0.6,
                                   np.array([0.1, 0.2]), du=lambda X: ROT)
    assert rep["factorization"] < 1e-6
    assert rep["equilibrium"] < 1e-9
    # rotations are isometries, so the consistency condition holds and the closed form applies
    assert rep["closed_form"] < 1e-8


def test_affine_translocation_with_torsion():
    tw = AF.field_from_inversions(AF.TwistedFamily([[0.3, -0.2]]))
    L = np.array([[0.1, 1.0], [-0.7, 0.2]])
    tr = AF.AffineTranslocation(tw, lambda X: X @ L.T, np.array([0.1, -0.1]), du=lambda X: L)
    assert tr.factorization_residual(0.5, np.array([0.2, 0.1])) < 1e-8
    assert tr.equilibrium_residual(0.5) < 1e-9
    assert tr.linearization_residual(0.5) < 1e-8
    assert tr.monodromy_residual(0.5) < 1e-9


def test_twisted_family_validation():
    with pytest.raises(ValueError):
        AF.TwistedFamily([[0.1, 0.2, 0.3]])
    with pytest.raises(ValueError):
        AF.LinearFamily().omega(np.zeros(2))
