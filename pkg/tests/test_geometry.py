import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subspline import geometry as g


def fd_jacobian(gmap, x, h=1e-6):
    cols = []
    for k in range(gmap.dim):
        e = np.zeros(gmap.dim)
        e[k] = h
        cols.append((g.map_eval(gmap, x + e) - g.map_eval(gmap, x - e)) / (2 * h))
    return np.stack(cols, axis=-1)


def polar_points(rng, d, n=1000):
    lo = [1.0, np.pi / 4, 0.0][:d]
    hi = [2.0, 3 * np.pi / 4, np.pi / 2][:d]
    return rng.uniform(lo, hi, (n, d))


@pytest.mark.parametrize("gmap", [g.identity(2), g.identity(3), g.polar2d(), g.polar3d()])
def test_jacobian_matches_finite_differences(gmap, rng):
    x = polar_points(rng, gmap.dim)
    J, det = g.map_jacobian(gmap, x)
    assert np.max(np.abs(J - fd_jacobian(gmap, x))) < 1e-6
    assert np.allclose(det, np.linalg.det(J), rtol=1e-12)


def test_polar_determinants():
    J, det = g.map_jacobian(g.polar2d(), np.array([[1.5, 0.3]]))
    assert det[0] == pytest.approx(1.5)
    J, det = g.map_jacobian(g.polar3d(), np.array([[2.0, np.pi / 2, 0.1]]))
    assert det[0] == pytest.approx(4.0)


def test_polar_maps_preserve_radius(rng):
    x = polar_points(rng, 3, 50)
    assert np.allclose(np.linalg.norm(g.map_eval(g.polar3d(), x), axis=1), x[:, 0])
    x2 = x[:, :2]
    assert np.allclose(np.linalg.norm(g.map_eval(g.polar2d(), x2), axis=1), x2[:, 0])


@settings(max_examples=50, deadline=None)
@given(rho=st.floats(0.5, 3), th=st.floats(0.2, 2.9), ph=st.floats(-3, 3))
def test_polar3d_determinant_positive_away_from_axis(rho, th, ph):
    _, det = g.map_jacobian(g.polar3d(), np.array([rho, th, ph]))
    assert det > 0


def test_dimension_mismatch():
    with pytest.raises(g.GeometryError):
        g.map_eval(g.polar2d(), np.zeros((4, 3)))
    with pytest.raises(ValueError):
        g.GeometryMap("polar3d", 2)
    with pytest.raises(ValueError):
        g.from_name("spherical", 3)
    assert g.from_name("identity", 2).is_affine
