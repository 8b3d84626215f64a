import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.interpolate import BSpline

from subspline.spline_core import (EmptySpace, KnotVector, basis_derivs, build_space, eval_nonzero,
                                   make_clamped_uniform, trimmed_basis)


def scipy_design(kv, x):
    """Reference basis values from scipy, one column per untrimmed function."""
    return BSpline.design_matrix(x, kv.knots, kv.p).toarray()


def test_clamped_knots_layout():
    kv = make_clamped_uniform(0, 1, 2, 2)
    assert np.array_equal(kv.knots, [0, 0, 0, 0.5, 1, 1, 1])
    assert kv.numfuncs == 4
    assert kv.support == (0.0, 1.0)


@pytest.mark.parametrize("bad", [dict(a=1, b=0, cells=2, p=1), dict(a=0, b=1, cells=0, p=1),
                                 dict(a=0, b=1, cells=2, p=0)])
def test_clamped_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        make_clamped_uniform(**bad)


def test_knot_vector_validation():
    with pytest.raises(ValueError):
        KnotVector(np.array([0, 1, 0.5, 1.0]), 1)
    with pytest.raises(ValueError):
        KnotVector(np.array([0.0, 1.0]), 1)


def test_cardinal_quadratic_center_value():
    kv = KnotVector(np.arange(-2.0, 6.0), 2)
    nz = eval_nonzero(trimmed_basis(kv), 1.5)
    # the function with support [0, 3] is the one starting at knot index 2
    j = 2 - nz.first
    assert nz.values[j, 0] == pytest.approx(0.75, abs=1e-14)


def test_matches_scipy_on_uniform_knots(rng):
    kv = make_clamped_uniform(0.0, 2.0, 5, 3)
    x = rng.uniform(0, 2, 300)
    span = kv.find_span(x)
    vals = basis_derivs(kv, span, x, 0)[:, 0, :]
    dense = np.zeros((x.size, kv.numfuncs))
    np.put_along_axis(dense, span[:, None] - 3 + np.arange(4), vals, axis=1)
    assert np.allclose(dense, scipy_design(kv, x), atol=1e-13)


def test_derivatives_match_scipy(rng):
    kv = KnotVector(np.array([0, 0, 0, 0.3, 0.3, 0.7, 1.2, 1.2, 1.2]), 2)
    x = rng.uniform(0, 1.2, 200)
    span = kv.find_span(x)
    ders = basis_derivs(kv, span, x, 2)
    for j in range(kv.numfuncs):
        c = np.zeros(kv.numfuncs)
        c[j] = 1
        ref = BSpline(kv.knots, c, 2)
        for k in range(3):
            local = j - (span - 2)
            mine = np.where((local >= 0) & (local <= 2),
                            ders[np.arange(x.size), k, np.clip(local, 0, 2)], 0.0)
            assert np.allclose(mine, ref(x, nu=k), atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(p=st.integers(1, 5), cells=st.integers(1, 12), a=st.floats(-5, 5),
       width=st.floats(0.1, 10), seed=st.integers(0, 2**32 - 1))
def test_partition_of_unity(p, cells, a, width, seed):
    kv = make_clamped_uniform(a, a + width, cells, p)
    x = np.random.Generator(np.random.PCG64(seed)).uniform(a, a + width, 50)
    vals = basis_derivs(kv, kv.find_span(x), x, 1)
    assert np.allclose(vals[:, 0, :].sum(axis=1), 1.0, atol=1e-12)
    assert np.allclose(vals[:, 1, :].sum(axis=1), 0.0, atol=1e-9 * max(1, cells / width))
    assert np.all(vals[:, 0, :] >= -1e-14)


@settings(max_examples=40, deadline=None)
@given(p=st.integers(1, 4), cells=st.integers(1, 8), mode=st.sampled_from(["value_zero", "smooth"]))
def test_trim_counts(p, cells, mode):
    kv = make_clamped_uniform(0, 1, cells, p)
    w = 1 if mode == "value_zero" else p
    n = cells + p - 2 * w
    if n <= 0:
        with pytest.raises(EmptySpace):
            trimmed_basis(kv, mode)
    else:
        assert trimmed_basis(kv, mode).size == n


def test_trimmed_functions_vanish_on_boundary():
    V = build_space([(0, 1), (0, 2)], (3, 4), 2)
    pts = np.array([[0, 0.3], [1, 1.1], [0.5, 0], [0.2, 2]])
    assert np.allclose(V.basis_matrix(pts), 0)


def test_smooth_trim_has_zero_normal_derivative():
    kv = make_clamped_uniform(0, 1, 6, 3)
    b = trimmed_basis(kv, "smooth")
    for x in (0.0, 1.0):
        nz = eval_nonzero(b, x, 1)
        kept = nz.kept_index >= 0
        assert np.allclose(nz.values[kept, :2], 0, atol=1e-12)


def test_space_shape_and_ordering():
    V = build_space([(0, 1), (0, 1)], (3, 2), (2, 1), name="V")
    assert V.shape == (3, 1)
    assert V.dof_count == 3
    assert V.cells == (3, 2)
    pts = np.array([[0.4, 0.5]])
    B = V.basis_matrix(pts)
    # row-major with the last direction fastest: value is product of 1D values
    kx = make_clamped_uniform(0, 1, 3, 2)
    vx = scipy_design(kx, pts[:, 0])[0, 1:-1]
    assert np.allclose(B[0], vx * 1.0)


def test_evaluate_zero_outside_box():
    V = build_space([(0, 0.5)], 4, 2)
    assert V.evaluate(np.ones(V.dof_count), [[0.75]])[0] == 0.0


def test_space_dimension_checks():
    with pytest.raises(ValueError):
        build_space([(0, 1)] * 4, 2, 2)
    with pytest.raises(ValueError):
        build_space([(0, 1), (0, 1)], (2, 2, 2), 2)
    with pytest.raises(EmptySpace):
        build_space([(0, 1)], 1, 1)
