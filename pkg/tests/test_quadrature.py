import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subspline.quadrature import (cell_points, gauss_rule, merge_breaks, merged_mesh, overlap_box,
                                  refine_mesh)
from subspline.spline_core import build_space


@settings(max_examples=40, deadline=None)
@given(q=st.integers(1, 10), a=st.floats(-3, 3), w=st.floats(0.1, 4), cells=st.integers(1, 5))
def test_gauss_exact_for_degree_2q_minus_1(q, a, w, cells):
    br = np.linspace(a, a + w, cells + 1)
    x, wt = cell_points(br, gauss_rule(q))
    k = 2 * q - 1
    exact = ((a + w) ** (k + 1) - a ** (k + 1)) / (k + 1)
    assert np.sum(wt * x ** k) == pytest.approx(exact, rel=1e-11, abs=1e-11)


def test_gauss_rule_bounds():
    with pytest.raises(ValueError):
        gauss_rule(0)
    with pytest.raises(ValueError):
        gauss_rule(17)
    assert gauss_rule(3).order == 3


def test_overlap_box():
    assert overlap_box([(0, 1), (0, 1)], [(0.5, 2), (0.25, 0.75)]) == ((0.5, 1.0), (0.25, 0.75))
    assert overlap_box([(0, 0.5)], [(0.5, 1)]) is None


def test_merge_breaks_dedups_and_clips():
    out = merge_breaks([[0, 0.25, 0.5, 1], [0.5 + 1e-15, 0.75, 2]], 0.0, 1.0)
    assert np.allclose(out, [0, 0.25, 0.5, 0.75, 1])


def test_merged_mesh_refines_both():
    V = build_space([(0, 1), (0, 1)], 2, 2)
    W = build_space([(0.25, 0.75), (0, 0.5)], (3, 2), 2)
    m = merged_mesh(V, W)
    assert m.box == ((0.25, 0.75), (0.0, 0.5))
    assert np.allclose(m.breaks[0], [0.25, 0.25 + 1 / 6, 0.5, 0.25 + 2 / 6, 0.75])
    assert m.shape[1] == 2
    assert merged_mesh(V, build_space([(1, 2), (0, 1)], 2, 2)) is None


def test_refine_mesh_adds_breaks():
    V = build_space([(0, 1)], 2, 1)
    m = refine_mesh(merged_mesh(V, V), [np.linspace(0, 1, 5)])
    assert np.allclose(m.breaks[0], np.linspace(0, 1, 5))
    assert m.num_cells == 4
