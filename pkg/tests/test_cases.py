import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subspline import cases
from subspline.quadrature import overlap_box
from subspline.spline_core import EmptySpace


def test_polar2d_example_dofs():
    cfg = cases.build_aniso_polar2d(2, 0, 2)
    assert len(cfg.spaces) == 5
    assert [V.dof_count for V in cfg.spaces] == [16, 8, 8, 12, 12]
    assert cfg.dofs == 56
    assert cfg.geometry.kind == "polar2d"


@settings(max_examples=20, deadline=None)
@given(p=st.integers(1, 3), L=st.integers(0, 3), n=st.integers(0, 4))
def test_polar2d_structure(p, L, n):
    cfg = cases.build_aniso_polar2d(p, L, n)
    assert len(cfg.spaces) == 1 + 2 * n
    # the V_k^x cell counts do not depend on k
    for V in cfg.spaces[1:n + 1]:
        assert V.cells == (2 ** (L + 1), 2 ** (L + 2))
    for V in cfg.spaces:
        for (a, b), (a0, b0) in zip(V.box, cfg.spaces[0].box):
            assert a0 <= a < b <= b0 + 1e-12
    assert cfg.dofs == sum(V.dof_count for V in cfg.spaces)


def test_polar3d_layout_and_guard():
    cfg = cases.build_aniso_polar3d(2, 0, 1)
    assert len(cfg.spaces) == 4
    assert cfg.geometry.kind == "polar3d"
    with pytest.raises(ValueError):
        cases.build_aniso_polar3d(2, 2, 1)


def test_identity2d_examples():
    assert len(cases.build_aniso_identity2d(2, 0.25, 0).spaces) == 1
    cfg = cases.build_aniso_identity2d(2, 0.25, 3)
    assert len(cfg.spaces) == 7
    V1x = cfg.spaces[1]
    assert V1x.box == ((0.0, 0.75), (0.0, 0.5))
    assert V1x.cells == (3, 4)
    with pytest.raises(ValueError):
        cases.build_aniso_identity2d(2, 0.3, 1)


def test_diagonal_overlap_one():
    cfg = cases.build_diagonal(2, 1, "one")
    assert len(cfg.spaces) == 4
    for j, V in enumerate(cfg.spaces[1:]):
        assert V.box == ((j / 4, (j + 2) / 4),) * 2
    assert len(cases.build_diagonal(2, 2, "one").spaces) == 1 + 3 + 7


@pytest.mark.parametrize("p,trim", [(1, "value_zero"), (1, "smooth"), (2, "smooth"), (3, "smooth")])
@pytest.mark.parametrize("n", [1, 2])
def test_diagonal_overlap_one_shares_one_function(p, trim, n):
    cfg = cases.build_diagonal(p, n, "one", trim)
    level = [V for V in cfg.spaces[1:] if V.name.startswith("V_%d," % n)]
    assert len(level) == 2 * (2 ** n - 1) + 1
    for V, W in zip(level[:-1], level[1:]):
        box = overlap_box(V.box, W.box)
        assert cases.fully_supported_count(V, box) == 1
        assert cases.fully_supported_count(W, box) == 1


@pytest.mark.parametrize("p", [2, 3])
def test_diagonal_overlap_one_value_zero_counts(p):
    # value_zero keeps the clamped functions at the patch end, p per direction
    level = cases.build_diagonal(p, 1, "one").spaces[1:]
    box = overlap_box(level[0].box, level[1].box)
    assert cases.fully_supported_count(level[0], box) == p ** 2


@pytest.mark.parametrize("p", [1, 2])
def test_diagonal_overlap_p_plus_1(p):
    cfg = cases.build_diagonal(p, 1, "p_plus_1")
    level = cfg.spaces[1:]
    assert len(level) == 2 * (p + 1) + 1
    h0 = 1 / (2 * (p + 1))
    for j, V in enumerate(level):
        assert V.box[0] == pytest.approx((j * h0 / 2, j * h0 / 2 + 0.5))
    assert level[-1].box[0][1] == pytest.approx(1.0)
    box = overlap_box(level[0].box, level[1].box)
    assert box[0][1] - box[0][0] == pytest.approx(0.5 - h0 / 2)


def test_validation():
    with pytest.raises(ValueError):
        cases.build_aniso_polar2d(0, 0, 1)
    with pytest.raises(ValueError):
        cases.build_aniso_polar2d(2, -1, 1)
    with pytest.raises(ValueError):
        cases.build_diagonal(2, 1, "two")
    with pytest.raises(EmptySpace, match="V_1"):
        cases.build_aniso_polar2d(3, 0, 1, trim_mode="smooth")


def test_summary_mentions_spaces():
    text = cases.build_aniso_polar2d(2, 0, 1).summary()
    assert "dofs=36" in text and "V_1^y" in text


@pytest.mark.parametrize("name", sorted(cases.VERIFICATION_CASES))
def test_verification_cases_build(name):
    cfg = cases.VERIFICATION_CASES[name]()
    assert cfg.dofs > 0 and cfg.name == name
