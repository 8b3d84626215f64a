import numpy as np
import pytest
from scipy.interpolate import BSpline

from subspline import geometry
from subspline.assembly import (assemble_mass_block, assemble_pair, assemble_rhs_block,
                                assemble_stiffness_block, constant_source, random_source)
from subspline.quadrature import gauss_rule
from subspline.spline_core import build_space


def hat_space():
    return build_space([(0.0, 1.0)], 2, 1)


def test_interior_hat_values():
    V = hat_space()
    g1 = geometry.identity(1)
    assert V.dof_count == 1
    assert assemble_stiffness_block(V, V, g1).toarray()[0, 0] == pytest.approx(4.0, abs=1e-12)
    assert assemble_mass_block(V, V, g1).toarray()[0, 0] == pytest.approx(1 / 3, abs=1e-12)
    rhs = assemble_rhs_block(V, constant_source(V.box), g1)
    assert rhs[0] == pytest.approx(0.5, abs=1e-12)


def reference_1d(space, kind, q=12):
    """Dense 1D matrices from scipy BSpline objects and a fine Gauss rule."""
    basis = space.bases[0]
    kv = basis.knot_vector
    lo, hi = basis.kept
    nu = 1 if kind == "stiffness" else 0
    x, w = np.polynomial.legendre.leggauss(q)
    br = kv.breakpoints
    pts = np.concatenate([0.5 * (b - a) * (x + 1) + a for a, b in zip(br[:-1], br[1:])])
    wts = np.concatenate([0.5 * (b - a) * w for a, b in zip(br[:-1], br[1:])])
    vals = []
    for j in range(lo, hi):
        c = np.zeros(kv.numfuncs)
        c[j] = 1
        vals.append(BSpline(kv.knots, c, kv.p)(pts, nu=nu))
    vals = np.array(vals)
    return (vals * wts) @ vals.T


@pytest.mark.parametrize("p,cells", [(1, 5), (2, 4), (3, 6), (4, 7)])
def test_1d_blocks_match_scipy(p, cells):
    V = build_space([(0.0, 2.0)], cells, p)
    g1 = geometry.identity(1)
    for kind in ("stiffness", "mass"):
        A = assemble_pair(V, V, g1, kinds=(kind,))[kind].toarray()
        assert np.allclose(A, reference_1d(V, kind), atol=1e-12)


def test_2d_identity_is_kronecker_sum():
    p, cx, cy = 2, 3, 5
    V = build_space([(0, 1), (0, 2)], (cx, cy), p)
    Vx = build_space([(0, 1)], cx, p)
    Vy = build_space([(0, 2)], cy, p)
    g1 = geometry.identity(1)
    Kx, Mx = (assemble_pair(Vx, Vx, g1, kinds=(k,))[k].toarray() for k in ("stiffness", "mass"))
    Ky, My = (assemble_pair(Vy, Vy, g1, kinds=(k,))[k].toarray() for k in ("stiffness", "mass"))
    A = assemble_stiffness_block(V, V, geometry.identity(2)).toarray()
    M = assemble_mass_block(V, V, geometry.identity(2)).toarray()
    assert np.allclose(A, np.kron(Kx, My) + np.kron(Mx, Ky), atol=1e-12)
    assert np.allclose(M, np.kron(Mx, My), atol=1e-13)


def test_cross_block_transpose_consistency():
    V = build_space([(1, 2), (0.5, 1.5)], 3, 2)
    W = build_space([(1.5, 2), (0.75, 1.25)], (4, 2), 2)
    gm = geometry.polar2d()
    Avw = assemble_stiffness_block(V, W, gm).toarray()
    Awv = assemble_stiffness_block(W, V, gm).toarray()
    assert np.allclose(Avw, Awv.T, atol=1e-14)


def test_disjoint_pair_block_is_empty():
    V = build_space([(0, 0.5), (0, 1)], 2, 2)
    W = build_space([(0.5, 1), (0, 1)], 2, 2)
    A = assemble_stiffness_block(V, W, geometry.identity(2))
    assert A.shape == (V.dof_count, W.dof_count) and A.nnz == 0


def test_polar_stiffness_energy_against_dense_quadrature(rng):
    V = build_space([(1, 2), (np.pi / 4, 3 * np.pi / 4)], (3, 4), 2)
    gm = geometry.polar2d()
    A = assemble_stiffness_block(V, V, gm, rule=gauss_rule(12)).toarray()
    c = rng.standard_normal(V.dof_count)
    # dense reference: physical gradient energy rho*u_r^2 + u_t^2/rho by finite differences
    x, w = np.polynomial.legendre.leggauss(10)

    def per_cell(a, b, cells):
        br = np.linspace(a, b, cells + 1)
        half = 0.5 * np.diff(br)[:, None]
        return (br[:-1, None] + half * (x + 1)).ravel(), (half * w).ravel()
    r, wr = per_cell(1, 2, 3)
    t, wt = per_cell(np.pi / 4, 3 * np.pi / 4, 4)
    R, T = np.meshgrid(r, t, indexing="ij")
    W = np.outer(wr, wt)
    pts = np.stack([R.ravel(), T.ravel()], axis=1)
    h = 1e-6

    def u(P):
        P = np.clip(P, [1, np.pi / 4], [2, 3 * np.pi / 4])
        return V.evaluate(c, P)
    ur = (u(pts + [h, 0]) - u(pts - [h, 0])) / (2 * h)
    ut = (u(pts + [0, h]) - u(pts - [0, h])) / (2 * h)
    energy = np.sum(W.ravel() * (R.ravel() * ur ** 2 + ut ** 2 / R.ravel()))
    assert c @ A @ c == pytest.approx(energy, rel=1e-6)


def test_blocks_symmetric_positive_definite():
    V = build_space([(1, 2), (0.8, 2.3)], (4, 3), 2)
    for gm in (geometry.identity(2), geometry.polar2d()):
        A = assemble_stiffness_block(V, V, gm).toarray()
        assert np.allclose(A, A.T, atol=1e-14)
        assert np.linalg.eigvalsh(A)[0] > 0


def test_rhs_matches_pointwise_quadrature():
    V = build_space([(0, 1), (0, 1)], 4, 2)
    src = random_source(V.box, seed=3)
    rhs = assemble_rhs_block(V, src, geometry.identity(2))
    x, w = np.polynomial.legendre.leggauss(6)
    total = np.zeros(V.dof_count)
    for i in range(4):
        for j in range(4):
            px = (i + 0.5 * (x + 1)) / 4
            py = (j + 0.5 * (x + 1)) / 4
            P = np.stack(np.meshgrid(px, py, indexing="ij"), -1).reshape(-1, 2)
            Wt = np.outer(w, w).ravel() / 64
            total += src.coeffs[i, j] * (Wt @ V.basis_matrix(P))
    assert np.allclose(rhs, total, atol=1e-14)


def test_random_source_is_seeded():
    a = random_source([(0, 1), (0, 1)], seed=7)
    b = random_source([(0, 1), (0, 1)], seed=7)
    c = random_source([(0, 1), (0, 1)], seed=8)
    assert np.array_equal(a.coeffs, b.coeffs)
    assert not np.array_equal(a.coeffs, c.coeffs)
    assert a.coeffs.shape == (4, 4)
    assert np.all((a.coeffs >= 0) & (a.coeffs < 1))
    expected = np.random.Generator(np.random.PCG64(7)).random((4, 4))
    assert np.array_equal(a.coeffs, expected)


def test_nonpositive_jacobian_rejected():
    V = build_space([(-1, 1), (0, 1)], 2, 1)
    with pytest.raises(geometry.GeometryError):
        assemble_stiffness_block(V, V, geometry.polar2d())
