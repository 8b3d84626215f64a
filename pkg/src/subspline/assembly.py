"""Galerkin blocks for the pulled-back Poisson problem on pairs of patches.

Every block is integrated cell by cell on a mesh that refines the knot
meshes of both spaces, so each quadrature cell lies inside one knot span of
each space. Local matrices are computed for all cells at once and scattered
into a sparse block in a fixed cell order, which makes the result
independent of how many workers assemble other blocks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import GeometryError, GeometryMap, map_jacobian
from .quadrature import GaussRule, MergedMesh, cell_points, gauss_rule, merged_mesh, refine_mesh
from .spline_core import TensorSplineSpace, basis_derivs

SOURCE_PARTS = 4


@dataclass(frozen=True, eq=False)
class SourceField:
    """Piecewise-constant function on a uniform tessellation of a box.

    Coefficients come from numpy's PCG64 generator, drawn i.i.d. uniform on
    ``[0, 1)`` in C order over the ``parts**d`` cells.
    """

    coeffs: np.ndarray
    box: tuple
    seed: int | None = None

    @property
    def dim(self) -> int:
        return self.coeffs.ndim

    def breaks(self, k: int) -> np.ndarray:
        a, b = self.box[k]
        return np.linspace(a, b, self.coeffs.shape[k] + 1)

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        idx = []
        for k, (a, b) in enumerate(self.box):
            m = self.coeffs.shape[k]
            i = np.floor((pts[:, k] - a) / (b - a) * m).astype(int)
            idx.append(np.clip(i, 0, m - 1))
        return self.coeffs[tuple(idx)]


def random_source(box, seed: int = 0, parts: int = SOURCE_PARTS) -> SourceField:
    box = tuple((float(a), float(b)) for a, b in box)
    rng = np.random.Generator(np.random.PCG64(seed))
    coeffs = rng.random((parts,) * len(box))
    return SourceField(coeffs, box, seed)


def constant_source(box, value: float = 1.0) -> SourceField:
    box = tuple((float(a), float(b)) for a, b in box)
    return SourceField(np.full((1,) * len(box), float(value)), box, None)


def default_rule(*spaces) -> GaussRule:
    return gauss_rule(max(max(s.degree) for s in spaces) + 1)


# -- tensor-product helpers ---------------------------------------------------

def _outer(factors):
    """Tensor product of per-direction tables ``(ncells_k, q_k, m_k)``.

    Returns ``(C, Q, M)`` with cells, points and local functions each
    enumerated row-major over the directions.
    """
    d = len(factors)
    out = np.ones(())
    for k, f in enumerate(factors):
        shape = [1] * (3 * d)
        shape[k], shape[d + k], shape[2 * d + k] = f.shape
        out = out * f.reshape(shape)
    C = int(np.prod([f.shape[0] for f in factors]))
    Q = int(np.prod([f.shape[1] for f in factors]))
    return out.reshape(C, Q, -1)


def _direction_table(basis, breaks, x, nderiv):
    kv = basis.knot_vector
    nc, q = x.shape
    mid = 0.5 * (breaks[:-1] + breaks[1:])
    span = kv.find_span(mid)
    vals = basis_derivs(kv, np.repeat(span, q), x.ravel(), nderiv)
    vals = vals.reshape(nc, q, nderiv + 1, kv.p + 1)
    idx = (span - kv.p)[:, None] + np.arange(kv.p + 1)
    lo, hi = basis.kept
    kept = np.where((idx >= lo) & (idx < hi), idx - lo, -1)
    return vals, kept


def _global_indices(kept_tables, shape):
    """Flat row-major dof index per (cell, local function); -1 when trimmed."""
    d = len(kept_tables)
    flat = np.zeros(())
    valid = np.ones((), dtype=bool)
    stride = 1
    for k in reversed(range(d)):
        t = kept_tables[k]
        view = [1] * (2 * d)
        view[k], view[d + k] = t.shape
        t = t.reshape(view)
        flat = flat + np.where(t >= 0, t, 0) * stride
        valid = valid & (t >= 0)
        stride *= shape[k]
    ncell = int(np.prod([t.shape[0] for t in kept_tables]))
    flat = np.where(valid, flat, -1).astype(np.int64)
    return flat.reshape(ncell, -1)


class _PairTables:
    """Quadrature data on a mesh: coordinates, weights and basis tables."""

    def __init__(self, mesh: MergedMesh, rule: GaussRule, gmap: GeometryMap):
        self.mesh = mesh
        d = len(mesh.breaks)
        self.pts, self.wts = zip(*(cell_points(br, rule) for br in mesh.breaks))
        coords = [_outer([x[:, :, None] if j == k else np.ones((x.shape[0], x.shape[1], 1))
                          for j, x in enumerate(self.pts)])[:, :, 0] for k in range(d)]
        self.coords = np.stack(coords, axis=-1)
        w = _outer([wk[:, :, None] for wk in self.wts])[:, :, 0]
        J, detJ = map_jacobian(gmap, self.coords)
        if np.any(detJ <= 0):
            bad = self.coords[detJ <= 0][0]
            raise GeometryError("nonpositive Jacobian determinant at %s" % (bad,))
        self.measure = w * detJ
        if gmap.is_affine:
            self.metric = None
        else:
            Jinv = np.linalg.inv(J)
            self.metric = np.einsum("cqik,cqjk->cqij", Jinv, Jinv) * self.measure[:, :, None, None]

    def space_tables(self, space: TensorSplineSpace, nderiv: int):
        per_dir = [_direction_table(b, br, x, nderiv)
                   for b, br, x in zip(space.bases, self.mesh.breaks, self.pts)]
        vals = [t[0] for t in per_dir]
        rows = _global_indices([t[1] for t in per_dir], space.shape)
        value = _outer([v[:, :, 0, :] for v in vals])
        grads = None
        if nderiv:
            d = len(vals)
            grads = np.stack([_outer([v[:, :, 1 if k == m else 0, :] for k, v in enumerate(vals)])
                              for m in range(d)], axis=-1)
        return value, grads, rows


def _scatter(local, rows, cols, shape):
    C, a, b = local.shape
    r = np.broadcast_to(rows[:, :, None], (C, a, b)).ravel()
    c = np.broadcast_to(cols[:, None, :], (C, a, b)).ravel()
    v = local.ravel()
    ok = (r >= 0) & (c >= 0)
    mat = sp.coo_matrix((v[ok], (r[ok], c[ok])), shape=shape).tocsr()
    mat.sum_duplicates()
    return mat


def assemble_pair(space_i, space_j, gmap, rule=None, mesh=None, kinds=("stiffness",)):
    """Blocks for the pair ``(space_i, space_j)`` as a dict keyed by kind.

    ``mesh`` defaults to the merged mesh of the two spaces; pass a finer
    common mesh to integrate several blocks with one quadrature.
    """
    shape = (space_i.dof_count, space_j.dof_count)
    if mesh is None:
        mesh = merged_mesh(space_i, space_j)
    if mesh is None:
        return {k: sp.csr_matrix(shape) for k in kinds}
    rule = rule or default_rule(space_i, space_j)
    tab = _PairTables(mesh, rule, gmap)
    nderiv = 1 if "stiffness" in kinds else 0
    vi, gi, rows = tab.space_tables(space_i, nderiv)
    if space_j is space_i:
        vj, gj, cols = vi, gi, rows
    else:
        vj, gj, cols = tab.space_tables(space_j, nderiv)
    out = {}
    for kind in kinds:
        if kind == "stiffness":
            C, Q, a, d = gi.shape
            if tab.metric is None:
                right = gj * tab.measure[:, :, None, None]
            else:
                right = np.einsum("cqkl,cqbl->cqbk", tab.metric, gj)
            left = gi.transpose(0, 2, 1, 3).reshape(C, a, Q * d)
            right = right.transpose(0, 1, 3, 2).reshape(C, Q * d, -1)
            local = left @ right
        elif kind == "mass":
            C, Q, a = vi.shape
            local = vi.transpose(0, 2, 1) @ (vj * tab.measure[:, :, None])
        else:
            raise ValueError("unknown block kind %r" % (kind,))
        out[kind] = _scatter(local, rows, cols, shape)
    return out


def assemble_stiffness_block(space_i, space_j, gmap, rule=None, mesh=None):
    """Cross-stiffness ``int grad(phi_i) . grad(phi_j)`` over the overlap, pulled back."""
    return assemble_pair(space_i, space_j, gmap, rule, mesh, ("stiffness",))["stiffness"]


def assemble_mass_block(space_i, space_j, gmap, rule=None, mesh=None):
    """Cross-mass ``int phi_i phi_j`` over the overlap, pulled back."""
    return assemble_pair(space_i, space_j, gmap, rule, mesh, ("mass",))["mass"]


def assemble_rhs_block(space, source: SourceField, gmap, rule=None, mesh=None) -> np.ndarray:
    """Load vector ``int f phi`` with quadrature cells split at the source tessellation."""
    if mesh is None:
        mesh = merged_mesh(space, space)
    mesh = refine_mesh(mesh, [source.breaks(k) for k in range(space.dim)])
    rule = rule or default_rule(space)
    tab = _PairTables(mesh, rule, gmap)
    v, _, rows = tab.space_tables(space, 0)
    grids = np.meshgrid(*[0.5 * (br[:-1] + br[1:]) for br in mesh.breaks], indexing="ij")
    centers = np.stack([g.ravel() for g in grids], axis=-1)
    fval = source(centers)
    local = np.einsum("cqa,cq->ca", v, tab.measure * fval[:, None])
    r = rows.ravel()
    ok = r >= 0
    return np.bincount(r[ok], weights=local.ravel()[ok], minlength=space.dof_count)
