"""The singular block system obtained from a generating system of patches.

The unknown is a tuple of coefficient vectors, one per patch, and the system
matrix has the cross-stiffness blocks ``A_ij`` between patches. The sum of
the patch functions is the represented solution; tuples summing to zero
form the kernel.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .assembly import SourceField, assemble_pair, assemble_rhs_block, default_rule, random_source
from .geometry import GeometryMap, identity
from .quadrature import GaussRule, gauss_rule, merged_mesh

DENSE_LIMIT = 4000


class DenseGuardError(ValueError):
    """Raised when a dense routine is asked to handle too many unknowns."""


@dataclass(eq=False)
class ExtendedSystem:
    """Block matrix ``[A_ij]``, block right-hand side and block offsets.

    ``spaces`` may be empty for purely algebraic systems built with
    :meth:`from_matrix`.
    """

    blocks: list
    rhs: np.ndarray
    spaces: tuple = ()
    geometry: GeometryMap | None = None
    mass_blocks: list | None = None
    source: SourceField | None = None
    rule: GaussRule | None = None
    quad_mesh: str = "common"
    _matrix: sp.csr_matrix = field(default=None, repr=False)
    _columns: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        sizes = [self.blocks[i][i].shape[0] for i in range(len(self.blocks))]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        self.rhs = np.asarray(self.rhs, dtype=float)
        if self.rhs.shape != (self.size,):
            raise ValueError("rhs has length %d, expected %d" % (self.rhs.size, self.size))
        if self._matrix is None:
            self._matrix = sp.bmat(self.blocks, format="csr")

    @classmethod
    def from_matrix(cls, A, sizes, rhs=None):
        """Partition a symmetric matrix into blocks of the given sizes."""
        A = sp.csr_matrix(A)
        off = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        if off[-1] != A.shape[0]:
            raise ValueError("block sizes do not add up to the matrix size")
        blocks = [[A[off[i]:off[i + 1], off[j]:off[j + 1]].tocsr() for j in range(len(sizes))]
                  for i in range(len(sizes))]
        rhs = np.zeros(A.shape[0]) if rhs is None else rhs
        return cls(blocks, rhs, _matrix=A)

    @property
    def nblocks(self) -> int:
        return len(self.blocks)

    @property
    def size(self) -> int:
        return int(self.offsets[-1])

    @property
    def block_sizes(self) -> list[int]:
        return [int(s) for s in np.diff(self.offsets)]

    @property
    def matrix(self) -> sp.csr_matrix:
        return self._matrix

    def block_slice(self, i: int) -> slice:
        return slice(self.offsets[i], self.offsets[i + 1])

    def split(self, x):
        """View ``x`` as a list of per-block vectors."""
        return [x[self.block_slice(i)] for i in range(self.nblocks)]

    def block_column(self, i: int) -> sp.csr_matrix:
        """Rows of all blocks against block ``i``, i.e. ``[A_0i; ...; A_(n-1)i]``."""
        if i not in self._columns:
            self._columns[i] = sp.vstack([self.blocks[k][i] for k in range(self.nblocks)],
                                         format="csr")
        return self._columns[i]

    def mass_matrix(self) -> sp.csr_matrix:
        if self.mass_blocks is None:
            if not self.spaces:
                raise ValueError("system has no spaces to assemble a mass matrix from")
            self.mass_blocks = assemble_blocks(self.spaces, self.geometry, self.rule, "mass",
                                               self.quad_mesh)
        return sp.bmat(self.mass_blocks, format="csr")

    def dense(self) -> np.ndarray:
        _guard(self.size)
        return self._matrix.toarray()


def apply_extended(sys: ExtendedSystem, x) -> np.ndarray:
    """Block mat-vec ``(A x)_i = sum_j A_ij x_j``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.size,):
        raise ValueError("vector of length %d for a system of size %d" % (x.size, sys.size))
    return sys.matrix @ x


def quadrature_mesh(spaces, i, j, quad_mesh="common"):
    """Integration mesh for block ``(i, j)``; None when the boxes do not overlap."""
    return _common_meshes(spaces, quad_mesh)(i, j)


def _common_meshes(spaces, quad_mesh):
    if quad_mesh == "pairwise":
        return lambda i, j: merged_mesh(spaces[i], spaces[j])
    if quad_mesh == "common":
        return lambda i, j: merged_mesh(spaces[i], spaces[j], spaces)
    raise ValueError("quad_mesh must be 'common' or 'pairwise'")


def assemble_blocks(spaces, gmap, rule: GaussRule | None = None, kind="stiffness",
                    quad_mesh="common"):
    """All ``n x n`` blocks of one kind; lower blocks are transposes of upper ones."""
    out = assemble_all(spaces, gmap, rule, (kind,), quad_mesh)
    return out[kind]


def assemble_all(spaces, gmap, rule=None, kinds=("stiffness",), quad_mesh="common"):
    n = len(spaces)
    rule = rule or default_rule(*spaces)
    mesh_of = _common_meshes(spaces, quad_mesh)
    out = {k: [[None] * n for _ in range(n)] for k in kinds}
    for i in range(n):
        for j in range(i, n):
            blocks = assemble_pair(spaces[i], spaces[j], gmap, rule, mesh_of(i, j), kinds)
            for k in kinds:
                out[k][i][j] = blocks[k]
                out[k][j][i] = blocks[k] if i == j else blocks[k].T.tocsr()
    return out


def build_extended_system(spaces, gmap: GeometryMap | None = None, source: SourceField | None = None,
                          quad_points: int | None = None, with_mass: bool = False,
                          quad_mesh: str = "common", seed: int = 0) -> ExtendedSystem:
    """Assemble stiffness blocks and load blocks for a list of patches.

    ``source`` defaults to a random piecewise-constant field anchored to the
    first space's box. With ``quad_mesh="common"`` every block is integrated
    on the union of all patch meshes, so all blocks share one discrete
    bilinear form even when the geometry makes quadrature inexact.
    """
    spaces = tuple(spaces)
    if not spaces:
        raise ValueError("need at least one space")
    gmap = gmap or identity(spaces[0].dim)
    rule = gauss_rule(quad_points) if quad_points else default_rule(*spaces)
    if source is None:
        source = random_source(spaces[0].box, seed)
    kinds = ("stiffness", "mass") if with_mass else ("stiffness",)
    blocks = assemble_all(spaces, gmap, rule, kinds, quad_mesh)
    mesh_of = _common_meshes(spaces, quad_mesh)
    rhs = np.concatenate([assemble_rhs_block(V, source, gmap, rule, mesh_of(i, i))
                          for i, V in enumerate(spaces)])
    return ExtendedSystem(blocks["stiffness"], rhs, spaces, gmap,
                          blocks.get("mass"), source, rule, quad_mesh)


def evaluate_sum(sys: ExtendedSystem, u, points) -> np.ndarray:
    """Value of ``sum_i u_i`` at parametric points; patches not containing a point add 0."""
    u = np.asarray(u, dtype=float)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    total = np.zeros(pts.shape[0])
    for V, ui in zip(sys.spaces, sys.split(u)):
        total += V.evaluate(ui, pts)
    return total


def _guard(n):
    if n > DENSE_LIMIT:
        raise DenseGuardError("dense routine limited to %d unknowns, got %d" % (DENSE_LIMIT, n))


def kernel_dimension(sys: ExtendedSystem, tol: float = 1e-10):
    """Dimension of the kernel of the sum map and of the represented space.

    Counts eigenvalues of the extended mass matrix below ``tol`` times the
    largest one, since ``u^T M u`` is the squared L2 norm of the sum.
    Returns ``(dim_kernel, dim_V)``.
    """
    _guard(sys.size)
    M = sys.mass_matrix().toarray()
    ev = sla.eigh(0.5 * (M + M.T), eigvals_only=True)
    nker = int(np.sum(ev < tol * ev[-1]))
    return nker, sys.size - nker
