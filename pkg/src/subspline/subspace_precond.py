"""Block-Jacobi (PSC) and block-Gauss-Seidel (SSC) preconditioners.

Both are built from local solvers ``B_i`` for the diagonal blocks ``A_ii``
of an :class:`~subspline.extended_system.ExtendedSystem`. An SSC application
follows a sequence of block indices; each step solves on one block and
updates the running residual with the corresponding block column.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

LOCAL_KINDS = ("exact_cholesky", "jacobi_diagonal")
PRECOND_KINDS = ("psc", "ssc_forward", "ssc_backward", "ssc_symmetric")
# config names used by the benchmark tables
CONFIG_NAMES = {"none": None, "jacobi": "psc", "gauss_seidel": "ssc_symmetric"}
DENSE_CHOLESKY_CAP = 20000


class NonSPDError(ArithmeticError):
    """Raised when a diagonal block cannot be Cholesky factorized."""


@dataclass(eq=False)
class LocalSolver:
    index: int
    kind: str
    size: int
    factor: object = None
    inv_diag: np.ndarray | None = None

    def solve(self, r: np.ndarray) -> np.ndarray:
        if self.kind == "jacobi_diagonal":
            return self.inv_diag * r
        if isinstance(self.factor, tuple):
            return sla.cho_solve(self.factor, r, check_finite=False)
        return self.factor.solve(r)

    def dense(self) -> np.ndarray:
        """Matrix of ``B_i``."""
        if self.kind == "jacobi_diagonal":
            return np.diag(self.inv_diag)
        return self.solve(np.eye(self.size))


def build_local_solvers(sys, kind: str = "exact_cholesky",
                        dense_cap: int = DENSE_CHOLESKY_CAP) -> list[LocalSolver]:
    """One local solver per diagonal block.

    Exact solvers use a dense Cholesky factorization up to ``dense_cap``
    rows and a sparse LU factorization above.
    """
    if kind not in LOCAL_KINDS:
        raise ValueError("unknown local solver kind %r" % (kind,))
    solvers = []
    for i in range(sys.nblocks):
        Aii = sys.blocks[i][i]
        n = Aii.shape[0]
        if kind == "jacobi_diagonal":
            diag = Aii.diagonal()
            if np.any(diag <= 0):
                raise NonSPDError("block %d has a nonpositive diagonal entry" % i)
            solvers.append(LocalSolver(i, kind, n, inv_diag=1.0 / diag))
            continue
        if n <= dense_cap:
            try:
                fac = sla.cho_factor(Aii.toarray(), lower=True, check_finite=False)
            except sla.LinAlgError as exc:
                raise NonSPDError("Cholesky of block %d failed: %s" % (i, exc)) from None
        else:
            fac = spla.splu(sp.csc_matrix(Aii))
        solvers.append(LocalSolver(i, kind, n, factor=fac))
    return solvers


def apply_psc(prec, r) -> np.ndarray:
    """Block-Jacobi application ``z_i = B_i r_i``."""
    sys = prec.system
    z = np.empty_like(r, dtype=float)
    for s in prec.solvers:
        sl = sys.block_slice(s.index)
        z[sl] = s.solve(r[sl])
    return z


def apply_ssc(prec, r, sequence) -> np.ndarray:
    """Successive subspace correction along ``sequence`` of block indices.

    Equivalent to ``w = 0; for i in sequence: t = B_i v; w += t; v -= A t``
    where ``t`` is nonzero on block ``i`` only.
    """
    sys = prec.system
    if len(sequence) == 0:
        raise ValueError("empty correction sequence")
    v = np.array(r, dtype=float)
    w = np.zeros_like(v)
    for i in sequence:
        if not 0 <= i < sys.nblocks:
            raise IndexError("block index %d out of range" % i)
        sl = sys.block_slice(i)
        t = prec.solvers[i].solve(v[sl])
        w[sl] += t
        v -= sys.block_column(i) @ t
    return w


def sweep(kind: str, n: int) -> tuple[int, ...]:
    """Block order of an SSC sweep; the symmetric one is palindromic."""
    fwd = tuple(range(n))
    if kind == "ssc_forward":
        return fwd
    if kind == "ssc_backward":
        return fwd[::-1]
    if kind == "ssc_symmetric":
        return fwd + fwd[-2::-1]
    raise ValueError("no sweep for %r" % (kind,))


@dataclass(eq=False)
class Preconditioner:
    kind: str
    solvers: list
    system: object

    def __post_init__(self):
        if self.kind not in PRECOND_KINDS:
            raise ValueError("unknown preconditioner %r" % (self.kind,))
        self.sequence = None if self.kind == "psc" else sweep(self.kind, self.system.nblocks)

    def __call__(self, r):
        if self.kind == "psc":
            return apply_psc(self, r)
        return apply_ssc(self, r, self.sequence)

    @property
    def is_symmetric(self) -> bool:
        return self.kind in ("psc", "ssc_symmetric")

    def dense(self) -> np.ndarray:
        """Matrix of the preconditioner, one application per unit vector."""
        N = self.system.size
        if N > 4000:
            raise ValueError("dense preconditioner limited to 4000 unknowns")
        if self.kind == "psc":
            return sla.block_diag(*[s.dense() for s in self.solvers])
        return np.column_stack([self(e) for e in np.eye(N)])


def make_preconditioner(sys, kind: str = "ssc_symmetric",
                        local_kind: str = "exact_cholesky", solvers=None) -> Preconditioner:
    if solvers is None:
        solvers = build_local_solvers(sys, local_kind)
    return Preconditioner(kind, solvers, sys)


def preconditioner_from_name(sys, name: str, local_kind: str = "exact_cholesky"):
    """``none`` gives None; ``jacobi`` PSC; ``gauss_seidel`` symmetric SSC."""
    if name not in CONFIG_NAMES:
        raise ValueError("preconditioner must be one of %s" % sorted(CONFIG_NAMES))
    kind = CONFIG_NAMES[name]
    return None if kind is None else make_preconditioner(sys, kind, local_kind)
