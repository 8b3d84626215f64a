"""Dense checks of the extended-system theory on desk-scale configurations.

The :class:`VBasisOracle` represents the sum space ``V = sum_i V_i`` in a
single spline basis. That is only possible when every patch space is a
subspace of one tensor spline space, which holds for the nested
verification cases in :mod:`subspline.cases`. Everything here uses dense
LAPACK eigensolvers and is guarded to a few thousand unknowns.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .assembly import assemble_pair, assemble_rhs_block, default_rule
from .extended_system import ExtendedSystem, _guard, kernel_dimension
from .krylov import StoppingRule, minres, pcg
from .quadrature import merge_breaks, merged_mesh
from .spline_core import KnotVector, space_from_knots
from .subspace_precond import build_local_solvers, make_preconditioner

ORACLE_LIMIT = 2000
KERNEL_TOL = 1e-9
BOUND_SLACK = 1e-8


class NotNestedError(ValueError):
    """The patch spaces are not all contained in the constructed full space."""


class KernelMismatch(ArithmeticError):
    """Number of dropped eigenvalues differs from the kernel dimension."""


# -- oracle -------------------------------------------------------------------

def _bounding_box(spaces):
    d = spaces[0].dim
    return tuple((min(V.box[k][0] for V in spaces), max(V.box[k][1] for V in spaces))
                 for k in range(d))


def full_space_knots(spaces) -> list[KnotVector]:
    """Knot vectors of a space containing every patch space.

    Breakpoints are the union of all patch breakpoints. Patch boundaries
    strictly inside the bounding box get multiplicity ``p`` so that the
    (C^0) zero extension of a trimmed patch function is representable.
    """
    box = _bounding_box(spaces)
    knots = []
    for k, (a, b) in enumerate(box):
        degs = {V.degree[k] for V in spaces}
        if len(degs) != 1:
            raise NotNestedError("patches have different degrees in direction %d" % k)
        p = degs.pop()
        br = merge_breaks([V.bases[k].breakpoints for V in spaces], a, b)
        tol = 1e-12 * (b - a)
        bounds = np.concatenate([V.box[k] for V in spaces])
        mult = []
        for x in br[1:-1]:
            on_bound = np.any(np.abs(bounds - x) <= tol)
            mult.append(p if on_bound else 1)
        inner = np.repeat(br[1:-1], mult)
        knots.append(KnotVector(np.concatenate([[a] * (p + 1), inner, [b] * (p + 1)]), p))
    return knots


@dataclass(eq=False)
class VBasisOracle:
    """Matrix of the sum map ``S`` in a global basis, with the original-space operators.

    ``sigma`` maps extended coefficients to full-space coefficients.
    ``Q`` is an orthonormal basis (in coefficients) of its range, which is
    the sum space ``V``; ``R = Q^T sigma`` is the matrix of ``S`` in that
    basis. ``A_V`` and ``f_V`` are the stiffness and load restricted to ``V``.
    """

    system: ExtendedSystem
    full_space: object
    A_full: np.ndarray
    M_full: np.ndarray
    cross_mass: list
    sigma: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    A_V: np.ndarray
    f_V: np.ndarray
    exactness_error: float

    @property
    def dim_V(self) -> int:
        return self.Q.shape[1]

    def original_preconditioner(self, prec) -> np.ndarray:
        """Matrix ``B = S Bbar S^*`` in the orthonormal basis of ``V``."""
        Bbar = prec.dense() if hasattr(prec, "dense") else np.asarray(prec)
        return self.R @ Bbar @ self.R.T


def build_oracle(sys: ExtendedSystem, npoints: int = 200, tol: float = 1e-9,
                 seed: int = 12345, rank_tol: float = 1e-10) -> VBasisOracle:
    """Express every patch basis function in a full tensor space.

    Raises :class:`NotNestedError` when evaluating the expansions at
    ``npoints`` random points misses the patch functions by more than ``tol``.
    """
    spaces = sys.spaces
    if not spaces:
        raise NotNestedError("system carries no spaces")
    full = space_from_knots(full_space_knots(spaces), "value_zero", "full")
    if full.dof_count > ORACLE_LIMIT:
        raise ValueError("full space has %d functions, oracle limited to %d"
                         % (full.dof_count, ORACLE_LIMIT))
    rule = sys.rule or default_rule(*spaces)
    gmap = sys.geometry
    mesh = merged_mesh(full, full, spaces)
    blocks = assemble_pair(full, full, gmap, rule, mesh, ("stiffness", "mass"))
    A_full = blocks["stiffness"].toarray()
    M_full = blocks["mass"].toarray()
    cross = [assemble_pair(full, V, gmap, rule, merged_mesh(full, V, spaces), ("mass",))["mass"]
             .toarray() for V in spaces]
    fac = sla.cho_factor(M_full)
    sigma = np.hstack([sla.cho_solve(fac, C) for C in cross])

    rng = np.random.Generator(np.random.PCG64(seed))
    box = np.array(full.box)
    pts = box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random((npoints, full.dim))
    expanded = full.basis_matrix(pts) @ sigma
    direct = np.hstack([V.basis_matrix(pts) for V in spaces])
    err = float(np.max(np.abs(expanded - direct)))
    if not err <= tol:
        raise NotNestedError("patch functions not representable in the full space "
                             "(max error %.3e)" % err)

    U, s, _ = np.linalg.svd(sigma, full_matrices=False)
    r = int(np.sum(s > rank_tol * s[0]))
    Q = U[:, :r]
    R = Q.T @ sigma
    A_V = Q.T @ A_full @ Q
    f_full = assemble_rhs_block(full, sys.source, gmap, rule, mesh)
    return VBasisOracle(sys, full, A_full, M_full, cross, sigma, Q, R,
                        0.5 * (A_V + A_V.T), Q.T @ f_full, err)


# -- spectra ------------------------------------------------------------------

def _dense_prec(prec, n):
    if prec is None:
        return np.eye(n)
    if hasattr(prec, "dense"):
        return prec.dense()
    return np.asarray(prec, dtype=float)


def _sym_eig(B, A):
    """Eigenvalues of ``L^T A L`` with ``B = L L^T``, i.e. of ``B A``."""
    B = 0.5 * (B + B.T)
    try:
        L = np.linalg.cholesky(B)
    except np.linalg.LinAlgError:
        raise ValueError("preconditioner matrix is not positive definite") from None
    H = L.T @ A @ L
    return sla.eigh(0.5 * (H + H.T), eigvals_only=True)


def spectrum_extended(sys: ExtendedSystem, prec, tol: float = KERNEL_TOL,
                      check_kernel: bool = True) -> np.ndarray:
    """Sorted nonzero eigenvalues of ``Tbar = Bbar Abar``.

    Eigenvalues below ``tol`` times the largest are dropped as kernel. When
    the system has spaces, the number dropped must equal the kernel
    dimension of the sum map, otherwise :class:`KernelMismatch` is raised.
    """
    _guard(sys.size)
    ev = _sym_eig(_dense_prec(prec, sys.size), sys.dense())
    keep = ev > tol * ev[-1]
    if check_kernel and sys.spaces:
        nker, _ = kernel_dimension(sys)
        dropped = int(np.sum(~keep))
        if dropped != nker:
            raise KernelMismatch("dropped %d eigenvalues but the kernel has dimension %d"
                                 % (dropped, nker))
    return ev[keep]


def spectrum_original(oracle: VBasisOracle, prec) -> np.ndarray:
    """Sorted eigenvalues of ``T = B A`` on the sum space."""
    B = oracle.original_preconditioner(prec)
    L = np.linalg.cholesky(oracle.A_V)
    H = L.T @ (0.5 * (B + B.T)) @ L
    return sla.eigh(0.5 * (H + H.T), eigvals_only=True)


# -- Krylov equivalence -------------------------------------------------------

def _energy_factor(A, tol=KERNEL_TOL):
    """``G`` with ``||G e|| = sqrt(e^T A e)``; avoids the cancellation of the quadratic form."""
    lam, Z = sla.eigh(0.5 * (A + A.T))
    keep = lam > tol * lam[-1]
    return np.sqrt(lam[keep])[:, None] * Z[:, keep].T


@dataclass
class CGEquivalence:
    extended_errors: np.ndarray
    original_errors: np.ndarray
    coefficient_gap: np.ndarray    # max-norm of sigma u_bar_s - Q u_s per step
    extended_iterations: int
    original_iterations: int
    solution_gap: float = np.nan   # same, for the final iterates

    @property
    def steps(self) -> int:
        return len(self.extended_errors)

    @property
    def max_relative_gap(self) -> float:
        """Largest per-step ``|ebar_s - e_s| / e_s``."""
        e = self.original_errors
        return float(np.max(np.abs(self.extended_errors - e) / e))


def _common_stop(stop):
    return stop or StoppingRule()


def cg_equivalence(oracle: VBasisOracle, prec, stop: StoppingRule | None = None,
                   rel_floor: float = 1e-6) -> CGEquivalence:
    """Run PCG on the extended and on the original system and pair the histories.

    Errors are energy norms of ``u* - u_s``, with the extended one taken in
    the ``Abar`` seminorm. Steps are paired while both runs are active and
    the original error is above ``rel_floor`` times the initial error; below
    that the two floating-point recurrences drift apart at the level of
    ``eps`` times the condition number, which is not what is being tested.
    """
    sys = oracle.system
    stop = _common_stop(stop)
    Abar = sys.dense()
    Bbar = _dense_prec(prec, sys.size)
    ext = pcg(Abar, Bbar, sys.rhs, stop, keep_iterates=True)
    B = oracle.original_preconditioner(Bbar)
    orig = pcg(oracle.A_V, B, oracle.f_V, stop, keep_iterates=True)

    u_star = np.linalg.solve(oracle.A_V, oracle.f_V)
    ubar_star = oracle.R.T @ np.linalg.solve(oracle.R @ oracle.R.T, u_star)
    G, Gbar = _energy_factor(oracle.A_V), _energy_factor(Abar)
    ee, eo, gap = [], [], []
    floor = None
    for ub, u in zip(ext.iterates, orig.iterates):
        e = float(np.linalg.norm(G @ (u_star - u)))
        floor = rel_floor * e if floor is None else floor
        if eo and e <= floor:
            break
        eo.append(e)
        ee.append(float(np.linalg.norm(Gbar @ (ubar_star - ub))))
        gap.append(_full_gap(oracle, ub, u))
    return CGEquivalence(np.array(ee), np.array(eo), np.array(gap), ext.iterations,
                         orig.iterations, _full_gap(oracle, ext.solution, orig.solution))


def _full_gap(oracle, ubar, u):
    """Max-norm distance of the two iterates as full-space coefficient vectors."""
    return float(np.max(np.abs(oracle.sigma @ ubar - oracle.Q @ u)))


@dataclass
class MinresEquivalence:
    extended_bnorms: np.ndarray
    original_bnorms: np.ndarray

    @property
    def max_gap(self) -> float:
        return float(np.max(np.abs(self.extended_bnorms - self.original_bnorms)))


def minres_equivalence(oracle: VBasisOracle, prec, stop: StoppingRule | None = None,
                       min_norm: float = 0.0) -> MinresEquivalence:
    """Preconditioner-norm residuals of MINRES on both systems, per step.

    Norms are recomputed explicitly from the iterates as ``sqrt(r^T B r)``.
    """
    sys = oracle.system
    stop = _common_stop(stop)
    Abar = sys.dense()
    Bbar = _dense_prec(prec, sys.size)
    B = oracle.original_preconditioner(Bbar)
    ext = minres(Abar, Bbar, sys.rhs, stop, keep_iterates=True)
    orig = minres(oracle.A_V, B, oracle.f_V, stop, keep_iterates=True)
    be, bo = [], []
    for ub, u in zip(ext.iterates, orig.iterates):
        r = oracle.f_V - oracle.A_V @ u
        no = float(np.sqrt(max(r @ B @ r, 0.0)))
        if no <= min_norm:
            break
        rb = sys.rhs - Abar @ ub
        bo.append(no)
        be.append(float(np.sqrt(max(rb @ Bbar @ rb, 0.0))))
    return MinresEquivalence(np.array(be), np.array(bo))


# -- constants and bounds -----------------------------------------------------

@dataclass
class Constants:
    K: float
    lambda_min: float
    lambda_max: float
    C: np.ndarray
    C_norm: float


def compute_constants(sys: ExtendedSystem, local_kind: str = "exact_cholesky") -> Constants:
    """Stable-decomposition, local-stability and Cauchy-Schwarz constants.

    ``K`` always uses exact local solvers; ``lambda_min``/``lambda_max``
    are the extreme eigenvalues of ``B_i A_ii`` over all blocks for the
    requested local solver kind.
    """
    _guard(sys.size)
    exact = make_preconditioner(sys, "psc", "exact_cholesky")
    sig = spectrum_extended(sys, exact, check_kernel=False)
    K = float(1.0 / np.sqrt(sig[0]))

    solvers = build_local_solvers(sys, local_kind)
    factors, lmin, lmax = [], np.inf, -np.inf
    for i, s in enumerate(solvers):
        Aii = sys.blocks[i][i].toarray()
        L = np.linalg.cholesky(0.5 * (Aii + Aii.T))
        factors.append(L)
        Bi = s.dense()
        H = L.T @ Bi @ L
        ev = sla.eigh(0.5 * (H + H.T), eigvals_only=True)
        lmin, lmax = min(lmin, ev[0]), max(lmax, ev[-1])

    n = sys.nblocks
    C = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            Aij = sys.blocks[i][j]
            if Aij.nnz == 0:
                continue
            X = sla.solve_triangular(factors[i], Aij.toarray(), lower=True)
            X = sla.solve_triangular(factors[j], X.T, lower=True).T
            C[i, j] = C[j, i] = np.linalg.norm(X, 2)
    C_norm = float(np.linalg.norm(C, 2))
    return Constants(K, float(lmin), float(lmax), C, C_norm)


def error_operator_norm(sys: ExtendedSystem, prec, tol: float = KERNEL_TOL) -> float:
    """``||I - B Abar||`` in the ``Abar`` seminorm, restricted to the range of ``Abar``."""
    Abar = sys.dense()
    lam, Z = sla.eigh(0.5 * (Abar + Abar.T))
    keep = lam > tol * lam[-1]
    lam, Z = lam[keep], Z[:, keep]
    E = np.eye(sys.size) - _dense_prec(prec, sys.size) @ Abar
    root = np.sqrt(lam)
    M = (root[:, None] * (Z.T @ E @ Z)) / root[None, :]
    return float(np.linalg.norm(M, 2))


@dataclass
class BoundCheck:
    name: str
    measured: float
    bound: float
    relation: str          # "<=", ">=" or "=="
    checked: bool = True

    @property
    def slack(self) -> float:
        if self.relation == ">=":
            return self.measured - self.bound
        if self.relation == "==":
            return -abs(self.measured - self.bound)
        return self.bound - self.measured

    @property
    def ok(self) -> bool:
        return (not self.checked) or self.slack >= -BOUND_SLACK


@dataclass
class DiagnosticsReport:
    local_kind: str
    sigma_T_ext: np.ndarray
    constants: Constants
    checks: dict
    sigma_T: np.ndarray | None = None
    E_ssc_norm: float | None = None
    info: dict = field(default_factory=dict)

    @property
    def K(self):
        return self.constants.K

    @property
    def lambda_min(self):
        return self.constants.lambda_min

    @property
    def lambda_max(self):
        return self.constants.lambda_max

    @property
    def C_matrix(self):
        return self.constants.C

    @property
    def C_norm(self):
        return self.constants.C_norm

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks.values())

    def __getattr__(self, name):
        if name.endswith("_ok") and name[:-3] in self.__dict__.get("checks", {}):
            return self.checks[name[:-3]].ok
        raise AttributeError(name)

    def rows(self):
        out = [("local_kind", self.local_kind), ("K", self.K),
               ("lambda_min", self.lambda_min), ("lambda_max", self.lambda_max),
               ("C_norm", self.C_norm),
               ("sigma_min", self.sigma_T_ext[0]), ("sigma_max", self.sigma_T_ext[-1])]
        if self.E_ssc_norm is not None:
            out.append(("E_ssc_norm", self.E_ssc_norm))
        out.extend(self.info.items())
        return out

    def to_text(self) -> str:
        lines = ["%-12s %s" % (k, _fmt(v)) for k, v in self.rows()]
        lines.append("")
        lines.append("%-10s %-3s %22s %22s %12s  %s" % ("check", "rel", "measured", "bound",
                                                      "slack", "status"))
        for c in self.checks.values():
            status = ("ok" if c.ok else "FAIL") if c.checked else "skipped"
            lines.append("%-10s %-3s %22.15e %22.15e %12.3e  %s"
                         % (c.name, c.relation, c.measured, c.bound, c.slack, status))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "relation", "measured", "bound", "slack", "checked", "ok"])
        for c in self.checks.values():
            w.writerow([c.name, c.relation, repr(c.measured), repr(c.bound), repr(c.slack),
                        c.checked, c.ok])
        return buf.getvalue()


def _fmt(v):
    return "%.15g" % v if isinstance(v, (float, np.floating)) else str(v)


def verify_bounds(sys: ExtendedSystem, local_kind: str = "exact_cholesky",
                  oracle: VBasisOracle | None = None) -> DiagnosticsReport:
    """Measure the PSC spectrum and SSC contraction and compare them with the bounds."""
    const = compute_constants(sys, local_kind)
    psc = make_preconditioner(sys, "psc", local_kind)
    sig = spectrum_extended(sys, psc)
    K2 = const.K ** 2
    lmin, lmax, cn = const.lambda_min, const.lambda_max, const.C_norm
    checks = {
        "Tp_lower": BoundCheck("Tp_lower", float(sig[0]), lmin / K2, ">="),
        "Tp_upper": BoundCheck("Tp_upper", float(sig[-1]), lmax * cn, "<="),
        "PSC_bound": BoundCheck("PSC_bound", float(sig[-1] / sig[0]), K2 * cn * lmax / lmin, "<="),
    }
    fwd = make_preconditioner(sys, "ssc_forward", local_kind, solvers=psc.solvers)
    enorm = error_operator_norm(sys, fwd)
    es_bound = 1.0 - lmin * (2.0 - lmax) / (K2 * (1.0 + lmax * cn) ** 2)
    checks["Es_upper"] = BoundCheck("Es_upper", enorm, es_bound, "<=", checked=lmax < 2)
    sigma_T = spectrum_original(oracle, psc) if oracle is not None else None
    return DiagnosticsReport(local_kind, sig, const, checks, sigma_T, enorm,
                             dict(blocks=sys.nblocks, dofs=sys.size))
