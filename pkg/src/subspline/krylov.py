"""CG, preconditioned CG and preconditioned MINRES for consistent singular systems.

All solvers stop when the Euclidean norm of the unpreconditioned residual
``b - A x`` drops below ``tol`` or after ``max_iters`` iterations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


ROUNDOFF = 64 * np.finfo(float).eps


class NonPSDError(ArithmeticError):
    """Raised on a breakdown that indicates an indefinite operator."""


@dataclass(frozen=True)
class StoppingRule:
    tol: float = 1e-11
    max_iters: int = 1000

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class SolveReport:
    iterations: int
    final_residual: float
    residual_history: list
    converged: bool
    solution: np.ndarray
    # MINRES only: preconditioner-norm residuals from the recurrence
    bnorm_history: list = field(default_factory=list)
    iterates: list = field(default_factory=list, repr=False)
    residual_norm: str = "euclidean, unpreconditioned"
    note: str | None = None


def as_operator(A) -> Callable[[np.ndarray], np.ndarray]:
    if A is None:
        return lambda x: x.copy()
    if callable(A):
        return A
    return lambda x: A @ x


def cg(apply_A, b, stop: StoppingRule = StoppingRule(), x0=None, keep_iterates=False) -> SolveReport:
    """Unpreconditioned conjugate gradients."""
    return pcg(apply_A, None, b, stop, x0, keep_iterates)


def pcg(apply_A, apply_B, b, stop: StoppingRule = StoppingRule(), x0=None,
        keep_iterates=False) -> SolveReport:
    """Preconditioned conjugate gradients for a symmetric PSD ``A`` and SPD ``B``.

    ``b`` must lie in the range of ``A``. With ``keep_iterates`` every iterate
    (including ``x0``) is stored in the report.
    """
    A = as_operator(apply_A)
    B = as_operator(apply_B)
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - A(x) if x0 is not None else b.copy()
    hist = [float(np.linalg.norm(r))]
    iterates = [x.copy()] if keep_iterates else []
    z = B(r)
    rz = float(r @ z)
    p = z.copy()
    converged = hist[0] < stop.tol
    it = 0
    restarted = False
    note = None
    anorm = 0.0  # running lower estimate of ||A||, scales the roundoff floor
    while not converged and it < stop.max_iters:
        q = A(p)
        pq = float(p @ q)
        pn = np.linalg.norm(p)
        anorm = max(anorm, np.linalg.norm(q) / pn) if pn > 0 else anorm
        floor = ROUNDOFF * anorm * pn * pn
        if pq < -floor or not np.isfinite(pq):
            raise NonPSDError("p^T A p = %g at iteration %d" % (pq, it + 1))
        if pq <= floor:
            # curvature lost in roundoff (direction nearly in the kernel): restart
            # along the preconditioned residual, give up if that is degenerate too
            if restarted or rz <= 0:
                note = "stagnated at iteration %d" % it
                break
            p, restarted = z.copy(), True
            continue
        restarted = False
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        it += 1
        hist.append(float(np.linalg.norm(r)))
        if keep_iterates:
            iterates.append(x.copy())
        if hist[-1] < stop.tol:
            converged = True
            break
        z = B(r)
        rz_new = float(r @ z)
        if rz_new < 0:
            raise NonPSDError("preconditioner is not positive definite")
        p = z + (rz_new / rz) * p
        rz = rz_new
    return SolveReport(it, hist[-1], hist, converged, x, iterates=iterates, note=note)


def minres(apply_A, apply_B, b, stop: StoppingRule = StoppingRule(), x0=None,
           keep_iterates=False) -> SolveReport:
    """Preconditioned MINRES (Lanczos with Givens QR) for symmetric ``A``, SPD ``B``.

    The iterate minimizes ``sqrt(r^T B r)`` over the Krylov space; those
    norms are stored in ``bnorm_history``. ``residual_history`` holds the
    Euclidean norms of the explicitly recomputed residual.
    """
    A = as_operator(apply_A)
    B = as_operator(apply_B)
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r1 = b - A(x)
    hist = [float(np.linalg.norm(r1))]
    iterates = [x.copy()] if keep_iterates else []
    y = B(r1)
    beta1 = float(r1 @ y)
    if beta1 < 0:
        raise NonPSDError("preconditioner is not positive definite")
    beta1 = np.sqrt(beta1)
    bhist = [beta1]
    converged = hist[0] < stop.tol
    if converged or beta1 == 0:
        return SolveReport(0, hist[0], hist, converged, x, bhist, iterates)

    eps = np.finfo(float).eps
    oldb, beta, dbar, epsln, phibar = 0.0, beta1, 0.0, 0.0, beta1
    cs, sn = -1.0, 0.0
    w = np.zeros_like(b)
    w2 = np.zeros_like(b)
    r2 = r1
    it = 0
    while it < stop.max_iters:
        it += 1
        v = y / beta
        y = A(v)
        if it >= 2:
            y = y - (beta / oldb) * r1
        alfa = float(v @ y)
        y = y - (alfa / beta) * r2
        r1, r2 = r2, y
        y = B(r2)
        oldb = beta
        bb = float(r2 @ y)
        if bb < 0:
            raise NonPSDError("preconditioner is not positive definite")
        beta = np.sqrt(bb)

        oldeps = epsln
        delta = cs * dbar + sn * alfa
        gbar = sn * dbar - cs * alfa
        epsln = sn * beta
        dbar = -cs * beta
        gamma = max(np.hypot(gbar, beta), eps)
        cs, sn = gbar / gamma, beta / gamma
        phi = cs * phibar
        phibar = sn * phibar

        w1, w2 = w2, w
        w = (v - oldeps * w1 - delta * w2) / gamma
        x = x + phi * w
        if keep_iterates:
            iterates.append(x.copy())
        hist.append(float(np.linalg.norm(b - A(x))))
        bhist.append(float(phibar))
        if hist[-1] < stop.tol:
            converged = True
            break
        if beta == 0.0:
            break
    return SolveReport(it, hist[-1], hist, converged, x, bhist, iterates)
