"""Univariate B-spline bases and tensor-product spline spaces on boxes.

Spaces built here are the building blocks of an overlapping generating
system: every patch is a tensor-product B-spline space on a parametric box
with its boundary functions trimmed so that the zero extension outside the
box is continuous.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

TRIM_MODES = ("value_zero", "smooth")


class EmptySpace(ValueError):
    """Raised when Dirichlet trimming leaves no basis function."""


@dataclass(frozen=True, eq=False)
class KnotVector:
    """Knot sequence together with a spline degree.

    Evaluation is defined on ``[knots[p], knots[-p-1]]``; for clamped knot
    vectors this is the full interval between the first and last knot.
    """

    knots: np.ndarray
    p: int

    def __post_init__(self):
        kv = np.asarray(self.knots, dtype=float)
        if kv.ndim != 1 or kv.size < 2 * self.p + 2:
            raise ValueError("knot vector too short for degree %d" % self.p)
        if not np.all(np.isfinite(kv)):
            raise ValueError("knots must be finite")
        if np.any(np.diff(kv) < 0):
            raise ValueError("knots must be nondecreasing")
        if self.p < 0:
            raise ValueError("degree must be nonnegative")
        kv.setflags(write=False)
        object.__setattr__(self, "knots", kv)

    def __repr__(self):
        return "KnotVector(p=%d, n=%d, [%g, %g])" % (self.p, self.numfuncs, *self.support)

    @property
    def numfuncs(self) -> int:
        return self.knots.size - self.p - 1

    @property
    def support(self) -> tuple[float, float]:
        return float(self.knots[self.p]), float(self.knots[-self.p - 1])

    @property
    def breakpoints(self) -> np.ndarray:
        """Distinct knot values inside the support interval."""
        a, b = self.support
        kv = self.knots[(self.knots >= a) & (self.knots <= b)]
        return np.unique(kv)

    def find_span(self, x) -> np.ndarray:
        """Index ``mu`` with ``knots[mu] <= x < knots[mu+1]``; right end closed."""
        x = np.asarray(x, dtype=float)
        span = np.searchsorted(self.knots, x, side="right") - 1
        return np.clip(span, self.p, self.numfuncs - 1)


def make_clamped_uniform(a: float, b: float, cells: int, p: int) -> KnotVector:
    """Open knot vector on ``[a, b]`` with ``cells`` uniform cells.

    >>> make_clamped_uniform(0, 1, 2, 2).knots
    array([0. , 0. , 0. , 0.5, 1. , 1. , 1. ])
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("interval endpoints must be finite")
    if not a < b:
        raise ValueError("need a < b, got [%g, %g]" % (a, b))
    if int(cells) != cells or cells < 1:
        raise ValueError("cells must be a positive integer, got %r" % (cells,))
    if p < 1:
        raise ValueError("degree must be >= 1")
    inner = np.linspace(a, b, int(cells) + 1)
    inner[0], inner[-1] = a, b
    kv = np.concatenate([np.full(p, float(a)), inner, np.full(p, float(b))])
    return KnotVector(kv, p)


def basis_derivs(kv: KnotVector, span, x, nderiv: int = 0) -> np.ndarray:
    """Nonzero B-splines and derivatives at points ``x`` in given spans.

    Vectorized Cox-de Boor recursion with the standard derivative triangle.
    Returns an array of shape ``(len(x), nderiv+1, p+1)`` where entry
    ``[m, k, j]`` is the k-th derivative of function ``span[m]-p+j`` at
    ``x[m]``.
    """
    knots, p = kv.knots, kv.p
    x = np.atleast_1d(np.asarray(x, dtype=float))
    span = np.broadcast_to(np.asarray(span), x.shape)
    npts = x.size
    nd = min(nderiv, p)

    ndu = np.zeros((npts, p + 1, p + 1))
    ndu[:, 0, 0] = 1.0
    left = np.zeros((npts, p + 1))
    right = np.zeros((npts, p + 1))
    for j in range(1, p + 1):
        left[:, j] = x - knots[span + 1 - j]
        right[:, j] = knots[span + j] - x
        saved = np.zeros(npts)
        for r in range(j):
            ndu[:, j, r] = right[:, r + 1] + left[:, j - r]
            temp = ndu[:, r, j - 1] / ndu[:, j, r]
            ndu[:, r, j] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        ndu[:, j, j] = saved

    ders = np.zeros((npts, nderiv + 1, p + 1))
    ders[:, 0, :] = ndu[:, :, p]
    if nd == 0:
        return ders

    a = np.zeros((npts, 2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[:] = 0.0
        a[:, 0, 0] = 1.0
        for k in range(1, nd + 1):
            d = np.zeros(npts)
            rk, pk = r - k, p - k
            if r >= k:
                a[:, s2, 0] = a[:, s1, 0] / ndu[:, pk + 1, rk]
                d = a[:, s2, 0] * ndu[:, rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[:, s2, j] = (a[:, s1, j] - a[:, s1, j - 1]) / ndu[:, pk + 1, rk + j]
                d = d + a[:, s2, j] * ndu[:, rk + j, pk]
            if r <= pk:
                a[:, s2, k] = -a[:, s1, k - 1] / ndu[:, pk + 1, r]
                d = d + a[:, s2, k] * ndu[:, r, pk]
            ders[:, k, r] = d
            s1, s2 = s2, s1
    fac = p
    for k in range(1, nd + 1):
        ders[:, k, :] *= fac
        fac *= p - k
    return ders


@dataclass(frozen=True, eq=False)
class Basis1D:
    """B-spline basis with a contiguous range of retained functions."""

    knot_vector: KnotVector
    kept: tuple[int, int]  # half-open [lo, hi) in untrimmed numbering
    trim_mode: str = "value_zero"

    @property
    def p(self) -> int:
        return self.knot_vector.p

    @property
    def size(self) -> int:
        return self.kept[1] - self.kept[0]

    @property
    def interval(self) -> tuple[float, float]:
        return self.knot_vector.support

    @property
    def breakpoints(self) -> np.ndarray:
        return self.knot_vector.breakpoints


class NonzeroBasis(NamedTuple):
    """Result of :func:`eval_nonzero`.

    ``values[j, r]`` is the r-th derivative of untrimmed function
    ``first + j``; ``kept_index[j]`` is its index in the trimmed basis or -1.
    """

    first: int
    values: np.ndarray
    kept_index: np.ndarray


def trimmed_basis(kv: KnotVector, trim_mode: str = "value_zero") -> Basis1D:
    if trim_mode not in TRIM_MODES:
        raise ValueError("unknown trim mode %r" % (trim_mode,))
    w = 1 if trim_mode == "value_zero" else kv.p
    lo, hi = w, kv.numfuncs - w
    if hi <= lo:
        raise EmptySpace(
            "%s trimming of %d functions (p=%d) leaves nothing" % (trim_mode, kv.numfuncs, kv.p)
        )
    return Basis1D(kv, (lo, hi), trim_mode)


def eval_nonzero(basis: Basis1D, x: float, deriv_order: int = 0) -> NonzeroBasis:
    """Values and derivatives of the ``p+1`` B-splines that may be nonzero at ``x``."""
    kv = basis.knot_vector
    a, b = kv.support
    if not (a <= x <= b):
        raise ValueError("x=%g outside [%g, %g]" % (x, a, b))
    if deriv_order < 0 or deriv_order > kv.p:
        raise ValueError("derivative order must be in [0, p]")
    span = int(kv.find_span(x))
    vals = basis_derivs(kv, span, [x], deriv_order)[0].T.copy()
    first = span - kv.p
    idx = np.arange(first, first + kv.p + 1)
    lo, hi = basis.kept
    kept = np.where((idx >= lo) & (idx < hi), idx - lo, -1)
    return NonzeroBasis(first, vals, kept)


@dataclass(frozen=True, eq=False)
class TensorSplineSpace:
    """Tensor product of trimmed univariate bases on a parametric box.

    Degrees of freedom are enumerated row-major over the directions in
    declaration order (the last direction varies fastest).
    """

    bases: tuple[Basis1D, ...]
    name: str = ""

    @property
    def dim(self) -> int:
        return len(self.bases)

    @property
    def degree(self) -> tuple[int, ...]:
        return tuple(b.p for b in self.bases)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(b.size for b in self.bases)

    @property
    def dof_count(self) -> int:
        return int(np.prod(self.shape))

    @property
    def box(self) -> tuple[tuple[float, float], ...]:
        return tuple(b.interval for b in self.bases)

    @property
    def cells(self) -> tuple[int, ...]:
        return tuple(len(b.breakpoints) - 1 for b in self.bases)

    def __repr__(self):
        box = " x ".join("[%.4g, %.4g]" % ab for ab in self.box)
        return "<TensorSplineSpace %s%s cells=%s dofs=%d>" % (
            (self.name + " ") if self.name else "", box, self.cells, self.dof_count)

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(points)
        inside = np.ones(pts.shape[0], dtype=bool)
        for k, (a, b) in enumerate(self.box):
            inside &= (pts[:, k] >= a) & (pts[:, k] <= b)
        return inside

    def basis_matrix(self, points) -> np.ndarray:
        """Dense ``(npts, dof_count)`` matrix of basis values; zero outside the box."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros((pts.shape[0], self.dof_count))
        inside = self.contains(pts)
        if not inside.any():
            return out
        P = pts[inside]
        full = np.ones((P.shape[0], 1))
        for k, basis in enumerate(self.bases):
            kv = basis.knot_vector
            span = kv.find_span(P[:, k])
            vals = basis_derivs(kv, span, P[:, k], 0)[:, 0, :]
            dense = np.zeros((P.shape[0], kv.numfuncs))
            cols = span[:, None] - kv.p + np.arange(kv.p + 1)
            np.put_along_axis(dense, cols, vals, axis=1)
            dense = dense[:, basis.kept[0]:basis.kept[1]]
            full = (full[:, :, None] * dense[:, None, :]).reshape(P.shape[0], -1)
        out[inside] = full
        return out

    def evaluate(self, coeffs, points) -> np.ndarray:
        """Evaluate the spline with the given coefficients; zero outside the box."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.dof_count,):
            raise ValueError("expected %d coefficients, got %s" % (self.dof_count, coeffs.shape))
        return self.basis_matrix(points) @ coeffs


def build_space(box, cells, degree, trim_mode: str = "value_zero", name: str = "") -> TensorSplineSpace:
    """Uniform clamped tensor-product space on ``box`` with Dirichlet trimming.

    ``box`` is a sequence of ``(a, b)`` pairs, ``cells`` the number of uniform
    cells per direction and ``degree`` an int or one degree per direction.
    Trimming drops one function per side (``value_zero``) or ``p`` functions
    per side (``smooth``).
    """
    box = [tuple(map(float, ab)) for ab in box]
    d = len(box)
    if d not in (1, 2, 3):
        raise ValueError("dimension must be 1, 2 or 3")
    cells = _per_direction(cells, d, "cells")
    degree = _per_direction(degree, d, "degree")
    bases = []
    for k in range(d):
        kv = make_clamped_uniform(box[k][0], box[k][1], cells[k], degree[k])
        try:
            bases.append(trimmed_basis(kv, trim_mode))
        except EmptySpace as exc:
            label = name or "space"
            raise EmptySpace("%s, direction %d: %s" % (label, k, exc)) from None
    return TensorSplineSpace(tuple(bases), name=name)


def space_from_knots(knot_vectors: Sequence[KnotVector], trim_mode: str = "value_zero",
                     name: str = "") -> TensorSplineSpace:
    """Tensor space from explicit (possibly non-uniform) knot vectors."""
    return TensorSplineSpace(tuple(trimmed_basis(kv, trim_mode) for kv in knot_vectors), name=name)


def _per_direction(value, d, what):
    if np.ndim(value) == 0:
        return (int(value),) * d
    value = tuple(int(v) for v in value)
    if len(value) != d:
        raise ValueError("%s needs %d entries, got %d" % (what, d, len(value)))
    return value
