"""Gauss-Legendre rules and integration meshes for pairs of spline spaces."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_ORDER = 16
DEDUP_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class GaussRule:
    points: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return self.points.size


def gauss_rule(q: int) -> GaussRule:
    """``q``-point Gauss-Legendre rule on ``[-1, 1]``."""
    if int(q) != q or not 1 <= q <= MAX_ORDER:
        raise ValueError("quadrature order must be in [1, %d], got %r" % (MAX_ORDER, q))
    x, w = np.polynomial.legendre.leggauss(int(q))
    return GaussRule(x, w)


@dataclass(frozen=True, eq=False)
class MergedMesh:
    """Per-direction sorted breakpoints of a box partition."""

    breaks: tuple[np.ndarray, ...]

    @property
    def box(self):
        return tuple((float(b[0]), float(b[-1])) for b in self.breaks)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(b.size - 1 for b in self.breaks)

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.shape))


def overlap_box(*boxes):
    """Intersection of boxes, or None if it has zero measure."""
    lo = np.max([[ab[0] for ab in box] for box in boxes], axis=0)
    hi = np.min([[ab[1] for ab in box] for box in boxes], axis=0)
    if np.any(hi <= lo):
        return None
    return tuple((float(a), float(b)) for a, b in zip(lo, hi))


def merge_breaks(arrays, a: float, b: float) -> np.ndarray:
    """Union of breakpoint arrays clipped to ``[a, b]``, deduplicated."""
    tol = DEDUP_RTOL * (b - a)
    pts = np.concatenate([np.asarray(arr, dtype=float) for arr in arrays] + [[a, b]])
    pts = np.sort(pts[(pts >= a - tol) & (pts <= b + tol)])
    keep = np.concatenate([[True], np.diff(pts) > tol])
    pts = pts[keep]
    pts[0], pts[-1] = a, b
    if pts.size > 2 and pts[-1] - pts[-2] <= tol:
        pts = np.delete(pts, -2)
    return pts


def merged_mesh(space_i, space_j, extra_spaces=()):
    """Common refinement of two spaces' meshes on the overlap of their boxes.

    Breakpoints of ``extra_spaces`` may be added so that several blocks share
    one integration mesh. Returns None when the boxes do not overlap with
    positive measure.
    """
    box = overlap_box(space_i.box, space_j.box)
    if box is None:
        return None
    spaces = (space_i, space_j) + tuple(extra_spaces)
    breaks = []
    for k, (a, b) in enumerate(box):
        breaks.append(merge_breaks([s.bases[k].breakpoints for s in spaces], a, b))
    return MergedMesh(tuple(breaks))


def refine_mesh(mesh: MergedMesh, extra_breaks) -> MergedMesh:
    """Add per-direction breakpoints (clipped) to a mesh."""
    return MergedMesh(tuple(merge_breaks([br, ex], br[0], br[-1])
                            for br, ex in zip(mesh.breaks, extra_breaks)))


def cell_points(breaks: np.ndarray, rule: GaussRule):
    """Mapped quadrature points and weights, each of shape ``(ncells, q)``."""
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    x = lo + half * (rule.points[None, :] + 1.0)
    w = half * rule.weights[None, :]
    return x, w
