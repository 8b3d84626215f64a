"""Patch configurations: the benchmark families and small verification cases."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np

from . import geometry
from .spline_core import EmptySpace, TensorSplineSpace, build_space

CASES = ("aniso_polar2d", "aniso_identity2d", "aniso_polar3d",
         "diagonal_overlap1", "diagonal_overlap_p1")
POLAR3D_MAX_LEVEL = 1


@dataclass(eq=False)
class Configuration:
    spaces: tuple
    geometry: geometry.GeometryMap
    name: str = ""
    params: dict = field(default_factory=dict)

    @property
    def dofs(self) -> int:
        return sum(V.dof_count for V in self.spaces)

    def summary(self) -> str:
        lines = ["%s  map=%s  spaces=%d  dofs=%d" % (self.name, self.geometry.kind,
                                                      len(self.spaces), self.dofs)]
        for V in self.spaces:
            lines.append("  %-8s cells=%-14s dofs=%-6d box=%s" % (
                V.name, V.cells, V.dof_count,
                " x ".join("[%.6g, %.6g]" % ab for ab in V.box)))
        return "\n".join(lines)


def _cells(extent, size):
    c = extent / size
    r = int(round(c))
    if r < 1 or abs(c - r) > 1e-9 * max(1.0, c):
        raise ValueError("extent %g is not a multiple of knot size %g" % (extent, size))
    return r


def _patch(box, sizes, p, trim_mode, name):
    cells = [_cells(b - a, h) for (a, b), h in zip(box, sizes)]
    try:
        return build_space(box, cells, p, trim_mode, name)
    except EmptySpace as exc:
        raise EmptySpace("patch %s: %s" % (name, exc)) from None


def build_aniso_polar2d(p: int, L: int, n: int, trim_mode: str = "value_zero") -> Configuration:
    """Polar annulus sector with ``V_0`` and ``n`` anisotropic patches per direction."""
    _check_common(p, n)
    if L < 0:
        raise ValueError("L must be >= 0")
    s = 1.0 / 2 ** (L + 2)
    spaces = [_patch([(1, 2), (pi / 4, 3 * pi / 4)], (s, s * pi / 2), p, trim_mode, "V_0")]
    for k in range(1, n + 1):
        box = [(1, 1.5), (pi / 4, pi / 4 * (1 + 1 / 2 ** (k - 1)))]
        spaces.append(_patch(box, (s, s * pi / 2 ** (k + 1)), p, trim_mode, "V_%d^x" % k))
    for k in range(1, n + 1):
        box = [(1, 1 + 1 / 2 ** k), (pi / 4, 5 * pi / 8)]
        spaces.append(_patch(box, (s / 2 ** k, s * pi / 2), p, trim_mode, "V_%d^y" % k))
    return Configuration(tuple(spaces), geometry.polar2d(), "aniso_polar2d",
                         dict(p=p, L=L, n=n, trim_mode=trim_mode))


def build_aniso_polar3d(p: int, L: int, n: int, trim_mode: str = "value_zero",
                        allow_large: bool = False) -> Configuration:
    """Three-dimensional polar analogue with patches refined in x, y and z."""
    _check_common(p, n)
    if L < 0:
        raise ValueError("L must be >= 0")
    if L > POLAR3D_MAX_LEVEL and not allow_large:
        raise ValueError("aniso_polar3d limited to L <= %d" % POLAR3D_MAX_LEVEL)
    s = 1.0 / 2 ** (L + 2)
    th0 = pi / 4
    spaces = [_patch([(1, 2), (th0, 3 * pi / 4), (0, pi / 2)],
                     (s, s * pi / 2, s * pi / 2), p, trim_mode, "V_0")]
    for k in range(1, n + 1):
        th1 = th0 * (1 + 1 / 2 ** (k - 1))
        q = pi / 2 ** (k + 1)
        spaces.append(_patch([(1, 1.5), (th0, th1), (0, q)], (s, s * q, s * q),
                             p, trim_mode, "V_%d^x" % k))
    for k in range(1, n + 1):
        q = pi / 2 ** (k + 1)
        spaces.append(_patch([(1, 1 + 1 / 2 ** k), (th0, 5 * pi / 8), (0, q)],
                             (s / 2 ** k, s * pi / 2, s * q), p, trim_mode, "V_%d^y" % k))
    for k in range(1, n + 1):
        th1 = th0 * (1 + 1 / 2 ** (k - 1))
        q = pi / 2 ** (k + 1)
        spaces.append(_patch([(1, 1 + 1 / 2 ** k), (th0, th1), (0, 3 * pi / 8)],
                             (s / 2 ** k, s * q, s * pi / 2), p, trim_mode, "V_%d^z" % k))
    return Configuration(tuple(spaces), geometry.polar3d(), "aniso_polar3d",
                         dict(p=p, L=L, n=n, trim_mode=trim_mode))


def build_aniso_identity2d(p: int, h: float, n: int, trim_mode: str = "value_zero") -> Configuration:
    """Unit square with ``V_0`` of mesh size ``h`` and strips refined towards the axes."""
    _check_common(p, n)
    inv = 1.0 / h
    m = int(round(np.log2(inv)))
    if m < 2 or abs(2.0 ** m - inv) > 1e-9 * inv:
        raise ValueError("1/h must be a power of two >= 4, got %g" % inv)
    spaces = [_patch([(0, 1), (0, 1)], (h, h), p, trim_mode, "V_0")]
    for k in range(1, n + 1):
        spaces.append(_patch([(0, 0.75), (0, 2.0 ** -k)], (h, h / 2 ** k), p, trim_mode,
                             "V_%d^x" % k))
    for k in range(1, n + 1):
        spaces.append(_patch([(0, 2.0 ** -k), (0, 0.75)], (h / 2 ** k, h), p, trim_mode,
                             "V_%d^y" % k))
    return Configuration(tuple(spaces), geometry.identity(2), "aniso_identity2d",
                         dict(p=p, h=h, n=n, trim_mode=trim_mode))


def build_diagonal(p: int, n: int, overlap: str = "one", trim_mode: str = "value_zero") -> Configuration:
    """Chains of square patches along the diagonal of the unit square.

    ``overlap="one"`` uses squares ``[j/2^(k+1), (j+2)/2^(k+1)]^2`` for
    ``j = 0..2(2^k-1)``; ``overlap="p_plus_1"`` uses squares of side
    ``2^-k`` starting at ``j h_0 / 2^k`` for ``j = 0..2(p+1)(2^k-1)``.
    Level ``k`` patches have mesh size ``h_0 / 2^k`` with ``h_0 = 1/(2(p+1))``.
    """
    _check_common(p, n)
    if overlap not in ("one", "p_plus_1"):
        raise ValueError("overlap must be 'one' or 'p_plus_1'")
    h0 = 1.0 / (2 * (p + 1))
    spaces = [_patch([(0, 1), (0, 1)], (h0, h0), p, trim_mode, "V_0")]
    for k in range(1, n + 1):
        hk = h0 / 2 ** k
        if overlap == "one":
            for j in range(2 * (2 ** k - 1) + 1):
                a, b = j / 2 ** (k + 1), (j + 2) / 2 ** (k + 1)
                spaces.append(_patch([(a, b), (a, b)], (hk, hk), p, trim_mode, "V_%d,%d" % (k, j)))
        else:
            for j in range(2 * (p + 1) * (2 ** k - 1) + 1):
                a = j * h0 / 2 ** k
                b = a + 1 / 2 ** k
                spaces.append(_patch([(a, b), (a, b)], (hk, hk), p, trim_mode, "V_%d,%d" % (k, j)))
    name = "diagonal_overlap1" if overlap == "one" else "diagonal_overlap_p1"
    return Configuration(tuple(spaces), geometry.identity(2), name,
                         dict(p=p, n=n, overlap=overlap, trim_mode=trim_mode))


def fully_supported_count(space: TensorSplineSpace, box) -> int:
    """Number of basis functions of ``space`` whose support lies inside ``box``."""
    count = 1
    for basis, (a, b) in zip(space.bases, box):
        kv, (lo, hi) = basis.knot_vector, basis.kept
        tol = 1e-12 * (kv.support[1] - kv.support[0])
        starts = kv.knots[lo:hi]
        ends = kv.knots[lo + kv.p + 1:hi + kv.p + 1]
        count *= int(np.sum((starts >= a - tol) & (ends <= b + tol)))
    return count


def _check_common(p, n):
    if p < 1:
        raise ValueError("degree must be >= 1")
    if n < 0:
        raise ValueError("n must be >= 0")


# -- small verification configurations ----------------------------------------

def _unit_box(d):
    return [(0.0, 1.0)] * d


def single(p=2, cells=4, d=2) -> Configuration:
    V = build_space(_unit_box(d), cells, p, name="V_0")
    return Configuration((V,), geometry.identity(d), "single", dict(p=p, cells=cells, d=d))


def identical_copies(p=2, cells=4, d=2) -> Configuration:
    V = build_space(_unit_box(d), cells, p, name="V_0")
    W = build_space(_unit_box(d), cells, p, name="V_1")
    return Configuration((V, W), geometry.identity(d), "identical_copies",
                         dict(p=p, cells=cells, d=d))


def nested_pair(p=2, cells=2, d=2) -> Configuration:
    """Coarse space and its uniform refinement on the same box."""
    V = build_space(_unit_box(d), cells, p, name="coarse")
    W = build_space(_unit_box(d), 2 * cells, p, name="fine")
    return Configuration((V, W), geometry.identity(d), "nested_pair",
                         dict(p=p, cells=cells, d=d))


def disjoint_pair(p=2, cells=4, d=2) -> Configuration:
    """Two patches touching along ``x_0 = 1/2``; their supports do not overlap."""
    rest = [(0.0, 1.0)] * (d - 1)
    V = build_space([(0.0, 0.5)] + rest, cells, p, name="left")
    W = build_space([(0.5, 1.0)] + rest, cells, p, name="right")
    return Configuration((V, W), geometry.identity(d), "disjoint_pair",
                         dict(p=p, cells=cells, d=d))


def nested_patches(p=2, cells=4) -> Configuration:
    """Coarse square plus two overlapping fine sub-box patches on a dyadic grid."""
    V0 = build_space(_unit_box(2), cells, p, name="V_0")
    fine = 2 * cells
    V1 = build_space([(0.0, 0.5), (0.0, 0.5)], fine // 2, p, name="V_1")
    V2 = build_space([(0.25, 0.75), (0.25, 0.75)], fine // 2, p, name="V_2")
    return Configuration((V0, V1, V2), geometry.identity(2), "nested_patches",
                         dict(p=p, cells=cells))


def polar_three_patch(p=2, L=0) -> Configuration:
    cfg = build_aniso_polar2d(p, L, 1)
    cfg.name = "polar_three_patch"
    return cfg


VERIFICATION_CASES = {
    "single": single,
    "identical_copies": identical_copies,
    "nested_pair": nested_pair,
    "disjoint_pair": disjoint_pair,
    "nested_patches": nested_patches,
    "polar_three_patch": polar_three_patch,
}
