"""Analytic parametric-to-physical maps used to pull back the Poisson problem."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("identity", "polar2d", "polar3d")


class GeometryError(ValueError):
    """Raised when a map is degenerate or used with the wrong dimension."""


@dataclass(frozen=True)
class GeometryMap:
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError("unknown map %r" % (self.kind,))
        if self.kind == "polar2d" and self.dim != 2:
            raise ValueError("polar2d is two-dimensional")
        if self.kind == "polar3d" and self.dim != 3:
            raise ValueError("polar3d is three-dimensional")
        if self.dim not in (1, 2, 3):
            raise ValueError("dimension must be 1, 2 or 3")

    @property
    def is_affine(self) -> bool:
        return self.kind == "identity"


def identity(dim: int) -> GeometryMap:
    return GeometryMap("identity", dim)


def polar2d() -> GeometryMap:
    return GeometryMap("polar2d", 2)


def polar3d() -> GeometryMap:
    return GeometryMap("polar3d", 3)


def from_name(name: str, dim: int) -> GeometryMap:
    """Map from its config name (``identity``, ``polar2d`` or ``polar3d``)."""
    if name == "identity":
        return identity(dim)
    return GeometryMap(name, dim)


def _check(gmap: GeometryMap, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != gmap.dim:
        raise GeometryError("point of dimension %d for a %d-dimensional map"
                            % (x.shape[-1], gmap.dim))
    return x


def map_eval(gmap: GeometryMap, x) -> np.ndarray:
    """Physical point(s) ``F(x)``; ``x`` has shape ``(..., d)``."""
    x = _check(gmap, x)
    if gmap.kind == "identity":
        return x.copy()
    if gmap.kind == "polar2d":
        rho, th = x[..., 0], x[..., 1]
        return np.stack([rho * np.cos(th), rho * np.sin(th)], axis=-1)
    rho, th, ph = x[..., 0], x[..., 1], x[..., 2]
    return np.stack([rho * np.cos(th),
                     rho * np.sin(th) * np.cos(ph),
                     rho * np.sin(th) * np.sin(ph)], axis=-1)


def map_jacobian(gmap: GeometryMap, x):
    """Jacobian ``dF/dx`` of shape ``(..., d, d)`` and its determinant."""
    x = _check(gmap, x)
    d = gmap.dim
    lead = x.shape[:-1]
    if gmap.kind == "identity":
        J = np.broadcast_to(np.eye(d), lead + (d, d)).copy()
        return J, np.ones(lead)
    J = np.zeros(lead + (d, d))
    if gmap.kind == "polar2d":
        rho, th = x[..., 0], x[..., 1]
        c, s = np.cos(th), np.sin(th)
        J[..., 0, 0], J[..., 0, 1] = c, -rho * s
        J[..., 1, 0], J[..., 1, 1] = s, rho * c
        return J, rho.copy()
    rho, th, ph = x[..., 0], x[..., 1], x[..., 2]
    ct, st, cp, sp = np.cos(th), np.sin(th), np.cos(ph), np.sin(ph)
    J[..., 0, 0], J[..., 0, 1] = ct, -rho * st
    J[..., 1, 0], J[..., 1, 1], J[..., 1, 2] = st * cp, rho * ct * cp, -rho * st * sp
    J[..., 2, 0], J[..., 2, 1], J[..., 2, 2] = st * sp, rho * ct * sp, rho * st * cp
    return J, rho * rho * st
