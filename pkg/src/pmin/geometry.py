"""Euclidean primitives on R^3 carrying the standard contact form dz + x dy - y dx."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "vec3",
    "contact_form",
    "contact_plane_at",
    "signed_polygon_area",
    "line_origin_distance",
    "Line2",
    "Line3",
    "Plane3",
]

UNIT_TOL = 1e-12


def vec3(x, y=None, z=None) -> np.ndarray:
    if y is None:
        arr = np.asarray(x, dtype=float)
    else:
        arr = np.array([x, y, z], dtype=float)
    if arr.shape[-1:] != (3,):
        raise ValueError("expected a 3-vector")
    return arr


def contact_form(p, v):
    """Evaluate the contact form at ``p`` on ``v``: v_z + p_x v_y - p_y v_x.

    Works on stacked arrays of shape ``(..., 3)``.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    return v[..., 2] + p[..., 0] * v[..., 1] - p[..., 1] * v[..., 0]


@dataclass(frozen=True, eq=False)
class Plane3:
    """Plane ``{p : normal . p = offset}`` with unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = vec3(self.normal)
        norm = np.linalg.norm(n)
        if not norm > 0:
            raise ValueError("plane normal must be non-zero")
        if abs(norm - 1.0) > UNIT_TOL:
            object.__setattr__(self, "offset", float(self.offset) / norm)
            n = n / norm
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def through(cls, point, normal) -> "Plane3":
        n = vec3(normal)
        n = n / np.linalg.norm(n)
        return cls(n, float(n @ vec3(point)))

    def signed_distance(self, p):
        return np.asarray(p, dtype=float) @ self.normal - self.offset

    @property
    def is_vertical(self) -> bool:
        return abs(self.normal[2]) < UNIT_TOL

    def contact_point_xy(self) -> tuple[float, float]:
        """(x0, y0) such that this plane is the contact plane of a point over (x0, y0)."""
        nx, ny, nz = self.normal
        if abs(nz) < UNIT_TOL:
            raise ValueError("vertical planes are not contact planes")
        return float(ny / nz), float(-nx / nz)

    def upward(self) -> "Plane3":
        """Same plane with the normal oriented towards +z."""
        if self.normal[2] < 0:
            return Plane3(-self.normal, -self.offset)
        return self

    def height_at(self, x, y):
        """z such that (x, y, z) lies on the (non-vertical) plane."""
        nx, ny, nz = self.normal
        return (self.offset - nx * np.asarray(x) - ny * np.asarray(y)) / nz


def contact_plane_at(p) -> Plane3:
    """Contact plane through ``p``; its normal is proportional to (-y, x, 1)."""
    p = vec3(p)
    return Plane3.through(p, (-p[1], p[0], 1.0))


def signed_polygon_area(vertices: Sequence[Sequence[float]]) -> float:
    """Shoelace area, positive for counterclockwise vertex order."""
    pts = np.asarray(vertices, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise ValueError("need at least three 2-D vertices")
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(frozen=True, eq=False)
class Line3:
    point: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        d = vec3(self.direction)
        norm = np.linalg.norm(d)
        if not norm > 0:
            raise ValueError("line direction must be non-zero")
        object.__setattr__(self, "direction", d / norm)
        object.__setattr__(self, "point", vec3(self.point))

    def at(self, s):
        return self.point + np.multiply.outer(s, self.direction)


def line_origin_distance(line: Line3) -> float:
    p, d = line.point, line.direction
    return float(np.linalg.norm(p - (p @ d) * d))


def _canonical_angle(theta: float, offset: float) -> tuple[float, float]:
    two_pi = 2.0 * math.pi
    theta = math.fmod(theta, two_pi)
    if theta < 0.0:
        theta += two_pi
    if theta >= two_pi:
        theta -= two_pi
    if theta >= math.pi:
        theta -= math.pi
        offset = -offset
    if theta >= math.pi:  # rounding at the top of the interval
        theta = 0.0
    return theta, offset


@dataclass(frozen=True)
class Line2:
    """Plane line ``x cos(theta) + y sin(theta) = offset`` with theta in [0, pi)."""

    theta: float
    offset: float

    def __post_init__(self):
        theta, offset = _canonical_angle(float(self.theta), float(self.offset))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "offset", offset)

    def canonical(self) -> "Line2":
        return Line2(self.theta, self.offset)

    @property
    def normal(self) -> np.ndarray:
        return np.array([math.cos(self.theta), math.sin(self.theta)])

    def residual(self, x, y):
        return np.asarray(x) * math.cos(self.theta) + np.asarray(y) * math.sin(self.theta) - self.offset
