"""Ruled-surface parametrisation by Legendrian lines.

``X(s, t) = (s sin(theta) + alpha, -s cos(theta) + beta, s delta + gamma)`` with
``delta = alpha cos(theta) + beta sin(theta)``.  For each fixed ``t`` the map
``s -> X(s, t)`` traces the ruling through ``(alpha, beta, gamma)``.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Line2, Line3
from .profile import SurfaceProfile

__all__ = [
    "ProfileSamples",
    "RulingFrame",
    "ProjectedRuling",
    "sample_profile",
    "evaluate",
    "frame",
    "decompose",
    "recompose",
    "projected_ruling",
    "ruling_line3",
    "tangent_directions",
    "cross_expanded",
    "surface_grid",
    "write_obj",
    "write_csv",
]


@dataclass(frozen=True)
class ProfileSamples:
    """Profile values and first derivatives at an array of ``t``."""

    t: np.ndarray
    theta: np.ndarray
    dtheta: np.ndarray
    alpha: np.ndarray
    dalpha: np.ndarray
    beta: np.ndarray
    dbeta: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray
    delta: np.ndarray
    ddelta: np.ndarray
    xi: np.ndarray
    dxi: np.ndarray

    def __len__(self):
        return len(self.t)

    def take(self, idx) -> "ProfileSamples":
        return ProfileSamples(**{k: np.asarray(getattr(self, k))[idx] for k in self.__dataclass_fields__})


def sample_profile(profile: SurfaceProfile, t) -> ProfileSamples:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    th, dth = (np.broadcast_to(v, t.shape).astype(float) for v in profile.theta.eval_with_derivative(t))
    a, da = (np.broadcast_to(v, t.shape).astype(float) for v in profile.alpha.eval_with_derivative(t))
    b, db = (np.broadcast_to(v, t.shape).astype(float) for v in profile.beta.eval_with_derivative(t))
    g, dg = (np.broadcast_to(v, t.shape).astype(float) for v in profile.gamma.eval_with_derivative(t))
    c, sn = np.cos(th), np.sin(th)
    delta = a * c + b * sn
    xi = a * sn - b * c
    ddelta = da * c + db * sn - dth * xi
    dxi = da * sn - db * c + dth * delta
    return ProfileSamples(t, th, dth, a, da, b, db, g, dg, delta, ddelta, xi, dxi)


def evaluate(profile: SurfaceProfile, s, t) -> np.ndarray:
    """Surface point(s) ``X(s, t)``; ``s`` and ``t`` broadcast, result has a trailing axis of 3."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    s, t = np.broadcast_arrays(s, t)
    th = profile.theta(t)
    a, b, g = profile.alpha(t), profile.beta(t), profile.gamma(t)
    c, sn = np.cos(th), np.sin(th)
    x = s * sn + a
    y = -s * c + b
    z = s * (b * sn + a * c) + g
    return np.stack(np.broadcast_arrays(x, y, z), axis=-1)


@dataclass(frozen=True)
class RulingFrame:
    """Everything known about the parametrisation at one ``(s, t)``."""

    s: float
    t: float
    position: np.ndarray
    d_s: np.ndarray
    d_t: np.ndarray
    cross: np.ndarray
    theta: float
    dtheta: float
    delta: float
    ddelta: float
    xi: float
    dxi: float
    gamma: float
    dgamma: float
    A: float
    B: float


def _frame_from_samples(smp: ProfileSamples, i: int, s: float) -> RulingFrame:
    th, dth = float(smp.theta[i]), float(smp.dtheta[i])
    d, dd = float(smp.delta[i]), float(smp.ddelta[i])
    x, dx = float(smp.xi[i]), float(smp.dxi[i])
    g, dg = float(smp.gamma[i]), float(smp.dgamma[i])
    c, sn = math.cos(th), math.sin(th)
    A = (s + x) * dth + dd
    B = dx - d * dth
    C = s * dd + dg - d * B
    position = np.array([(s + x) * sn + d * c, -(s + x) * c + d * sn, s * d + g])
    d_s = np.array([sn, -c, d])
    d_t = np.array([A * c + B * sn, A * sn - B * c, s * dd + dg])
    cross = np.array([-c * C - A * d * sn, -sn * C + A * d * c, A])
    return RulingFrame(float(s), float(smp.t[i]), position, d_s, d_t, cross,
                       th, dth, d, dd, x, dx, g, dg, A, B)


def frame(profile: SurfaceProfile, s: float, t: float) -> RulingFrame:
    smp = sample_profile(profile, [t])
    return _frame_from_samples(smp, 0, float(s))


def cross_expanded(profile: SurfaceProfile, s, t) -> np.ndarray:
    """Normal written directly in alpha, beta, gamma, theta (no delta/xi split)."""
    smp = sample_profile(profile, t)
    s = np.asarray(s, dtype=float)
    c, sn = np.cos(smp.theta), np.sin(smp.theta)
    a, b, da, db, dg, dth = smp.alpha, smp.beta, smp.dalpha, smp.dbeta, smp.dgamma, smp.dtheta
    w = db * sn + da * c
    cx = -s * b * dth - s * c * w - db * (b * sn + a * c) - dg * c
    cy = s * a * dth - s * sn * w + da * (b * sn + a * c) - dg * sn
    cz = s * dth + w
    return np.stack([cx, cy, cz], axis=-1)


def decompose(profile: SurfaceProfile, t):
    """``(delta, xi, delta', xi')`` at ``t`` (scalar or array)."""
    smp = sample_profile(profile, t)
    out = (smp.delta, smp.xi, smp.ddelta, smp.dxi)
    if np.ndim(t) == 0:
        return tuple(float(v[0]) for v in out)
    return out


def recompose(theta, delta, xi):
    """Inverse of :func:`decompose`: ``(alpha, beta)`` from ``(theta, delta, xi)``."""
    c, sn = np.cos(theta), np.sin(theta)
    return delta * c + xi * sn, delta * sn - xi * c


@dataclass(frozen=True)
class ProjectedRuling:
    """Projection of a ruling to the xy-plane plus the height of its lift.

    The ruling is ``{(x, y, z) : (x, y) on line2, z = beta x - alpha y + gamma}``.
    """

    t: float
    theta: float
    alpha: float
    beta: float
    gamma: float
    line2: Line2

    @property
    def lift(self) -> tuple[float, float, float]:
        return self.beta, -self.alpha, self.gamma

    def height(self, x, y):
        return self.beta * np.asarray(x) - self.alpha * np.asarray(y) + self.gamma


def projected_ruling(profile: SurfaceProfile, t: float) -> ProjectedRuling:
    th = float(profile.theta(t))
    a, b, g = float(profile.alpha(t)), float(profile.beta(t)), float(profile.gamma(t))
    delta = a * math.cos(th) + b * math.sin(th)
    return ProjectedRuling(float(t), th, a, b, g, Line2(th, delta))


def tangent_directions(profile: SurfaceProfile, t) -> np.ndarray:
    """Unnormalised ruling directions ``(sin theta, -cos theta, delta)``."""
    smp = sample_profile(profile, t)
    return np.stack([np.sin(smp.theta), -np.cos(smp.theta), smp.delta], axis=-1)


def ruling_line3(profile: SurfaceProfile, t: float) -> Line3:
    th = float(profile.theta(t))
    a, b, g = float(profile.alpha(t)), float(profile.beta(t)), float(profile.gamma(t))
    delta = a * math.cos(th) + b * math.sin(th)
    return Line3(np.array([a, b, g]), np.array([math.sin(th), -math.cos(th), delta]))


# --------------------------------------------------------------------------
# mesh export
# --------------------------------------------------------------------------

def surface_grid(profile: SurfaceProfile, ns: int, nt: int, s_range=None, t_range=None):
    """Grid samples: ``(s, t, points)`` with points of shape (nt, ns, 3)."""
    if ns < 2 or nt < 2:
        raise ValueError("grid sizes must be at least 2")
    s = np.linspace(*(s_range or profile.s_range), ns)
    t = np.linspace(*(t_range or profile.t_range), nt)
    pts = evaluate(profile, s[None, :], t[:, None])
    return s, t, pts


def write_obj(points: np.ndarray, stream=None) -> str:
    """Wavefront OBJ (``v``/``f`` records) for a (nt, ns, 3) grid; quads split in two."""
    nt, ns, _ = points.shape
    out = stream or io.StringIO()
    for p in points.reshape(-1, 3):
        out.write("v %.17g %.17g %.17g\n" % tuple(p))
    for i in range(nt - 1):
        for j in range(ns - 1):
            a = i * ns + j + 1
            b, c, d = a + 1, a + ns, a + ns + 1
            out.write(f"f {a} {b} {d}\n")
            out.write(f"f {a} {d} {c}\n")
    return out.getvalue() if stream is None else ""


def write_csv(s: np.ndarray, t: np.ndarray, points: np.ndarray, stream=None) -> str:
    out = stream or io.StringIO()
    out.write("s,t,x,y,z\n")
    for i, tv in enumerate(t):
        for j, sv in enumerate(s):
            x, y, z = points[i, j]
            out.write("%r,%r,%r,%r,%r\n" % (float(sv), float(tv), float(x), float(y), float(z)))
    return out.getvalue() if stream is None else ""
