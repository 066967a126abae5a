"""Helicoid-type classification and the two canonical constructions.

Every ruling of a helicoid-type surface lies in one of a family of parallel
planes.  Non-vertical planes of that family are contact planes
``z = y0 x - x0 y + t`` sharing one contact point (x0, y0); vertical ones
are ``-b x + a y = t``.  The classifier recovers those parameters and
re-parametrises the profile so the plane offset is the curve parameter.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .analyzer import (GridSpec, probe_parameters, ruling_intersection_probe, scan_non_immersed,
                       tail_behaviour)
from .errors import DegenerateDirections, DomainError, NormalizationError
from .geometry import contact_plane_at
from .profile import ProfileFunction, SurfaceProfile, _coerce, constant, variable
from .ruled import evaluate, tangent_directions

ANGLE_TOL = 1e-8
MIN_CROSS = 1e-6
VERTICAL_TOL = 1e-9
UNIT_TOL = 1e-9

__all__ = [
    "Classification",
    "SingularFreeVerdict",
    "is_ruling_coplanar_family",
    "classify",
    "build_vertical",
    "build_tilted",
    "singular_free_tilted",
]


@dataclass
class Classification:
    """Result of :func:`classify`.

    ``kind`` is one of ``contact_plane``, ``helicoid_vertical``,
    ``helicoid_tilted``, ``weak_helicoid`` or ``non_helicoid``.  Only the
    fields relevant to the kind are set; ``certificate`` carries the
    numeric evidence.
    """

    kind: str
    through: np.ndarray | None = None
    a: float | None = None
    b: float | None = None
    g: ProfileFunction | None = None
    x0: float | None = None
    y0: float | None = None
    theta: ProfileFunction | None = None
    param_range: tuple[float, float] | None = None
    plane_normal: np.ndarray | None = None
    immersed: bool = True
    certificate: dict = field(default_factory=dict)

    def rebuild(self, s_range=(-10.0, 10.0)) -> SurfaceProfile:
        """Canonical profile equivalent to the classified one."""
        if self.kind == "helicoid_tilted":
            return build_tilted(self.x0, self.y0, self.theta, t_range=self.param_range, s_range=s_range)
        if self.kind == "helicoid_vertical":
            return build_vertical(self.a, self.b, self.g, t_range=self.param_range, s_range=s_range)
        raise ValueError(f"no canonical form for {self.kind}")

    def to_dict(self, samples: int = 101) -> dict:
        out: dict = {"kind": self.kind, "immersed": self.immersed}
        if self.through is not None:
            out["through"] = [float(v) for v in self.through]
        if self.plane_normal is not None:
            out["plane_normal"] = [float(v) for v in self.plane_normal]
        for key in ("a", "b", "x0", "y0"):
            v = getattr(self, key)
            if v is not None:
                out[key] = float(v)
        if self.param_range is not None:
            out["param_range"] = [float(v) for v in self.param_range]
        for key in ("g", "theta"):
            f = getattr(self, key)
            if f is not None:
                out[key] = _function_doc(f, self.param_range, samples)
        out["certificate"] = {k: _jsonable(v) for k, v in sorted(self.certificate.items())}
        return out


def _function_doc(f: ProfileFunction, rng, samples):
    if f.is_expression:
        return f.to_text()
    ts = np.linspace(*rng, samples)
    return {"t": ts.tolist(), "f": np.asarray(f(ts)).tolist()}


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


# --------------------------------------------------------------------------
# constructions
# --------------------------------------------------------------------------

def build_vertical(a: float, b: float, g, t_range=(-10.0, 10.0), s_range=(-10.0, 10.0),
                   name: str | None = None) -> SurfaceProfile:
    """Rulings in the vertical planes ``-b x + a y = t``.

    The surface is the graph ``u = -ab x^2 + (a^2 - b^2) x y + ab y^2 + g(-b x + a y)``.
    """
    a, b = float(a), float(b)
    if abs(a * a + b * b - 1.0) > UNIT_TOL:
        raise NormalizationError(f"a^2 + b^2 = {a * a + b * b!r}, expected 1")
    t = variable()
    return SurfaceProfile(constant(math.atan2(a, -b)), -b * t, a * t, _coerce(g, "g"),
                          t_range=t_range, s_range=s_range, name=name)


def build_tilted(x0: float, y0: float, theta, t_range=(-10.0, 10.0), s_range=(-10.0, 10.0),
                 name: str | None = None) -> SurfaceProfile:
    """Rulings through ``(x0, y0, t)`` in the contact planes ``z = y0 x - x0 y + t``."""
    return SurfaceProfile(_coerce(theta, "theta"), constant(float(x0)), constant(float(y0)),
                          variable(), t_range=t_range, s_range=s_range, name=name)


def vertical_graph(a: float, b: float, g: ProfileFunction, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (-a * b * x * x + (a * a - b * b) * x * y + a * b * y * y
            + np.asarray(g(-b * x + a * y)))


# --------------------------------------------------------------------------
# coplanarity
# --------------------------------------------------------------------------

def _canonical_normal(n: np.ndarray) -> np.ndarray:
    n = n / np.linalg.norm(n)
    for k in (2, 1, 0):
        if abs(n[k]) > VERTICAL_TOL:
            return n if n[k] > 0 else -n
    return n


def is_ruling_coplanar_family(profile: SurfaceProfile, t_samples, tol: float = ANGLE_TOL):
    """Common normal of all ruling directions, or ``None``.

    Pairwise cross products of the directions must all be parallel.  When
    every direction is parallel to every other (no usable cross product)
    the rulings fit many plane families; the one whose normal is closest
    to vertical is returned and :class:`DegenerateDirections` is warned.
    """
    t = np.unique(np.asarray(t_samples, dtype=float))
    if len(t) < 3:
        raise ValueError("need at least 3 parameter samples")
    T = tangent_directions(profile, t)
    T = T / np.linalg.norm(T, axis=-1, keepdims=True)
    i, j = np.triu_indices(len(t), k=1)
    C = np.cross(T[i], T[j])
    norms = np.linalg.norm(C, axis=-1)
    use = norms > MIN_CROSS
    if not use.any():
        warnings.warn("all ruling directions are parallel", DegenerateDirections, stacklevel=2)
        d = T[0]
        n = np.array([0.0, 0.0, 1.0]) - d[2] * d
        return _canonical_normal(n)
    C = C[use] / norms[use, None]
    ref = C[np.argmax(norms[use])]
    dev = np.linalg.norm(np.cross(C, ref), axis=-1)
    if np.all(dev < tol):
        return _canonical_normal(ref)
    return None


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------

def _offset_verdict(offset, lo, hi, extend: bool):
    """Is ``offset`` strictly monotone on [lo, hi] and onto R (judged by probes)?"""
    ts = np.linspace(lo, hi, 401)
    w, dw = offset.eval_with_derivative(ts)
    w, dw = np.broadcast_to(w, ts.shape), np.broadcast_to(dw, ts.shape)
    monotone = bool(np.all(dw > 0) or np.all(dw < 0))
    cert = {"offset_range": [float(w.min()), float(w.max())], "offset_monotone": monotone}
    if not monotone:
        return False, cert
    if not extend:
        cert["onto"] = "range only"
        return True, cert
    probes = probe_parameters()
    try:
        up = np.asarray(offset(probes))
        down = np.asarray(offset(-probes))
    except DomainError:
        cert["onto"] = "range only"
        return True, cert
    onto = (tail_behaviour(np.abs(up)) == "diverges" and tail_behaviour(np.abs(down)) == "diverges"
            and np.sign(up[-1]) != np.sign(down[-1]))
    cert["onto"] = bool(onto)
    return bool(onto), cert


def _unwrap_shift(theta: ProfileFunction, at: float) -> ProfileFunction:
    k = math.floor(float(theta(at)) / math.pi)
    return theta - k * math.pi if k else theta


def _agreement_grid(profile: SurfaceProfile, n: int = 21):
    s = np.linspace(*profile.s_range, n)
    t = np.linspace(*profile.t_range, n)
    return evaluate(profile, s[None, :], t[:, None]).reshape(-1, 3)


def _tilted_agreement(profile, x0, y0, theta_hat) -> float:
    p = _agreement_grid(profile)
    x, y, z = p[:, 0], p[:, 1], p[:, 2]
    t_hat = z - y0 * x + x0 * y
    th = np.asarray(theta_hat(t_hat))
    s_hat = (x - x0) * np.sin(th) - (y - y0) * np.cos(th)
    q = np.stack([s_hat * np.sin(th) + x0, -s_hat * np.cos(th) + y0,
                  s_hat * (y0 * np.sin(th) + x0 * np.cos(th)) + t_hat], axis=-1)
    return float(np.max(np.linalg.norm(q - p, axis=-1)))


def _vertical_agreement(profile, a, b, g) -> float:
    p = _agreement_grid(profile)
    return float(np.max(np.abs(vertical_graph(a, b, g, p[:, 0], p[:, 1]) - p[:, 2])))


def classify(profile: SurfaceProfile, n_samples: int = 41, probe_samples: int = 200,
             extend: bool | None = None) -> Classification:
    """Decide contact plane / helicoid (vertical or tilted) / weak / none.

    ``extend`` (default: profile given by expressions) lets the strictness
    test evaluate the plane offset at ``|t|`` up to 1e6.
    """
    lo, hi = profile.t_range
    extend = profile.is_expression if extend is None else extend
    immersed = not scan_non_immersed(profile, GridSpec(41, 41))

    p = ruling_intersection_probe(profile, np.linspace(lo, hi, probe_samples))
    if p is not None:
        plane = contact_plane_at(p)
        resid = float(np.max(np.abs(plane.signed_distance(_agreement_grid(profile)))))
        return Classification("contact_plane", through=p, immersed=immersed,
                              certificate={"plane_residual": resid})

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateDirections)
        n = is_ruling_coplanar_family(profile, np.linspace(lo, hi, n_samples))
    degenerate = any(issubclass(w.category, DegenerateDirections) for w in caught)
    if n is None:
        return Classification("non_helicoid", immersed=immersed)
    cert: dict = {"parallel_directions": degenerate}

    if abs(n[2]) > VERTICAL_TOL:
        m = n / n[2]
        x0, y0 = float(m[1]), float(-m[0])
        offset = profile.gamma + x0 * profile.beta - y0 * profile.alpha
        # rulings must pass over (x0, y0)
        ts = np.linspace(lo, hi, n_samples)
        th = np.asarray(profile.theta(ts))
        delta = np.asarray(profile.alpha(ts)) * np.cos(th) + np.asarray(profile.beta(ts)) * np.sin(th)
        cert["contact_point_residual"] = float(np.max(np.abs(delta - x0 * np.cos(th) - y0 * np.sin(th))))
        strict, oc = _offset_verdict(offset, lo, hi, extend)
        cert.update(oc)
        if strict:
            tau = offset.inverse(lo, hi)
            w_lo, w_hi = oc["offset_range"]
            theta_hat = _unwrap_shift(profile.theta.compose(tau), w_lo)
            cert["surface_agreement"] = _tilted_agreement(profile, x0, y0, theta_hat)
            return Classification("helicoid_tilted", x0=x0, y0=y0, theta=theta_hat,
                                  param_range=(w_lo, w_hi), plane_normal=n, immersed=immersed,
                                  certificate=cert)
        return Classification("weak_helicoid", plane_normal=n, immersed=immersed, certificate=cert)

    a, b = float(n[1]), float(-n[0])
    norm = math.hypot(a, b)
    a, b = a / norm, b / norm
    offset = -b * profile.alpha + a * profile.beta
    strict, oc = _offset_verdict(offset, lo, hi, extend)
    cert.update(oc)
    if strict:
        quad = (-a * b * profile.alpha * profile.alpha + (a * a - b * b) * profile.alpha * profile.beta
                + a * b * profile.beta * profile.beta)
        G = profile.gamma - quad
        g = G.compose(offset.inverse(lo, hi))
        w_lo, w_hi = oc["offset_range"]
        cert["surface_agreement"] = _vertical_agreement(profile, a, b, g)
        return Classification("helicoid_vertical", a=a, b=b, g=g, param_range=(w_lo, w_hi),
                               plane_normal=n, immersed=immersed, certificate=cert)
    return Classification("weak_helicoid", plane_normal=n, immersed=immersed, certificate=cert)


# --------------------------------------------------------------------------
# singular-free criterion for tilted helicoids
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SingularFreeVerdict:
    free: bool
    min_dtheta: float
    t_star: float | None = None
    s_star: tuple[float, float] | None = None

    def __bool__(self):
        return self.free


def singular_free_tilted(theta, t_range, n: int = 2001, tol: float = 1e-12) -> SingularFreeVerdict:
    """No singular points iff theta never decreases.

    Where theta' < 0 the ruling at that t is singular at ``s = +-sqrt(-1/theta')``.
    """
    theta = _coerce(theta, "theta")
    d = theta.derivative()
    lo, hi = map(float, t_range)
    ts = np.linspace(lo, hi, n)
    vals = np.broadcast_to(np.asarray(d(ts)), ts.shape)
    k = int(np.argmin(vals))
    t_star, m = float(ts[k]), float(vals[k])
    a, b = ts[max(k - 1, 0)], ts[min(k + 1, n - 1)]
    if b > a:
        res = minimize_scalar(lambda x: float(d(x)), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-12})
        if res.fun < m:
            t_star, m = float(res.x), float(res.fun)
    if m >= -tol:
        return SingularFreeVerdict(True, m)
    s = math.sqrt(-1.0 / m)
    return SingularFreeVerdict(False, m, t_star, (-s, s))
