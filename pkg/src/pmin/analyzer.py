"""Immersion, singular points, injectivity, properness and halfspace probes.

All scans run over finite samples; results are evidence, not proofs.
Reports are sorted so output never depends on evaluation order.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DegenerateTriple, GridTooCoarse, InvalidPlane
from .geometry import Plane3, line_origin_distance, signed_polygon_area
from .profile import SurfaceProfile
from .ruled import (ProfileSamples, ProjectedRuling, RulingFrame, evaluate, projected_ruling,
                    ruling_line3, sample_profile)

EPS_PARALLEL = 1e-9
TOL_SINGULAR = 1e-10
TOL_PARALLELISM = 1e-6
TOL_IMMERSION = 1e-9
TOL_GAP = 1e-9
TOL_AREA_POINTS = 1e-9
PROBE_DECADES = 6

__all__ = [
    "GridSpec",
    "LineIntersection",
    "SingularPoint",
    "Violation",
    "ProperReport",
    "ContainmentReport",
    "AnalysisReport",
    "immersion_residuals",
    "singular_residual",
    "parallel_defect",
    "scan_singular_set",
    "scan_non_immersed",
    "intersect_rulings",
    "gap_reduced",
    "injectivity_scan",
    "area_identity",
    "properness_check",
    "ruling_intersection_probe",
    "halfspace_probe",
    "analyze",
    "probe_parameters",
]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PMIN_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class GridSpec:
    ns: int = 200
    nt: int = 200
    s_range: tuple[float, float] | None = None
    t_range: tuple[float, float] | None = None

    def __post_init__(self):
        if self.ns < 2 or self.nt < 2:
            raise ValueError("grid resolution must be at least 2x2")

    def axes(self, profile: SurfaceProfile):
        s = np.linspace(*(self.s_range or profile.s_range), self.ns)
        t = np.linspace(*(self.t_range or profile.t_range), self.nt)
        return s, t


# --------------------------------------------------------------------------
# pointwise residuals
# --------------------------------------------------------------------------

def immersion_residuals(fr: RulingFrame) -> tuple[float, float]:
    """The two quantities whose simultaneous vanishing kills the normal."""
    r_a = (fr.s + fr.xi) * fr.dtheta + fr.ddelta
    r_b = fr.s * fr.ddelta + fr.dgamma - fr.delta * (fr.dxi - fr.delta * fr.dtheta)
    return r_a, r_b


def singular_residual(fr: RulingFrame) -> float:
    """Vanishes exactly where the normal is parallel to (-y, x, 1)."""
    w = fr.s + fr.xi
    return ((w * w + fr.delta ** 2) * fr.dtheta + (2.0 * fr.s + fr.xi) * fr.ddelta
            + fr.dgamma - fr.delta * fr.dxi)


def parallel_defect(position, cross):
    """``|cross x (-y, x, 1)| / |cross|``; infinite where the normal vanishes."""
    position = np.asarray(position, dtype=float)
    cross = np.asarray(cross, dtype=float)
    v = np.stack([-position[..., 1], position[..., 0], np.ones(position.shape[:-1])], axis=-1)
    num = np.linalg.norm(np.cross(cross, v), axis=-1)
    den = np.linalg.norm(cross, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / den, np.inf)
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# singular set
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SingularPoint:
    s: float
    t: float
    residual: float
    parallel_defect: float
    immersed: bool
    position: tuple[float, float, float]

    def to_dict(self):
        return {"s": self.s, "t": self.t, "residual": self.residual,
                "parallel_defect": self.parallel_defect, "immersed": self.immersed,
                "position": list(self.position)}


def _coeffs(smp: ProfileSamples):
    return smp.dtheta, smp.delta, smp.ddelta, smp.xi, smp.dxi, smp.dgamma


def _singular_rows(s, smp: ProfileSamples) -> np.ndarray:
    n = _threads()
    if n == 1 or len(smp) < 2 * n:
        return kernels.singular_grid(s, *_coeffs(smp))
    chunks = np.array_split(np.arange(len(smp)), n)
    with ThreadPoolExecutor(max_workers=n) as pool:
        parts = list(pool.map(lambda idx: kernels.singular_grid(s, *_coeffs(smp.take(idx))), chunks))
    return np.vstack(parts)


def _bisect_t(profile, s_vals, t_lo, t_hi, tol, maxiter=200):
    """Bisection in t at fixed s for the singular residual."""
    s_vals = np.asarray(s_vals, dtype=float)
    lo, hi = np.array(t_lo, dtype=float), np.array(t_hi, dtype=float)

    def R(tv):
        smp = sample_profile(profile, tv)
        w = s_vals + smp.xi
        return ((w * w + smp.delta ** 2) * smp.dtheta + (2.0 * s_vals + smp.xi) * smp.ddelta
                + smp.dgamma - smp.delta * smp.dxi)

    f_lo = R(lo)
    mid = 0.5 * (lo + hi)
    f_mid = R(mid)
    active = np.ones(lo.shape, dtype=bool)
    for _ in range(maxiter):
        if not active.any():
            break
        m = 0.5 * (lo + hi)
        fm = R(m)
        mid = np.where(active, m, mid)
        f_mid = np.where(active, fm, f_mid)
        stop = active & ((np.abs(fm) < tol) | (m <= lo) | (m >= hi))
        go = active & ~stop
        move_lo = go & ((fm < 0.0) == (f_lo < 0.0))
        lo = np.where(move_lo, m, lo)
        f_lo = np.where(move_lo, fm, f_lo)
        hi = np.where(go & ~move_lo, m, hi)
        active = go
    return mid, f_mid


def _finish_points(profile, s_vals, t_vals, resid, tol) -> list[SingularPoint]:
    if len(s_vals) == 0:
        return []
    s_vals = np.asarray(s_vals, dtype=float)
    t_vals = np.asarray(t_vals, dtype=float)
    ok = np.abs(resid) < tol
    if not ok.all():
        warnings.warn(f"{int((~ok).sum())} singular-set brackets did not refine below {tol:g}",
                      GridTooCoarse, stacklevel=3)
    s_vals, t_vals, resid = s_vals[ok], t_vals[ok], np.asarray(resid)[ok]
    smp = sample_profile(profile, t_vals)
    pos = evaluate(profile, s_vals, t_vals)
    cr = _cross_at(smp, s_vals)
    defect = parallel_defect(pos, cr)
    norm = np.linalg.norm(cr, axis=-1)
    scale = np.linalg.norm(np.stack([-pos[:, 1], pos[:, 0], np.ones(len(pos))], -1), axis=-1)
    immersed = norm > TOL_IMMERSION * scale
    defect = np.atleast_1d(defect)
    # non-immersed roots belong to the immersion report; the parallelism
    # test is vacuous there
    keep = immersed & (defect < TOL_PARALLELISM)
    odd = immersed & ~keep
    if odd.any():
        warnings.warn(f"{int(odd.sum())} refined roots fail the parallelism check",
                      GridTooCoarse, stacklevel=3)
    return [SingularPoint(float(a), float(b), float(r), float(d), True, tuple(map(float, p)))
            for a, b, r, d, p in zip(s_vals[keep], t_vals[keep], resid[keep], defect[keep], pos[keep])]


def _cross_at(smp: ProfileSamples, s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    c, sn = np.cos(smp.theta), np.sin(smp.theta)
    A = (s + smp.xi) * smp.dtheta + smp.ddelta
    B = smp.dxi - smp.delta * smp.dtheta
    C = s * smp.ddelta + smp.dgamma - smp.delta * B
    return np.stack([-c * C - A * smp.delta * sn, -sn * C + A * smp.delta * c, A], axis=-1)


def scan_singular_set(profile: SurfaceProfile, grid: GridSpec | None = None,
                      tol: float = TOL_SINGULAR, along_t: bool = True) -> list[SingularPoint]:
    """Roots of the singular residual located on grid lines and refined by bisection.

    Sign changes along every s-line (fixed t) and, when ``along_t``, every
    t-line (fixed s) are bracketed and bisected until ``|residual| < tol``.
    Grid nodes where the residual is exactly zero are reported directly.
    """
    grid = grid or GridSpec()
    s, t = grid.axes(profile)
    smp = sample_profile(profile, t)
    R = _singular_rows(s, smp)

    pts_s: list[np.ndarray] = []
    pts_t: list[np.ndarray] = []
    pts_r: list[np.ndarray] = []

    zi, zj = np.nonzero(R == 0.0)
    pts_s.append(s[zj]); pts_t.append(t[zi]); pts_r.append(R[zi, zj])

    bi, bj = np.nonzero(R[:, :-1] * R[:, 1:] < 0.0)
    if len(bi):
        sub = smp.take(bi)
        root, res = kernels.bisect_singular(s[bj], s[bj + 1], *_coeffs(sub), tol=tol)
        pts_s.append(root); pts_t.append(t[bi]); pts_r.append(res)

    if along_t:
        ci, cj = np.nonzero(R[:-1, :] * R[1:, :] < 0.0)
        if len(ci):
            root, res = _bisect_t(profile, s[cj], t[ci], t[ci + 1], tol)
            pts_s.append(s[cj]); pts_t.append(root); pts_r.append(res)

    s_all = np.concatenate(pts_s)
    t_all = np.concatenate(pts_t)
    r_all = np.concatenate(pts_r)
    points = _finish_points(profile, s_all, t_all, r_all, tol)
    return sorted(points, key=lambda p: (p.s, p.t))


# --------------------------------------------------------------------------
# immersion
# --------------------------------------------------------------------------

def scan_non_immersed(profile: SurfaceProfile, grid: GridSpec | None = None,
                      tol: float = TOL_IMMERSION) -> list[tuple[float, float]]:
    """Parameters where both immersion residuals vanish.

    The first residual is affine in s, so on rulings with theta' != 0 the
    only candidate is ``s* = -delta'/theta' - xi``; the second residual at
    ``s*`` is then root-bracketed in t.  Rulings with theta' = delta' = 0
    are non-immersed along their whole length when the second residual
    also vanishes; those are reported at the grid's s nodes.
    """
    grid = grid or GridSpec()
    s, t = grid.axes(profile)
    smp = sample_profile(profile, t)
    s_lo, s_hi = s[0], s[-1]
    found: set[tuple[float, float]] = set()

    def rb_at(smp_, s_):
        return s_ * smp_.ddelta + smp_.dgamma - smp_.delta * (smp_.dxi - smp_.delta * smp_.dtheta)

    turning = np.abs(smp.dtheta) > tol
    with np.errstate(divide="ignore", invalid="ignore"):
        s_star = np.where(turning, -smp.ddelta / smp.dtheta - smp.xi, np.nan)
    g = np.where(turning, rb_at(smp, s_star), np.nan)

    for i in np.nonzero(turning & (np.abs(g) < tol))[0]:
        if s_lo <= s_star[i] <= s_hi:
            found.add((float(s_star[i]), float(t[i])))

    brackets = np.nonzero(turning[:-1] & turning[1:] & (g[:-1] * g[1:] < 0.0))[0]
    for i in brackets:
        a, b = t[i], t[i + 1]
        ga = g[i]
        for _ in range(200):
            m = 0.5 * (a + b)
            sm = sample_profile(profile, [m])
            if abs(sm.dtheta[0]) <= tol:
                break
            ss = -sm.ddelta[0] / sm.dtheta[0] - sm.xi[0]
            gm = rb_at(sm, ss)[0]
            if abs(gm) < tol or m <= a or m >= b:
                break
            if (gm < 0) == (ga < 0):
                a, ga = m, gm
            else:
                b = m
        ra = (ss + sm.xi[0]) * sm.dtheta[0] + sm.ddelta[0]
        if abs(gm) < tol and abs(ra) < tol and s_lo <= ss <= s_hi:
            found.add((float(ss), float(m)))

    flat = ~turning & (np.abs(smp.ddelta) < tol)
    for i in np.nonzero(flat)[0]:
        r = smp.dgamma[i] - smp.delta[i] * (smp.dxi[i] - smp.delta[i] * smp.dtheta[i])
        if abs(r) < tol:
            found.update((float(sv), float(t[i])) for sv in s)

    # plain grid check as a backstop
    ra, rb = kernels.immersion_grid(s, *_coeffs(smp))
    for i, j in zip(*np.nonzero((np.abs(ra) < tol) & (np.abs(rb) < tol))):
        found.add((float(s[j]), float(t[i])))
    return sorted(found)


# --------------------------------------------------------------------------
# ruling intersections and injectivity
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LineIntersection:
    """Relation between two rulings seen from above.

    ``kind`` is ``"cross"`` (projections meet at one point), ``"parallel"``
    (distinct parallel projections) or ``"coincident"`` (same projection).
    For ``cross``: ``x, y`` is the meeting point, ``z1, z2`` the heights of
    the two rulings there and ``gap = z2 - z1``.  For ``coincident``:
    ``gamma_gap`` is the height difference of the two (parallel) rulings.
    """

    kind: str
    x: float = math.nan
    y: float = math.nan
    z1: float = math.nan
    z2: float = math.nan
    gap: float = math.nan
    gamma_gap: float = math.nan


def intersect_rulings(p1: ProjectedRuling, p2: ProjectedRuling,
                      eps_parallel: float = EPS_PARALLEL,
                      offset_tol: float = 1e-9) -> LineIntersection:
    a1, b1, g1, th1 = p1.alpha, p1.beta, p1.gamma, p1.theta
    a2, b2, g2, th2 = p2.alpha, p2.beta, p2.gamma, p2.theta
    c1, s1, c2, s2 = math.cos(th1), math.sin(th1), math.cos(th2), math.sin(th2)
    sin_psi = s2 * c1 - c2 * s1
    if abs(sin_psi) >= eps_parallel:
        x = (a1 * c1 * s2 - a2 * c2 * s1 - (b2 - b1) * s1 * s2) / sin_psi
        y = (b2 * s2 * c1 - b1 * s1 * c2 + (a2 - a1) * c1 * c2) / sin_psi
        z1 = b1 * x - a1 * y + g1
        z2 = b2 * x - a2 * y + g2
        da, db = a2 - a1, b2 - b1
        gap = (-(da * c2 + db * s2) * (da * c1 + db * s1) / sin_psi
               - (a2 * b1 - a1 * b2) + g2 - g1)
        return LineIntersection("cross", x, y, z1, z2, gap)
    d1 = a1 * c1 + b1 * s1
    d2 = a2 * c2 + b2 * s2
    cos_psi = c1 * c2 + s1 * s2
    if abs(d1 - math.copysign(1.0, cos_psi) * d2) <= offset_tol * (1.0 + abs(d1)):
        fx, fy = d1 * c1, d1 * s1
        gg = (b2 * fx - a2 * fy + g2) - (b1 * fx - a1 * fy + g1)
        return LineIntersection("coincident", gamma_gap=gg)
    return LineIntersection("parallel")


def gap_reduced(delta1, delta2, theta1, theta2, gamma1, gamma2):
    """Height gap for rulings written with xi = 0 (foot-point form)."""
    psi = np.asarray(theta2) - np.asarray(theta1)
    return ((2.0 * delta1 * delta2 - (delta1 ** 2 + delta2 ** 2) * np.cos(psi)) / np.sin(psi)
            + gamma2 - gamma1)


@dataclass(frozen=True)
class Violation:
    t1: float
    t2: float
    kind: str
    value: float

    def to_dict(self):
        return {"t1": self.t1, "t2": self.t2, "kind": self.kind, "value": self.value}


def injectivity_scan(profile: SurfaceProfile, t_samples: Sequence[float], tol: float = TOL_GAP,
                     eps_parallel: float = EPS_PARALLEL, reduced: bool = False) -> list[Violation]:
    """Sampled pairs of rulings that meet in space.

    ``reduced=True`` moves every ruling's base point to its foot point
    (xi = 0), adjusting gamma accordingly, and uses the shorter gap formula.
    """
    t = np.asarray(sorted(set(float(v) for v in t_samples)))
    smp = sample_profile(profile, t)
    if reduced:
        c, sn = np.cos(smp.theta), np.sin(smp.theta)
        gam = smp.gamma - smp.xi * smp.delta
        gap, sin_psi = kernels.pair_gaps(smp.theta, smp.delta * c, smp.delta * sn, gam, eps_parallel)
        with np.errstate(divide="ignore", invalid="ignore"):
            red = gap_reduced(smp.delta[:, None], smp.delta[None, :], smp.theta[:, None],
                              smp.theta[None, :], gam[:, None], gam[None, :])
        gap = np.where(np.isnan(gap), np.nan, red)
    else:
        gap, sin_psi = kernels.pair_gaps(smp.theta, smp.alpha, smp.beta, smp.gamma, eps_parallel)
    out = []
    n = len(t)
    iu, ju = np.triu_indices(n, k=1)
    cross_bad = ~np.isnan(gap[iu, ju]) & (np.abs(gap[iu, ju]) < tol)
    for i, j in zip(iu[cross_bad], ju[cross_bad]):
        out.append(Violation(float(t[i]), float(t[j]), "cross", float(gap[i, j])))
    par = np.isnan(gap[iu, ju])
    for i, j in zip(iu[par], ju[par]):
        p1 = ProjectedRuling(float(t[i]), float(smp.theta[i]), float(smp.alpha[i]),
                             float(smp.beta[i]), float(smp.gamma[i]), None)
        p2 = ProjectedRuling(float(t[j]), float(smp.theta[j]), float(smp.alpha[j]),
                             float(smp.beta[j]), float(smp.gamma[j]), None)
        inter = intersect_rulings(p1, p2, eps_parallel)
        if inter.kind == "coincident" and abs(inter.gamma_gap) < tol:
            out.append(Violation(float(t[i]), float(t[j]), "coincident", inter.gamma_gap))
    return sorted(out, key=lambda v: (v.t1, v.t2))


# --------------------------------------------------------------------------
# area identity
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AreaIdentity:
    lhs: float
    rhs: float
    P: tuple[float, float]
    Q: tuple[float, float]
    R: tuple[float, float]
    concurrent: bool = False


def area_identity(profile: SurfaceProfile, t1: float, t2: float, t3: float,
                  eps_parallel: float = EPS_PARALLEL) -> AreaIdentity:
    """Sum of height jumps around the triangle cut out by three projected rulings.

    With P, Q, R the pairwise meeting points of rulings (1, 2), (2, 3),
    (3, 1): ``lhs = (z1 - z2)(P) + (z2 - z3)(Q) + (z3 - z1)(R)`` and
    ``rhs`` is twice the signed shoelace area of the triangle P, R, Q.
    Three projections through one point give a collapsed triangle; both
    sides are then zero and ``concurrent`` is set.
    """
    r1, r2, r3 = (projected_ruling(profile, tv) for tv in (t1, t2, t3))
    pairs = [(r1, r2), (r2, r3), (r3, r1)]
    inters = [intersect_rulings(a, b, eps_parallel) for a, b in pairs]
    if any(i.kind != "cross" for i in inters):
        raise DegenerateTriple("two of the projected rulings are parallel")
    P, Q, R = ((i.x, i.y) for i in inters)
    scale = 1.0 + max(abs(v) for pt in (P, Q, R) for v in pt)
    concurrent = all(math.hypot(u[0] - v[0], u[1] - v[1]) < TOL_AREA_POINTS * scale
                     for u, v in ((P, Q), (Q, R), (R, P)))
    lhs = sum(i.z1 - i.z2 for i in inters)
    rhs = 2.0 * signed_polygon_area([P, R, Q])
    return AreaIdentity(lhs, rhs, P, Q, R, concurrent)


# --------------------------------------------------------------------------
# properness
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ProperReport:
    verdict: str  # "proper" | "not_proper" | "inconclusive"
    evidence: list[tuple[float, float]] = field(default_factory=list)
    tails: dict = field(default_factory=dict)

    def to_dict(self):
        return {"verdict": self.verdict, "tails": dict(self.tails),
                "evidence": [{"t": t, "r": r} for t, r in self.evidence]}


def probe_parameters(decades: int = PROBE_DECADES) -> np.ndarray:
    """Geometric parameter probes 1, 10, ..., 10**decades (positive tail)."""
    return 10.0 ** np.arange(decades + 1)


def tail_behaviour(values: Sequence[float]) -> str:
    """Classify a sequence sampled at geometrically growing |t|.

    ``"diverges"`` when each of the last three decade-steps increases the
    value by more than 1% of its size, ``"bounded"`` when the last three
    decades (a factor 10**3 in |t|) change it by less than 0.1%, else
    ``"unknown"``.
    """
    r = np.asarray(values, dtype=float)
    if len(r) < 4:
        return "unknown"
    inc = np.diff(r[-4:]) / (1.0 + np.abs(r[-3:]))
    if np.all(inc > 1e-2):
        return "diverges"
    if abs(r[-1] - r[-4]) / (1.0 + abs(r[-1])) < 1e-3:
        return "bounded"
    return "unknown"


def properness_check(profile: SurfaceProfile, decades: int = PROBE_DECADES) -> ProperReport:
    """Evidence on whether the rulings escape to infinity in both directions."""
    if profile.topology == "annulus":
        return ProperReport("proper", [], {"annulus": "compact parameter circle"})
    probes = probe_parameters(decades)
    evidence = []
    tails = {}
    for name, sign in (("minus", -1.0), ("plus", 1.0)):
        r = [line_origin_distance(ruling_line3(profile, sign * p)) for p in probes]
        evidence.extend(zip((sign * probes).tolist(), r))
        tails[name] = tail_behaviour(r)
    if all(v == "diverges" for v in tails.values()):
        verdict = "proper"
    elif any(v == "bounded" for v in tails.values()):
        verdict = "not_proper"
    else:
        verdict = "inconclusive"
    return ProperReport(verdict, sorted(evidence), tails)


# --------------------------------------------------------------------------
# rulings meeting at a point
# --------------------------------------------------------------------------

def ruling_intersection_probe(profile: SurfaceProfile, t_samples: Sequence[float],
                              tol: float = TOL_GAP, window: int = 3):
    """A point where two nearby rulings meet in space, or ``None``.

    Only pairs at most ``window`` samples apart are compared, so rulings
    that come back to cross far-away ones are ignored.
    """
    t = sorted(set(float(v) for v in t_samples))
    rulings = [projected_ruling(profile, tv) for tv in t]
    for i in range(len(t)):
        for j in range(i + 1, min(len(t), i + window + 1)):
            inter = intersect_rulings(rulings[i], rulings[j])
            if inter.kind == "cross" and abs(inter.gap) < tol * (1.0 + abs(inter.z1)):
                return np.array([inter.x, inter.y, 0.5 * (inter.z1 + inter.z2)])
    return None


# --------------------------------------------------------------------------
# halfspace probe
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ContainmentReport:
    """``kind``: ``"upper"``, ``"lower"``, ``"straddles"`` or ``"on_plane"``."""

    kind: str
    n_upper: int
    n_lower: int
    upper_witness: tuple | None
    lower_witness: tuple | None
    complete: bool
    halfspace_violation: bool
    classification: str | None = None

    @property
    def contained(self) -> bool:
        return self.kind in ("upper", "lower")

    def to_dict(self):
        return {k: getattr(self, k) for k in ("kind", "n_upper", "n_lower", "upper_witness",
                                              "lower_witness", "complete", "halfspace_violation",
                                              "classification")}


def halfspace_probe(profile: SurfaceProfile, plane: Plane3, grid: GridSpec | None = None,
                    extend: bool = True, tol: float = 1e-9) -> ContainmentReport:
    """Which side(s) of a contact plane the surface reaches.

    Rulings are whole lines, so any ruling not parallel to the plane
    crosses it; such rulings contribute a witness on each side.  With
    ``extend`` (and a profile given by expressions) rulings at
    ``|t| = 1 ... 1e6`` are probed as well, standing in for completeness.
    A surface found on one side only must be a contact plane; otherwise
    ``halfspace_violation`` is set.
    """
    if plane.is_vertical:
        raise InvalidPlane("a vertical plane is not the contact plane of any point")
    P = plane.upward()
    grid = grid or GridSpec(ns=41, nt=41)
    s, t = grid.axes(profile)
    complete = profile.topology == "annulus" or (extend and profile.is_expression)
    if complete and profile.topology == "band":
        probes = probe_parameters()
        t = np.concatenate([t, -probes, probes])
    t = np.unique(t)

    smp = sample_profile(profile, t)
    c, sn = np.cos(smp.theta), np.sin(smp.theta)
    base = np.stack([smp.alpha, smp.beta, smp.gamma], axis=-1)
    direc = np.stack([sn, -c, smp.delta], axis=-1)
    height = base @ P.normal - P.offset
    slope = direc @ P.normal
    scale = 1.0 + np.linalg.norm(base, axis=-1)

    pts = [evaluate(profile, s[None, :], t[:, None]).reshape(-1, 3)]
    crossing = np.abs(slope) > tol * np.linalg.norm(direc, axis=-1)
    if crossing.any():
        s_star = -height[crossing] / slope[crossing]
        span = 1.0 + np.abs(s_star)
        for k in (-1.0, 1.0):
            pts.append(base[crossing] + (s_star + k * span)[:, None] * direc[crossing])
    pts = np.vstack(pts)
    dist = pts @ P.normal - P.offset
    band = tol * (1.0 + np.linalg.norm(pts, axis=-1))
    up = dist > band
    lo = dist < -band
    n_up, n_lo = int(up.sum()), int(lo.sum())
    w_up = tuple(map(float, pts[np.argmax(np.where(up, dist, -np.inf))])) if n_up else None
    w_lo = tuple(map(float, pts[np.argmin(np.where(lo, dist, np.inf))])) if n_lo else None
    if n_up and n_lo:
        kind = "straddles"
    elif n_up:
        kind = "upper"
    elif n_lo:
        kind = "lower"
    else:
        kind = "on_plane"

    violation = False
    label = None
    if kind in ("upper", "lower") and complete:
        from .classifier import classify
        label = classify(profile).kind
        violation = label != "contact_plane"
    return ContainmentReport(kind, n_up, n_lo, w_up, w_lo, complete, violation, label)


# --------------------------------------------------------------------------
# full report
# --------------------------------------------------------------------------

@dataclass
class AnalysisReport:
    non_immersed_points: list[tuple[float, float]]
    singular_points: list[SingularPoint]
    injectivity_violations: list[Violation]
    proper: ProperReport
    degenerate_contact_plane: np.ndarray | None
    grid: GridSpec
    tolerances: dict

    def to_dict(self):
        return {
            "grid": {"ns": self.grid.ns, "nt": self.grid.nt,
                     "s_range": list(self.grid.s_range) if self.grid.s_range else None,
                     "t_range": list(self.grid.t_range) if self.grid.t_range else None},
            "tolerances": dict(self.tolerances),
            "non_immersed_points": [{"s": s, "t": t} for s, t in self.non_immersed_points],
            "singular_points": [p.to_dict() for p in self.singular_points],
            "injectivity_violations": [v.to_dict() for v in self.injectivity_violations],
            "proper": self.proper.to_dict(),
            "degenerate_contact_plane": (None if self.degenerate_contact_plane is None
                                         else [float(v) for v in self.degenerate_contact_plane]),
        }


def analyze(profile: SurfaceProfile, grid: GridSpec | None = None, n_pairs: int = 100,
            tol_singular: float = TOL_SINGULAR, tol_parallel: float = EPS_PARALLEL,
            tol_immersion: float = TOL_IMMERSION, tol_gap: float = TOL_GAP) -> AnalysisReport:
    grid = grid or GridSpec()
    s, t = grid.axes(profile)
    t_pairs = np.linspace(t[0], t[-1], min(n_pairs, len(t)))
    full = GridSpec(grid.ns, grid.nt, grid.s_range or profile.s_range, grid.t_range or profile.t_range)
    return AnalysisReport(
        non_immersed_points=scan_non_immersed(profile, full, tol_immersion),
        singular_points=scan_singular_set(profile, full, tol_singular),
        injectivity_violations=injectivity_scan(profile, t_pairs, tol_gap, tol_parallel),
        proper=properness_check(profile),
        degenerate_contact_plane=ruling_intersection_probe(profile, t, tol_gap),
        grid=full,
        tolerances={"singular": tol_singular, "parallel": tol_parallel,
                    "immersion": tol_immersion, "gap": tol_gap},
    )
