"""Independent checks of p-minimality.

Two routes: the contact form vanishes on every ruling direction (an exact
identity), and the divergence-form equation
``div((grad u + F) / |grad u + F|) = 0`` with ``F = (-y, x)`` holds to
second order on graph patches away from the singular set.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import kernels
from .analyzer import (GridSpec, halfspace_probe, injectivity_scan, intersect_rulings,
                       properness_check, scan_non_immersed, scan_singular_set)
from .classifier import classify, singular_free_tilted
from .errors import SingularContamination
from .geometry import Plane3, contact_form, contact_plane_at, line_origin_distance
from .profile import SurfaceProfile
from .ruled import evaluate, projected_ruling, ruling_line3, sample_profile

LEGENDRIAN_TOL = 1e-12
EPS_SING = 1e-6
EXCLUSION_FACTOR = 10.0
MAX_EXCLUDED = 0.5

__all__ = [
    "LegendrianReport",
    "legendrian_residual",
    "GraphPatch",
    "ResidualReport",
    "pde_residual",
    "implicit_height",
    "Assertion",
    "GoldenReport",
    "golden_examples",
    "bundled_profiles_dir",
]


# --------------------------------------------------------------------------
# Legendrian identity
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LegendrianReport:
    max_residual: float
    n_samples: int
    ok: bool


def legendrian_residual(profile: SurfaceProfile, s, t, z_slope_shift: float = 0.0) -> LegendrianReport:
    """Max of ``|Theta(d_s X)|`` over the samples (broadcast ``s`` against ``t``).

    ``z_slope_shift`` adds a constant to the z-slope of every ruling, which
    produces a surface whose rulings are no longer Legendrian; it exists
    for negative controls.
    """
    s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    s, t = s.ravel(), t.ravel()
    smp = sample_profile(profile, t)
    pos = evaluate(profile, s, t)
    pos[:, 2] += z_slope_shift * s
    d_s = np.stack([np.sin(smp.theta), -np.cos(smp.theta), smp.delta + z_slope_shift], axis=-1)
    r = float(np.max(np.abs(contact_form(pos, d_s))))
    return LegendrianReport(r, len(s), r < LEGENDRIAN_TOL)


# --------------------------------------------------------------------------
# graph patches and the PDE residual
# --------------------------------------------------------------------------

def implicit_height(profile: SurfaceProfile, X, Y, n_scan: int = 129, maxiter: int = 200):
    """Height of the surface above ``(X, Y)`` found through the ruling parameter.

    Solves ``(x - alpha) cos(theta) + (y - beta) sin(theta) = 0`` for t on
    ``profile.t_range`` (grid scan, bisection, two Newton steps); then
    ``z = beta x - alpha y + gamma`` at that t.  Nodes with no root or more
    than one root get NaN.  Returns ``(z, t, root_residual)``.
    """
    X, Y = np.broadcast_arrays(np.asarray(X, dtype=float), np.asarray(Y, dtype=float))
    shape = X.shape
    x, y = X.ravel(), Y.ravel()
    ts = np.linspace(*profile.t_range, n_scan)
    smp = sample_profile(profile, ts)

    def f_at(tv, xv, yv):
        sm = sample_profile(profile, tv)
        val = (xv - sm.alpha) * np.cos(sm.theta) + (yv - sm.beta) * np.sin(sm.theta)
        return val, sm

    F = ((x[:, None] - smp.alpha[None, :]) * np.cos(smp.theta)[None, :]
         + (y[:, None] - smp.beta[None, :]) * np.sin(smp.theta)[None, :])
    change = F[:, :-1] * F[:, 1:] < 0.0
    exact = F == 0.0
    n_roots = change.sum(axis=1) + exact.sum(axis=1)
    unique = n_roots == 1
    idx = np.where(unique, np.argmax(change | exact[:, :-1], axis=1), 0)
    lo = ts[idx].copy()
    hi = ts[np.minimum(idx + 1, n_scan - 1)].copy()
    f_lo = F[np.arange(len(x)), idx]
    hit = exact[np.arange(len(x)), idx]
    hi = np.where(hit, lo, hi)
    for _ in range(maxiter):
        m = 0.5 * (lo + hi)
        if np.all((m <= lo) | (m >= hi)):
            break
        fm, _ = f_at(m, x, y)
        same = (fm < 0.0) == (f_lo < 0.0)
        lo = np.where(same, m, lo)
        f_lo = np.where(same, fm, f_lo)
        hi = np.where(same, hi, m)
    root = 0.5 * (lo + hi)
    for _ in range(2):
        fv, sm = f_at(root, x, y)
        c, sn = np.cos(sm.theta), np.sin(sm.theta)
        df = (-sm.dalpha * c - sm.dbeta * sn
              + sm.dtheta * (-(x - sm.alpha) * sn + (y - sm.beta) * c))
        step = np.divide(fv, df, out=np.zeros_like(fv), where=df != 0.0)
        cand = root - step
        cand_f, _ = f_at(np.clip(cand, *profile.t_range), x, y)
        better = np.abs(cand_f) <= np.abs(fv)
        root = np.where(better, np.clip(cand, *profile.t_range), root)
    fv, sm = f_at(root, x, y)
    z = sm.beta * x - sm.alpha * y + sm.gamma
    z = np.where(unique, z, np.nan)
    return z.reshape(shape), np.where(unique, root, np.nan).reshape(shape), np.abs(fv).reshape(shape)


@dataclass
class GraphPatch:
    """Height function ``u(X, Y)`` on ``[x0, x1] x [y0, y1]`` sampled at spacing ``h``.

    Nodes within ``rho_ex`` (default ``10 h``) of the singular set, or with
    ``|grad u + F| <= eps_sing``, are excluded from the residual.
    """

    u: Callable
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    h: float
    rho_ex: float | None = None
    eps_sing: float = EPS_SING
    root_residual: float = 0.0

    @classmethod
    def from_closed_form(cls, u, x_range, y_range, h, **kw) -> "GraphPatch":
        return cls(u, tuple(x_range), tuple(y_range), float(h), **kw)

    @classmethod
    def from_profile(cls, profile: SurfaceProfile, x_range, y_range, h, **kw) -> "GraphPatch":
        patch = cls(None, tuple(x_range), tuple(y_range), float(h), **kw)

        def u(X, Y):
            z, _, res = implicit_height(profile, X, Y)
            ok = np.isfinite(z)
            if ok.any():
                patch.root_residual = max(patch.root_residual, float(res[ok].max()))
            return z

        patch.u = u
        return patch

    def refined(self, factor: int) -> "GraphPatch":
        return GraphPatch(self.u, self.x_range, self.y_range, self.h / factor, None, self.eps_sing)

    @property
    def radius(self) -> float:
        return EXCLUSION_FACTOR * self.h if self.rho_ex is None else self.rho_ex

    def nodes(self, halo: int = 2):
        def axis(lo, hi):
            n = int(round((hi - lo) / self.h))
            return lo + self.h * np.arange(-halo, n + 1 + halo)
        return axis(*self.x_range), axis(*self.y_range)


@dataclass
class LevelResult:
    h: float
    max_residual: float
    n_retained: int
    n_total: int
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    residual: np.ndarray = field(repr=False)
    retained: np.ndarray = field(repr=False)


@dataclass
class ResidualReport:
    max_residual: float
    h: float
    levels: list[LevelResult]
    ratios: list[float] | None
    exact_zero: bool
    root_residual: float = 0.0

    def to_dict(self):
        return {"max_residual": self.max_residual, "h": self.h, "exact_zero": self.exact_zero,
                "ratios": self.ratios, "root_residual": self.root_residual,
                "levels": [{"h": lv.h, "max_residual": lv.max_residual,
                            "retained": lv.n_retained, "total": lv.n_total} for lv in self.levels]}

    def to_csv(self, level: int = -1) -> str:
        """``x,y,residual`` rows for the retained nodes of one level."""
        lv = self.levels[level]
        out = io.StringIO()
        out.write("x,y,residual\n")
        for i, j in zip(*np.nonzero(lv.retained)):
            out.write("%r,%r,%r\n" % (float(lv.x[i]), float(lv.y[j]), float(lv.residual[i, j])))
        return out.getvalue()


def _level(patch: GraphPatch) -> LevelResult:
    x, y = patch.nodes()
    U = np.asarray(patch.u(x[:, None], y[None, :]), dtype=float)
    U = np.broadcast_to(U, (len(x), len(y)))
    with np.errstate(invalid="ignore", divide="ignore"):
        res, norm, dist = kernels.pde_divergence(U, x, y, patch.h)
    xi, yi = x[2:-2], y[2:-2]
    keep = np.isfinite(res) & (norm > patch.eps_sing) & ~(dist < patch.radius)
    # a stencil touching an excluded neighbour is unreliable too
    bad = ~((norm > patch.eps_sing) & ~(dist < patch.radius) & np.isfinite(norm))
    pad = np.pad(bad, 1, constant_values=False)
    near = pad[2:, 1:-1] | pad[:-2, 1:-1] | pad[1:-1, 2:] | pad[1:-1, :-2]
    keep &= ~near
    total = keep.size
    if keep.sum() < (1.0 - MAX_EXCLUDED) * total:
        raise SingularContamination(
            f"{total - int(keep.sum())} of {total} nodes excluded at h={patch.h!r}")
    mx = float(np.max(np.abs(res[keep]))) if keep.any() else 0.0
    return LevelResult(patch.h, mx, int(keep.sum()), total, xi, yi, np.where(keep, res, np.nan), keep)


def pde_residual(patch: GraphPatch, levels: int = 3) -> ResidualReport:
    """Max residual on spacings h, h/2, h/4 and the ratios between them."""
    results = [_level(patch.refined(2 ** k) if k else patch) for k in range(levels)]
    exact = all(r.max_residual == 0.0 for r in results)
    ratios = None
    if levels >= 3 and not exact:
        ratios = [a.max_residual / b.max_residual if b.max_residual > 0 else math.inf
                  for a, b in zip(results[:-1], results[1:])]
    return ResidualReport(results[-1].max_residual, results[-1].h, results, ratios, exact,
                          patch.root_residual)


# --------------------------------------------------------------------------
# worked examples
# --------------------------------------------------------------------------

def bundled_profiles_dir() -> Path:
    return Path(__file__).resolve().parent / "data" / "profiles"


@dataclass(frozen=True)
class Assertion:
    example: str
    name: str
    passed: bool
    value: float | str
    expected: str

    def to_dict(self):
        v = self.value
        if isinstance(v, float) and not math.isfinite(v):
            v = repr(v)
        return {"example": self.example, "name": self.name, "passed": self.passed,
                "value": v, "expected": self.expected}


@dataclass
class GoldenReport:
    assertions: list[Assertion]

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    @property
    def failures(self) -> list[Assertion]:
        return [a for a in self.assertions if not a.passed]

    def table(self) -> str:
        rows = [("example", "assertion", "value", "expected", "status")]
        for a in self.assertions:
            v = a.value if isinstance(a.value, str) else f"{a.value:.3g}"
            rows.append((a.example, a.name, v, a.expected, "PASS" if a.passed else "FAIL"))
        widths = [max(len(r[k]) for r in rows) for k in range(5)]
        return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)

    def to_dict(self):
        return {"passed": self.passed, "assertions": [a.to_dict() for a in self.assertions]}


class _Suite:
    def __init__(self):
        self.items: list[Assertion] = []
        self.example = ""

    def below(self, name, value, bound):
        value = float(value)
        self.items.append(Assertion(self.example, name, bool(value < bound), value, f"< {bound:g}"))

    def equal(self, name, value, expected):
        self.items.append(Assertion(self.example, name, value == expected, str(value), str(expected)))

    def true(self, name, ok, value=""):
        self.items.append(Assertion(self.example, name, bool(ok), value, "true"))


def _grid_points(profile, n=200):
    s = np.linspace(*profile.s_range, n)
    t = np.linspace(*profile.t_range, n)
    return s, t, evaluate(profile, s[None, :], t[:, None]).reshape(-1, 3)


def _load(directory: Path, name: str) -> SurfaceProfile:
    return SurfaceProfile.load(directory / f"{name}.json")


def _no_halfspace_violation(profile, su: _Suite):
    planes = [Plane3((0.0, 0.0, 1.0), 0.0), contact_plane_at((1.0, -0.5, 2.0)),
              contact_plane_at((-2.0, 3.0, -1.0))]
    bad = [halfspace_probe(profile, P).halfspace_violation for P in planes]
    su.true("halfspace consistency", not any(bad), f"{sum(bad)} violations")


def golden_examples(directory=None, seed: int = 0) -> GoldenReport:
    """Run every worked example end to end; failures are recorded, not raised.

    ``directory`` holds the example profiles as JSON (default: the bundled
    copies).  A missing file raises :class:`FileNotFoundError`.
    """
    directory = Path(directory) if directory is not None else bundled_profiles_dir()
    if not directory.is_dir():
        raise FileNotFoundError(f"examples directory not found: {directory}")
    rng = np.random.default_rng(seed)
    su = _Suite()

    # ex21: z(x+1) = y(x-1)
    su.example = "ex21"
    p = _load(directory, "ex21")
    s, t, pts = _grid_points(p)
    x, y, z = pts.T
    su.below("implicit equation", np.max(np.abs(z * (x + 1) - y * (x - 1))), 1e-9)
    pairs = np.sort(rng.uniform(*p.t_range, size=(200, 2)), axis=1)
    gaps = [intersect_rulings(projected_ruling(p, a), projected_ruling(p, b)).gap for a, b in pairs]
    su.below("largest height gap for t1 < t2", max(gaps), 0.0)
    su.equal("non-immersed points", len(scan_non_immersed(p, GridSpec(200, 200))), 0)
    su.equal("injectivity violations",
             len(injectivity_scan(p, np.linspace(*p.t_range, 100))), 0)
    su.equal("properness", properness_check(p).verdict, "proper")
    su.below("legendrian residual", legendrian_residual(p, s[None, :], t[:, None]).max_residual,
             LEGENDRIAN_TOL)
    c = classify(p)
    su.equal("classification", c.kind, "helicoid_tilted")
    if c.kind == "helicoid_tilted":
        su.below("contact point |x0 + 1| + |y0|", abs(c.x0 + 1) + abs(c.y0), 1e-8)
        tt = np.linspace(0.1, 10, 500)
        su.below("max |tan(theta) t - 2|", np.max(np.abs(np.tan(c.theta(tt)) * tt - 2)), 1e-7)
    _no_halfspace_violation(p, su)

    # ex31: same surface written in canonical tilted form
    su.example = "ex31"
    p = _load(directory, "ex31")
    s, t, pts = _grid_points(p)
    x, y, z = pts.T
    su.below("implicit equation", np.max(np.abs(z * (x + 1) - y * (x - 1))), 1e-9)
    c = classify(p)
    su.equal("classification", c.kind, "helicoid_tilted")
    if c.kind == "helicoid_tilted":
        su.below("contact point |x0 + 1| + |y0|", abs(c.x0 + 1) + abs(c.y0), 1e-8)
    verdict = singular_free_tilted(p.theta, p.t_range)
    found = scan_singular_set(p, GridSpec(200, 200))
    su.true("singular-free verdict matches scan", verdict.free == (not found),
            f"free={verdict.free}, roots={len(found)}")
    _no_halfspace_violation(p, su)

    # ex41a / ex41b: the two branches of (z - xy)^2 = y
    for name in ("ex41a", "ex41b"):
        su.example = name
        p = _load(directory, name)
        s, t, pts = _grid_points(p, 100)
        x, y, z = pts.T
        scale = 1.0 + np.abs(y) + z * z
        su.below("ruling membership", np.max(np.abs((z - x * y) ** 2 - y) / scale), 1e-12)
        su.below("legendrian residual", legendrian_residual(p, s[None, :], t[:, None]).max_residual,
                 LEGENDRIAN_TOL)
        c = classify(p)
        su.equal("classification", c.kind, "weak_helicoid")
        lo = c.certificate.get("offset_range", [math.nan])[0]
        su.true("plane offsets within y >= 0", lo >= 0.0, f"min offset {lo:g}")
        _no_halfspace_violation(p, su)

    # ex42: theta = atan t, gamma = t, delta = 1
    su.example = "ex42"
    p = _load(directory, "ex42")
    pr = properness_check(p)
    su.equal("properness", pr.verdict, "proper")
    tv = np.array([-100.0, -10.0, -1.0, 1.0, 10.0, 100.0])
    r = np.array([line_origin_distance(ruling_line3(p, v)) for v in tv])
    su.below("r_t against sqrt(1 + t^2/2)", np.max(np.abs(r - np.sqrt(1 + tv ** 2 / 2))), 1e-9)
    su.equal("singular points", len(scan_singular_set(p, GridSpec(200, 200))), 0)
    su.equal("classification", classify(p).kind, "non_helicoid")
    _no_halfspace_violation(p, su)

    # plane: vertical plane x = 0
    su.example = "plane"
    p = _load(directory, "plane")
    su.equal("singular points", len(scan_singular_set(p, GridSpec(50, 50))), 0)
    su.equal("injectivity violations", len(injectivity_scan(p, np.linspace(*p.t_range, 50))), 0)
    _no_halfspace_violation(p, su)

    # contactplane: all rulings through one point
    su.example = "contactplane"
    p = _load(directory, "contactplane")
    c = classify(p)
    su.equal("classification", c.kind, "contact_plane")
    if c.through is not None:
        P = contact_plane_at(c.through)
        shifted = Plane3(P.normal, P.offset - 1.0).upward()
        su.equal("containment against a parallel contact plane",
                 halfspace_probe(p, shifted).kind, "upper")
    _no_halfspace_violation(p, su)

    # y_eq_xz: y = x z, no singular points
    su.example = "y_eq_xz"
    p = _load(directory, "y_eq_xz")
    s, t, pts = _grid_points(p)
    x, y, z = pts.T
    su.below("implicit equation", np.max(np.abs(y - x * z) / (1 + np.abs(y))), 1e-9)
    su.true("singular-free verdict", singular_free_tilted(p.theta, p.t_range).free)
    su.equal("singular points", len(scan_singular_set(p, GridSpec(200, 200))), 0)
    _no_halfspace_violation(p, su)

    return GoldenReport(su.items)
