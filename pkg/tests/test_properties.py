"""Property-based checks of the numerical invariants."""
import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from pmin import analyzer as A
from pmin.errors import DegenerateTriple
from pmin.profile import SurfaceProfile, parse_expression
from pmin.ruled import decompose, projected_ruling, recompose
from pmin.verifier import legendrian_residual

coef = st.floats(-2, 2, allow_nan=False).map(lambda v: round(v, 6))
tval = st.floats(-2, 2, allow_nan=False)

leaf = st.one_of(st.just("t"), coef.map(repr))


def _combine(children):
    unary = st.sampled_from(["sin", "cos", "atan", "exp"])
    return st.one_of(
        st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(lambda x: f"({x[0]} {x[1]} {x[2]})"),
        st.tuples(children, children).map(lambda x: f"({x[0]})/(2 + ({x[1]})^2)"),
        st.tuples(unary, children).map(lambda x: f"{x[0]}(({x[1]})/3)"),
        st.tuples(children, st.integers(2, 3)).map(lambda x: f"({x[0]})^{x[1]}"),
    )


expressions = st.recursive(leaf, _combine, max_leaves=8)


@st.composite
def profiles(draw):
    c = [draw(coef) for _ in range(9)]
    slope = draw(st.floats(0.3, 1.5)) * draw(st.sampled_from([-1, 1]))
    return SurfaceProfile.from_dict({
        "theta": f"{c[0]} + {slope!r}*t + {c[1] / 4}*sin(t)",
        "alpha": f"{c[2]} + {c[3]}*cos(t)",
        "beta": f"{c[4]} + {c[5]}*t",
        "gamma": f"{c[6]} + {c[7]}*t + {c[8]}*sin(2*t)",
    })


@settings(max_examples=150, deadline=None)
@given(expressions, tval)
def test_derivative_matches_finite_difference(src, t0):
    f = parse_expression(src)
    h = 1e-5
    with np.errstate(all="ignore"):
        vals = [f.node.eval(np.array([t0 + k * h])) for k in (-2, -1, 0, 1, 2)]
        d = f.derivative().node.eval(np.array([t0]))
    vals = np.array([float(np.asarray(v).reshape(-1)[0]) for v in vals])
    d = float(np.asarray(d).reshape(-1)[0])
    assume(np.all(np.isfinite(vals)) and math.isfinite(d) and np.max(np.abs(vals)) < 1e6)
    fd = (vals[0] - 8 * vals[1] + 8 * vals[3] - vals[4]) / (12 * h)
    assert abs(fd - d) <= 1e-5 * (1 + np.max(np.abs(vals)) + abs(d))


@settings(max_examples=50, deadline=None)
@given(profiles(), st.lists(st.tuples(st.floats(-5, 5), tval), min_size=1, max_size=20))
def test_rulings_are_legendrian(p, pts):
    s, t = np.array(pts).T
    assert legendrian_residual(p, s, t).max_residual < 1e-12


@settings(max_examples=100, deadline=None)
@given(profiles(), tval, tval)
def test_height_gap_is_antisymmetric(p, t1, t2):
    r1, r2 = projected_ruling(p, t1), projected_ruling(p, t2)
    a, b = A.intersect_rulings(r1, r2), A.intersect_rulings(r2, r1)
    assert a.kind == b.kind
    if a.kind == "cross":
        assert math.isclose(a.x, b.x, rel_tol=1e-9, abs_tol=1e-9 * (1 + abs(a.x)))
        assert abs(a.gap + b.gap) <= 1e-9 * (1 + abs(a.gap) + abs(a.z1) + abs(a.z2))


@settings(max_examples=100, deadline=None)
@given(profiles(), tval, tval, tval)
def test_triangle_height_sum_equals_twice_area(p, t1, t2, t3):
    th = p.theta(np.array([t1, t2, t3]))
    assume(min(abs(math.sin(th[i] - th[j])) for i, j in ((0, 1), (1, 2), (2, 0))) > 0.05)
    try:
        r = A.area_identity(p, t1, t2, t3)
    except DegenerateTriple:
        assume(False)
    scale = 1 + max(abs(v) for pt in (r.P, r.Q, r.R) for v in pt) ** 2
    assert abs(r.lhs - r.rhs) <= 1e-10 * scale


@settings(max_examples=100, deadline=None)
@given(profiles(), st.lists(tval, min_size=1, max_size=10))
def test_decompose_round_trip(p, ts):
    t = np.array(ts)
    delta, xi, _, _ = decompose(p, t)
    alpha, beta = recompose(p.theta(t), delta, xi)
    assert np.allclose(alpha, p.alpha(t), atol=1e-12, rtol=1e-12)
    assert np.allclose(beta, p.beta(t), atol=1e-12, rtol=1e-12)
