import math

import numpy as np
import pytest

from pmin.errors import DomainError, ExpressionSyntaxError, ProfileError
from pmin.profile import SurfaceProfile, constant, parse_expression, tabulated


@pytest.mark.parametrize("src,t,value,deriv", [
    ("atan(t) + pi/2", 0.0, math.pi / 2, 1.0),
    ("acot(t/2)", 2.0, math.pi / 4, -0.25),
    ("-t", 3.0, -3.0, -1.0),
    ("atan(t)+pi/2", 1.0, 3 * math.pi / 4, 0.5),
    ("-t", 7.0, -7.0, -1.0),
])
def test_value_and_derivative(src, t, value, deriv):
    v, d = parse_expression(src).eval_with_derivative(t)
    assert v == pytest.approx(value, abs=1e-15)
    assert d == pytest.approx(deriv, abs=1e-15)


def test_acot_derivative_matches_centered_difference():
    f = parse_expression("acot(t/2)")
    h = 1e-6
    fd = (f(2 + h) - f(2 - h)) / (2 * h)
    assert abs(fd - f.derivative()(2.0)) < 1e-9


def test_acot_branch_is_continuous_in_zero_pi():
    f = parse_expression("acot(t)")
    t = np.linspace(-50, 50, 10001)
    v = f(t)
    assert np.all((v > 0) & (v < math.pi))
    assert np.all(np.diff(v) < 0)


def test_tabulated_reproduces_quadratic():
    ts = np.linspace(-1, 1, 21)
    f = tabulated(ts, ts ** 2)
    v, d = f.eval_with_derivative(0.5)
    assert abs(v - 0.25) < 1e-9 and abs(d - 1.0) < 1e-9


def test_tabulated_outside_range_is_domain_error():
    f = tabulated([0, 1, 2, 3], [0, 1, 4, 9])
    with pytest.raises(DomainError):
        f(5.0)


@pytest.mark.parametrize("src", ["sin(t", "t +", "2 ** ", "foo(t)", "t $ 2", ""])
def test_syntax_errors_carry_position(src):
    with pytest.raises(ExpressionSyntaxError) as exc:
        parse_expression(src)
    assert exc.value.position >= 0


def test_power_and_precedence():
    f = parse_expression("-t^2 + 2*t**3/4")
    assert f(2.0) == pytest.approx(-4 + 4)
    assert f.derivative()(2.0) == pytest.approx(-4 + 6)


def test_log_outside_domain():
    with pytest.raises(DomainError):
        parse_expression("log(t)")(-1.0)


def test_printed_tree_reparses_identically(rng):
    f = parse_expression("sin(2*t)^2 - acot(t/3) * exp(-t) / (1 + t^2)")
    g = parse_expression(f.to_text())
    t = rng.uniform(-3, 3, 20)
    assert np.array_equal(f(t), g(t))


def test_composition_and_inverse():
    f = parse_expression("t^3 + t")
    inv = f.inverse(-3, 3)
    u = np.linspace(-20, 20, 41)
    assert np.max(np.abs(f(inv(u)) - u)) < 1e-12
    assert inv.derivative()(2.0) == pytest.approx(1 / 4)
    assert parse_expression("sin(t)").compose(f)(1.0) == pytest.approx(math.sin(2.0))


def test_constant_profile_function():
    c = constant(2.5)
    assert c.is_constant and c(np.zeros(3)).tolist() == [2.5] * 3
    assert c.derivative()(1.0) == 0.0


def test_profile_from_delta_xi_matches_alpha_beta():
    p = SurfaceProfile.from_dict({"theta": "atan(t)", "delta": 1, "xi": 0, "gamma": "t"})
    t = np.linspace(-3, 3, 7)
    assert np.allclose(p.alpha(t), np.cos(np.arctan(t)), atol=1e-15)
    assert np.allclose(p.beta(t), np.sin(np.arctan(t)), atol=1e-15)


def test_profile_validation():
    with pytest.raises(ProfileError):
        SurfaceProfile.from_dict({"theta": "t"})
    with pytest.raises(ProfileError):
        SurfaceProfile.from_dict({"theta": "t", "gamma": "t", "t_range": [1, 0]})
    with pytest.raises(ProfileError):
        SurfaceProfile.from_dict({"theta": "t", "gamma": "t", "alpha": 1, "delta": 1})
    with pytest.raises(DomainError):
        SurfaceProfile.from_dict({"theta": "log(t)", "gamma": "t", "t_range": [-1, 1]})


def test_annulus_requires_periodic_functions():
    doc = {"theta": "t", "alpha": "cos(t)", "beta": "sin(t)", "gamma": "sin(2*t)",
           "t_range": [0, 2 * math.pi], "topology": "annulus"}
    assert SurfaceProfile.from_dict(doc).topology == "annulus"
    doc["theta"] = "t/2"
    assert SurfaceProfile.from_dict(doc).topology == "annulus"
    doc["theta"] = "t/3"
    with pytest.raises(ProfileError):
        SurfaceProfile.from_dict(doc)
    doc["theta"] = "t"
    doc["gamma"] = "t"
    with pytest.raises(ProfileError):
        SurfaceProfile.from_dict(doc)


def test_to_dict_round_trip():
    p = SurfaceProfile.from_dict({"theta": "acot(t/2)", "alpha": -1, "beta": 0, "gamma": "t",
                                  "t_range": [-5, 5]})
    q = SurfaceProfile.from_dict(p.to_dict())
    t = np.linspace(-5, 5, 11)
    for f, g in zip(p.functions, q.functions):
        assert np.array_equal(f(t), g(t))
