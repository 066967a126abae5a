"""Shared profile builders for the test suite."""
import numpy as np

from pmin.profile import SurfaceProfile
from pmin.verifier import bundled_profiles_dir


def bundled(name):
    return SurfaceProfile.load(bundled_profiles_dir() / f"{name}.json")


def _c(rng, lo, hi):
    return repr(float(rng.uniform(lo, hi)))


def random_profile(rng, t_range=(-3.0, 3.0), s_range=(-3.0, 3.0)):
    """Generic profile: turning theta, non-trivial alpha, beta, gamma."""
    doc = {
        "theta": f"{_c(rng, -1, 1)} + {_c(rng, 0.3, 1.2)}*t + {_c(rng, -0.3, 0.3)}*sin({_c(rng, 0.5, 2)}*t)",
        "alpha": f"{_c(rng, -2, 2)} + {_c(rng, -1, 1)}*cos(t)",
        "beta": f"{_c(rng, -2, 2)} + {_c(rng, -0.5, 0.5)}*t",
        "gamma": f"{_c(rng, -1, 1)} + {_c(rng, 0.5, 2)}*t + {_c(rng, -0.5, 0.5)}*sin(t)",
        "t_range": list(t_range),
        "s_range": list(s_range),
    }
    return SurfaceProfile.from_dict(doc)


def random_reduced_profile(rng, t_range=(-3.0, 3.0)):
    """Profile with xi = 0 (base point at the foot of the ruling)."""
    doc = {
        "theta": f"{_c(rng, -1, 1)} + {_c(rng, 0.3, 1.2)}*t",
        "delta": f"{_c(rng, -2, 2)} + {_c(rng, -1, 1)}*sin(t)",
        "xi": 0,
        "gamma": f"{_c(rng, -1, 1)} + {_c(rng, 0.5, 2)}*t",
        "t_range": list(t_range),
        "s_range": [-3, 3],
    }
    return SurfaceProfile.from_dict(doc)


def random_theta(rng):
    """Strictly increasing or decreasing theta, for tilted constructions."""
    sign = 1 if rng.uniform() < 0.5 else -1
    return (f"{_c(rng, -3, 3)} + {sign * rng.uniform(0.2, 1.0)!r}*t"
            f" + {_c(rng, -0.15, 0.15)}*sin(t)")


def random_g(rng):
    return f"{_c(rng, -1, 1)}*t + {_c(rng, -0.5, 0.5)}*t^2 + {_c(rng, -1, 1)}*sin(t)"


def fd_cross(profile, s, t, h=1e-5):
    from pmin.ruled import evaluate
    ds = (evaluate(profile, s + h, t) - evaluate(profile, s - h, t)) / (2 * h)
    dt = (evaluate(profile, s, t + h) - evaluate(profile, s, t - h)) / (2 * h)
    return np.cross(ds, dt)
