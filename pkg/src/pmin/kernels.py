"""Backend selection for the numeric hot loops.

The compiled extension ``pmin._kernels`` is used when it imports; otherwise
(or when ``PMIN_PURE_PYTHON=1``) the numpy implementations in
``pmin._kernels_py`` are used.  Both expose identical functions.
"""
from __future__ import annotations

import os
from types import ModuleType

import numpy as np

from . import _kernels_py

__all__ = ["BACKEND", "available_backends", "get_backend", "singular_grid", "immersion_grid",
           "cross_grid", "bisect_singular", "pair_gaps", "pde_divergence"]


def _load_compiled() -> ModuleType | None:
    if os.environ.get("PMIN_PURE_PYTHON", "") not in ("", "0"):
        return None
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _kernels


_compiled = _load_compiled()
BACKEND = "compiled" if _compiled is not None else "python"


def available_backends() -> list[str]:
    return ["compiled", "python"] if _compiled is not None else ["python"]


def get_backend(name: str | None = None) -> ModuleType:
    name = name or BACKEND
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return _compiled
    if name == "python":
        return _kernels_py
    raise ValueError(f"unknown backend {name!r}")


def _f(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def singular_grid(s, dtheta, delta, ddelta, xi, dxi, dgamma, backend=None):
    return get_backend(backend).singular_grid(*map(_f, (s, dtheta, delta, ddelta, xi, dxi, dgamma)))


def immersion_grid(s, dtheta, delta, ddelta, xi, dxi, dgamma, backend=None):
    return get_backend(backend).immersion_grid(*map(_f, (s, dtheta, delta, ddelta, xi, dxi, dgamma)))


def cross_grid(s, theta, dtheta, delta, ddelta, xi, dxi, dgamma, backend=None):
    return get_backend(backend).cross_grid(*map(_f, (s, theta, dtheta, delta, ddelta, xi, dxi, dgamma)))


def bisect_singular(lo, hi, dtheta, delta, ddelta, xi, dxi, dgamma, tol=1e-10, maxiter=200,
                    backend=None):
    args = map(_f, (lo, hi, dtheta, delta, ddelta, xi, dxi, dgamma))
    return get_backend(backend).bisect_singular(*args, float(tol), int(maxiter))


def pair_gaps(theta, alpha, beta, gamma, eps_parallel=1e-9, backend=None):
    return get_backend(backend).pair_gaps(*map(_f, (theta, alpha, beta, gamma)), float(eps_parallel))


def pde_divergence(u, x, y, h, backend=None):
    return get_backend(backend).pde_divergence(_f(u), _f(x), _f(y), float(h))
