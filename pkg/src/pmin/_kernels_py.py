"""Pure numpy implementations of the hot loops.

Signatures mirror the compiled ``_kernels`` extension exactly; see
:mod:`pmin.kernels` for the selection logic.
"""
import numpy as np


def singular_grid(s, dtheta, delta, ddelta, xi, dxi, dgamma):
    """Singular residual on the (t, s) grid, rows indexed by t."""
    S = s[None, :]
    th1, d, d1, x, x1, g1 = (a[:, None] for a in (dtheta, delta, ddelta, xi, dxi, dgamma))
    w = S + x
    return (w * w + d * d) * th1 + (2.0 * S + x) * d1 + g1 - d * x1


def immersion_grid(s, dtheta, delta, ddelta, xi, dxi, dgamma):
    S = s[None, :]
    th1, d, d1, x, x1, g1 = (a[:, None] for a in (dtheta, delta, ddelta, xi, dxi, dgamma))
    ra = (S + x) * th1 + d1
    rb = S * d1 + g1 - d * (x1 - d * th1)
    return ra, rb


def cross_grid(s, theta, dtheta, delta, ddelta, xi, dxi, dgamma):
    """Normal d_s X x d_t X on the grid, shape (nt, ns, 3)."""
    S = s[None, :]
    th, th1, d, d1, x, x1, g1 = (a[:, None] for a in (theta, dtheta, delta, ddelta, xi, dxi, dgamma))
    c, sn = np.cos(th), np.sin(th)
    A = (S + x) * th1 + d1
    B = x1 - d * th1
    C = S * d1 + g1 - d * B
    out = np.empty(A.shape + (3,))
    out[..., 0] = -c * C - A * d * sn
    out[..., 1] = -sn * C + A * d * c
    out[..., 2] = A
    return out


def bisect_singular(lo, hi, dtheta, delta, ddelta, xi, dxi, dgamma, tol, maxiter):
    """Bisection of the singular residual in ``s`` for each bracket.

    All arguments except ``tol``/``maxiter`` are 1-D arrays of equal length,
    one entry per bracket.  Returns ``(root, residual)``.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)

    def resid(S):
        w = S + xi
        return (w * w + delta * delta) * dtheta + (2.0 * S + xi) * ddelta + dgamma - delta * dxi

    f_lo = resid(lo)
    mid = 0.5 * (lo + hi)
    f_mid = resid(mid)
    active = np.ones(lo.shape, dtype=bool)
    for _ in range(maxiter):
        if not active.any():
            break
        m = 0.5 * (lo + hi)
        fm = resid(m)
        mid = np.where(active, m, mid)
        f_mid = np.where(active, fm, f_mid)
        stop = active & ((np.abs(fm) < tol) | (m <= lo) | (m >= hi))
        go = active & ~stop
        move_lo = go & ((fm < 0.0) == (f_lo < 0.0))
        move_hi = go & ~move_lo
        lo = np.where(move_lo, m, lo)
        f_lo = np.where(move_lo, fm, f_lo)
        hi = np.where(move_hi, m, hi)
        active = go
    return mid, f_mid


def pair_gaps(theta, alpha, beta, gamma, eps_parallel):
    """Height gaps between all pairs of rulings above their projected crossing.

    Returns ``(gap, sin_psi)``; ``gap[i, j]`` is z_j - z_i and is NaN where
    the projected lines are parallel within ``eps_parallel``.
    """
    c, sn = np.cos(theta), np.sin(theta)
    sin_psi = sn[None, :] * c[:, None] - c[None, :] * sn[:, None]  # sin(theta_j - theta_i)
    da = alpha[None, :] - alpha[:, None]
    db = beta[None, :] - beta[:, None]
    first = -(da * c[None, :] + db * sn[None, :]) * (da * c[:, None] + db * sn[:, None])
    cross = alpha[None, :] * beta[:, None] - alpha[:, None] * beta[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = first / sin_psi - cross + (gamma[None, :] - gamma[:, None])
    gap[np.abs(sin_psi) < eps_parallel] = np.nan
    return gap, sin_psi


def pde_divergence(u, x, y, h):
    """Centered-difference divergence of (grad u + F)/|grad u + F|.

    ``u`` has shape (len(x), len(y)) and includes a two-node halo on every
    side; outputs are for the interior (halo stripped), shape
    (len(x) - 4, len(y) - 4): residual, |grad u + F|, and a Newton
    estimate of the distance to the zero set of grad u + F.
    """
    X = x[:, None]
    Y = y[None, :]
    inv2h = 1.0 / (2.0 * h)
    ux = (u[2:, 1:-1] - u[:-2, 1:-1]) * inv2h
    uy = (u[1:-1, 2:] - u[1:-1, :-2]) * inv2h
    vx = ux - Y[:, 1:-1]
    vy = uy + X[1:-1, :]
    norm = np.hypot(vx, vy)
    with np.errstate(divide="ignore", invalid="ignore"):
        nx = vx / norm
        ny = vy / norm
    res = (nx[2:, 1:-1] - nx[:-2, 1:-1]) * inv2h + (ny[1:-1, 2:] - ny[1:-1, :-2]) * inv2h
    # Jacobian of v at interior nodes
    j11 = (vx[2:, 1:-1] - vx[:-2, 1:-1]) * inv2h
    j12 = (vx[1:-1, 2:] - vx[1:-1, :-2]) * inv2h
    j21 = (vy[2:, 1:-1] - vy[:-2, 1:-1]) * inv2h
    j22 = (vy[1:-1, 2:] - vy[1:-1, :-2]) * inv2h
    v1 = vx[1:-1, 1:-1]
    v2 = vy[1:-1, 1:-1]
    dist = _min_norm_step(j11, j12, j21, j22, v1, v2)
    return res, norm[1:-1, 1:-1], dist


def _min_norm_step(a, b, c, d, v1, v2):
    # |pinv(J) v| for 2x2 J = [[a, b], [c, d]], elementwise
    det = a * d - b * c
    fro2 = a * a + b * b + c * c + d * d
    out = np.empty_like(a)
    regular = np.abs(det) > 1e-12 * np.maximum(fro2, 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        s1 = (d * v1 - b * v2) / det
        s2 = (-c * v1 + a * v2) / det
        reg = np.hypot(s1, s2)
        # rank one: pinv(J) = J^T / |J|_F^2
        w1 = (a * v1 + c * v2) / fro2
        w2 = (b * v1 + d * v2) / fro2
        rank1 = np.hypot(w1, w2)
    out[:] = np.where(regular, reg, np.where(fro2 > 0, rank1, np.inf))
    return out
