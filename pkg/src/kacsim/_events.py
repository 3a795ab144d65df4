"""Compiled per-event kernels.

Scalar re-implementations of the geometry in ``geometry.py`` (same frame
convention, same alignment rule) so that long runs do not pay numpy call
overhead per collision. ``tests/test_engine.py`` checks both paths agree.
"""

import math

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

HALF_PI = 0.5 * math.pi
TWO_PI = 2.0 * math.pi
COLLINEAR_TOL = 1e-12


@njit(cache=True)
def g_angle(law, nu, u):
    if law == 0:
        return max(HALF_PI - u, 0.0)
    if math.isinf(u):
        return 0.0
    return min((nu * u + HALF_PI ** (-nu)) ** (-1.0 / nu), HALF_PI)


@njit(cache=True)
def orientation(x0, x1, x2):
    if x0 != 0.0:
        return 1.0 if x0 > 0.0 else -1.0
    if x1 != 0.0:
        return 1.0 if x1 > 0.0 else -1.0
    if x2 != 0.0:
        return 1.0 if x2 > 0.0 else -1.0
    return 0.0


@njit(cache=True)
def frame(x0, x1, x2):
    s = orientation(x0, x1, x2)
    y0, y1, y2 = s * x0, s * x1, s * x2
    a0, a1, a2 = abs(y0), abs(y1), abs(y2)
    # least aligned axis, ties to the highest index
    if a2 <= a1 and a2 <= a0:
        e0, e1, e2 = -y1, y0, 0.0
    elif a1 <= a0:
        e0, e1, e2 = y2, 0.0, -y0
    else:
        e0, e1, e2 = 0.0, -y2, y1
    ny = math.sqrt(y0 * y0 + y1 * y1 + y2 * y2)
    scale = ny / math.sqrt(e0 * e0 + e1 * e1 + e2 * e2)
    i0, i1, i2 = e0 * scale, e1 * scale, e2 * scale
    j0 = (y1 * i2 - y2 * i1) / ny
    j1 = (y2 * i0 - y0 * i2) / ny
    j2 = (y0 * i1 - y1 * i0) / ny
    return s * i0, s * i1, s * i2, s * j0, s * j1, s * j2


@njit(cache=True)
def deviation(x0, x1, x2, z, phi, law, gamma, nu):
    """Deviation ``c`` for relative velocity ``x``; returns ``(c0, c1, c2, theta)``."""
    nx = math.sqrt(x0 * x0 + x1 * x1 + x2 * x2)
    if nx == 0.0:
        return 0.0, 0.0, 0.0, 0.0
    theta = g_angle(law, nu, z / nx ** gamma)
    if theta == 0.0:
        return 0.0, 0.0, 0.0, 0.0
    i0, i1, i2, j0, j1, j2 = frame(x0, x1, x2)
    cp, sp = math.cos(phi), math.sin(phi)
    h = math.sin(0.5 * theta)
    omc = -h * h                      # -(1 - cos theta)/2
    st = 0.5 * math.sin(theta)
    c0 = omc * x0 + st * (cp * i0 + sp * j0)
    c1 = omc * x1 + st * (cp * i1 + sp * j1)
    c2 = omc * x2 + st * (cp * i2 + sp * j2)
    return c0, c1, c2, theta


@njit(cache=True)
def _angle_in_frame(x0, x1, x2, n0, n1, n2):
    # in-plane vector n x X, expressed in the frame of X
    p0 = n1 * x2 - n2 * x1
    p1 = n2 * x0 - n0 * x2
    p2 = n0 * x1 - n1 * x0
    i0, i1, i2, j0, j1, j2 = frame(x0, x1, x2)
    return math.atan2(p0 * j0 + p1 * j1 + p2 * j2, p0 * i0 + p1 * i1 + p2 * i2)


@njit(cache=True)
def align(x0, x1, x2, y0, y1, y2):
    """``(phi0, sign)`` such that ``Gamma(Y, phi0 + sign*phi)`` tracks ``Gamma(X, phi)``."""
    nx = math.sqrt(x0 * x0 + x1 * x1 + x2 * x2)
    ny = math.sqrt(y0 * y0 + y1 * y1 + y2 * y2)
    n0 = x1 * y2 - x2 * y1
    n1 = x2 * y0 - x0 * y2
    n2 = x0 * y1 - x1 * y0
    nn = math.sqrt(n0 * n0 + n1 * n1 + n2 * n2)
    if nx == 0.0 or ny == 0.0 or nn <= COLLINEAR_TOL * nx * ny:
        return 0.0, 1.0
    n0, n1, n2 = n0 / nn, n1 / nn, n2 / nn
    phx = _angle_in_frame(x0, x1, x2, n0, n1, n2)
    phy = _angle_in_frame(y0, y1, y2, n0, n1, n2)
    s = orientation(x0, x1, x2) * orientation(y0, y1, y2)
    phi0 = (phy - s * phx) % TWO_PI
    if phi0 >= TWO_PI:
        phi0 = 0.0
    return phi0, s


@njit(cache=True)
def apply_events(vel, ii, jj, zz, pp, law, gamma, nu, K, theta_out):
    """Apply collisions in order; ``v_i += c``, ``v_j -= c``. Returns the number applied."""
    n_applied = 0
    for k in range(ii.shape[0]):
        i = ii[k]
        j = jj[k]
        z = zz[k]
        if z > K:
            theta_out[k] = 0.0
            continue
        c0, c1, c2, th = deviation(vel[i, 0] - vel[j, 0], vel[i, 1] - vel[j, 1],
                                   vel[i, 2] - vel[j, 2], z, pp[k], law, gamma, nu)
        theta_out[k] = th
        vel[i, 0] += c0
        vel[i, 1] += c1
        vel[i, 2] += c2
        vel[j, 0] -= c0
        vel[j, 1] -= c1
        vel[j, 2] -= c2
        n_applied += 1
    return n_applied


@njit(cache=True)
def apply_coupled_events(va, vb, ii, jj, zz, pp, law, gamma, nu, K1, K2, theta_a, theta_b):
    """Shared-noise collisions: system B (cutoff K2) uses ``phi``; system A (cutoff K1)
    uses the aligned angle and only collides when ``z <= K1``."""
    for k in range(ii.shape[0]):
        i = ii[k]
        j = jj[k]
        z = zz[k]
        phi = pp[k]
        xb0 = vb[i, 0] - vb[j, 0]
        xb1 = vb[i, 1] - vb[j, 1]
        xb2 = vb[i, 2] - vb[j, 2]
        xa0 = va[i, 0] - va[j, 0]
        xa1 = va[i, 1] - va[j, 1]
        xa2 = va[i, 2] - va[j, 2]
        if z <= K1:
            phi0, s = align(xb0, xb1, xb2, xa0, xa1, xa2)
            psi = (phi0 + s * phi) % TWO_PI
            c0, c1, c2, th = deviation(xa0, xa1, xa2, z, psi, law, gamma, nu)
            theta_a[k] = th
            va[i, 0] += c0
            va[i, 1] += c1
            va[i, 2] += c2
            va[j, 0] -= c0
            va[j, 1] -= c1
            va[j, 2] -= c2
        else:
            theta_a[k] = 0.0
        if z <= K2:
            c0, c1, c2, th = deviation(xb0, xb1, xb2, z, phi, law, gamma, nu)
            theta_b[k] = th
            vb[i, 0] += c0
            vb[i, 1] += c1
            vb[i, 2] += c2
            vb[j, 0] -= c0
            vb[j, 1] -= c1
            vb[j, 2] -= c2
        else:
            theta_b[k] = 0.0


def warmup():
    """Trigger compilation on tiny inputs."""
    v = np.zeros((2, 3))
    v[0, 0] = 1.0
    idx = np.zeros(1, dtype=np.int64)
    jdx = np.ones(1, dtype=np.int64)
    z = np.ones(1)
    t = np.zeros(1)
    apply_events(v, idx, jdx, z, z, 1, 0.5, 0.5, 1.0, t)
    apply_coupled_events(v.copy(), v, idx, jdx, z, z, 1, 0.5, 0.5, 1.0, 1.0, t, t.copy())
