"""Collision geometry in velocity space.

All functions broadcast over leading axes: a ``Vec3`` is an array whose last
axis has length 3, so ``(n, 3)`` batches are accepted everywhere.

Frame convention
----------------
``frame_of`` picks ``I(X)`` from the cross product of ``X`` with the coordinate
axis least aligned with it, for lexicographically positive ``X`` (first nonzero
component positive), and extends to the other half-space by
``I(-X) = -I(X)``, ``J(-X) = -J(X)``. The triple ``(X, I, J)/|X|`` is then
direct on the positive half-space and reversed on the negative one;
``frame_orientation`` reports which. The odd symmetry makes the deviation
``c`` exactly antisymmetric in its two velocity arguments.

Because the orientation can differ between two vectors, the angle alignment
of two collisions is a shift *or* a reflection: ``Gamma(Y, phi0 + s * phi)``
with ``s = frame_orientation(X) * frame_orientation(Y)``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .kernel import AngularLaw, KernelSpec, _g_scalar, _quad, g_of_z, phi_k, psi_k, HALF_PI

TWO_PI = 2.0 * math.pi

# relative |X x Y| below which X and Y are treated as collinear
COLLINEAR_TOL = 1e-12


class Frame(NamedTuple):
    i_vec: np.ndarray
    j_vec: np.ndarray


def _as_vec(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (3,):
        raise ValueError(f"expected trailing dimension 3, got shape {x.shape}")
    return x


def norm(x) -> np.ndarray:
    x = _as_vec(x)
    return np.sqrt(np.einsum("...k,...k->...", x, x))


def frame_orientation(X) -> np.ndarray:
    """+1 where ``X`` is lexicographically positive, -1 where negative, 0 for the zero vector."""
    X = _as_vec(X)
    nz = X != 0
    first = np.argmax(nz, axis=-1)
    lead = np.take_along_axis(X, first[..., None], axis=-1)[..., 0]
    return np.sign(lead)


def frame_of(X) -> Frame:
    """Orthogonal pair ``(I(X), J(X))`` with ``|I| = |J| = |X|``."""
    X = _as_vec(X)
    s = frame_orientation(X)
    if np.any(s == 0):
        raise ValueError("frame_of is undefined for the zero vector")
    Y = X * s[..., None]
    absY = np.abs(Y)
    # least aligned axis; ties go to the highest index
    k = 2 - np.argmin(absY[..., ::-1], axis=-1)
    y0, y1, y2 = Y[..., 0], Y[..., 1], Y[..., 2]
    zero = np.zeros_like(y0)
    # e_k x Y for k = 0, 1, 2
    c0 = np.stack([zero, -y2, y1], axis=-1)
    c1 = np.stack([y2, zero, -y0], axis=-1)
    c2 = np.stack([-y1, y0, zero], axis=-1)
    k = k[..., None]
    ek_cross = np.where(k == 0, c0, np.where(k == 1, c1, c2))
    ny = norm(Y)
    I = ek_cross * (ny / norm(ek_cross))[..., None]
    J = np.cross(Y, I) / ny[..., None]
    return Frame(I * s[..., None], J * s[..., None])


def gamma_vec(X, phi) -> np.ndarray:
    """``cos(phi) I(X) + sin(phi) J(X)``: orthogonal to ``X``, same norm."""
    fr = frame_of(X)
    phi = np.asarray(phi, dtype=float)[..., None]
    return np.cos(phi) * fr.i_vec + np.sin(phi) * fr.j_vec


def _gamma_or_zero(X, phi) -> np.ndarray:
    X = _as_vec(X)
    zero = np.all(X == 0, axis=-1)
    if not np.any(zero):
        return gamma_vec(X, phi)
    Xs = np.where(zero[..., None], 1.0, X)
    return np.where(zero[..., None], 0.0, gamma_vec(Xs, phi))


def deviation_a(v, v_star, theta, phi) -> np.ndarray:
    """Deviation ``a`` with ``|a| = sqrt((1 - cos theta)/2) |v - v*|``."""
    X = _as_vec(v) - _as_vec(v_star)
    theta = np.asarray(theta, dtype=float)[..., None]
    one_minus_cos = 2.0 * np.sin(0.5 * theta) ** 2
    return -0.5 * one_minus_cos * X + 0.5 * np.sin(theta) * _gamma_or_zero(X, phi)


def post_collision(v, v_star, theta, phi):
    a = deviation_a(v, v_star, theta, phi)
    return _as_vec(v) + a, _as_vec(v_star) - a


def post_collision_sigma(v, v_star, theta, phi):
    """Post-collision velocities through the unit-sphere parameterisation."""
    v, v_star = _as_vec(v), _as_vec(v_star)
    X = v - v_star
    zero = np.all(X == 0, axis=-1)[..., None]
    X = np.where(zero, 1.0, X)      # placeholder direction; the result is masked below
    nx = norm(X)[..., None]
    fr = frame_of(X)
    theta = np.asarray(theta, dtype=float)[..., None]
    phi = np.asarray(phi, dtype=float)[..., None]
    sigma = (X * np.cos(theta) + fr.i_vec * np.sin(theta) * np.cos(phi)
             + fr.j_vec * np.sin(theta) * np.sin(phi)) / nx
    nx = np.where(zero, 0.0, nx)
    mid = 0.5 * (v + v_star)
    return mid + 0.5 * nx * sigma, mid - 0.5 * nx * sigma


def deflection_angle(spec: KernelSpec, v, v_star, z) -> np.ndarray:
    """``theta = G(z / |v - v*|**gamma)``; zero relative velocity gives ``theta = 0``."""
    x = norm(_as_vec(v) - _as_vec(v_star))
    z = np.broadcast_to(np.asarray(z, dtype=float), x.shape)
    with np.errstate(divide="ignore"):
        u = np.where(x > 0, z / np.where(x > 0, x, 1.0) ** spec.gamma, np.inf)
    return g_of_z(spec, u)


def c_fn(spec: KernelSpec, v, v_star, z, phi) -> np.ndarray:
    theta = deflection_angle(spec, v, v_star, z)
    return deviation_a(v, v_star, theta, phi)


def c_k_fn(spec: KernelSpec, v, v_star, z, phi, K: float) -> np.ndarray:
    c = c_fn(spec, v, v_star, z, phi)
    keep = np.asarray(z, dtype=float) <= K
    return np.where(np.asarray(keep)[..., None], c, 0.0)


def tanaka_align(X, Y):
    """Angle alignment ``(phi0, sign)`` of ``Gamma(X, .)`` onto ``Gamma(Y, .)``.

    For every ``phi``, with ``psi = phi0 + sign * phi``,
    ``Gamma(X, phi) . Gamma(Y, psi) = X.Y cos^2(phi - phi_X) + |X||Y| sin^2(phi - phi_X)``
    and hence ``|Gamma(X, phi) - Gamma(Y, psi)| <= |X - Y|``.
    ``sign`` is -1 exactly when the two frames have opposite orientation.
    Zero or collinear inputs give ``(0, 1)``.
    """
    X, Y = np.broadcast_arrays(_as_vec(X), _as_vec(Y))
    nx, ny = norm(X), norm(Y)
    n = np.cross(X, Y)
    nn = norm(n)
    degenerate = (nx == 0) | (ny == 0) | (nn <= COLLINEAR_TOL * nx * ny)
    safe = ~degenerate
    phi0 = np.zeros(nx.shape)
    sign = np.ones(nx.shape)
    if np.any(safe):
        Xs, Ys = X[safe], Y[safe]
        nhat = n[safe] / nn[safe][:, None]
        i_x = np.cross(nhat, Xs)          # |n x X| = |X|
        i_y = np.cross(nhat, Ys)
        fx, fy = frame_of(Xs), frame_of(Ys)
        phi_x = np.arctan2(np.einsum("ij,ij->i", i_x, fx.j_vec), np.einsum("ij,ij->i", i_x, fx.i_vec))
        phi_y = np.arctan2(np.einsum("ij,ij->i", i_y, fy.j_vec), np.einsum("ij,ij->i", i_y, fy.i_vec))
        s = frame_orientation(Xs) * frame_orientation(Ys)
        phi0[safe] = np.mod(phi_y - s * phi_x, TWO_PI)
        sign[safe] = s
    phi0 = np.where(phi0 >= TWO_PI, 0.0, phi0)
    if phi0.ndim == 0:
        return float(phi0), float(sign)
    return phi0, sign


def tanaka_phi0(X, Y):
    """Rotation part of ``tanaka_align``."""
    return tanaka_align(X, Y)[0]


def tanaka_phase(X, Y):
    """``phi_X``: the angle at which ``Gamma(X, .)`` lies in the plane of ``X`` and ``Y``."""
    X, Y = np.broadcast_arrays(_as_vec(X), _as_vec(Y))
    n = np.cross(X, Y)
    nhat = n / norm(n)[..., None]
    i_x = np.cross(nhat, X)
    fx = frame_of(X)
    return np.arctan2(np.einsum("...k,...k->...", i_x, fx.j_vec),
                      np.einsum("...k,...k->...", i_x, fx.i_vec))


def aligned_phi(phi, phi0, sign):
    return np.mod(phi0 + sign * np.asarray(phi, dtype=float), TWO_PI)


# ---------------------------------------------------------------------------
# the three terms bounding the coupled squared distance after one collision


def _g_gap_sq_integral(spec: KernelSpec, x: float, xt: float, K: float) -> float:
    """``int_0^K (G(z/x^g) - G(z/xt^g))^2 dz``."""
    if x == xt:
        return 0.0
    sx = x ** spec.gamma if x > 0 else 0.0
    st = xt ** spec.gamma if xt > 0 else 0.0

    def g(z, s):
        return _g_scalar(spec, z / s) if s > 0 else 0.0

    f = lambda z: (g(z, sx) - g(z, st)) ** 2
    pts = None
    if spec.law is AngularLaw.HARD_SPHERES:
        pts = [HALF_PI * sx, HALF_PI * st]
    return _quad(f, 0.0, K, points=pts)


def fundest_terms(spec: KernelSpec, K: float, v, v_star, vt, vt_star):
    """Terms ``(A1, A2, A3)`` bounding the expected change of ``|v - vt|^2``.

    The first pair collides without cutoff, the second with cutoff ``K`` and
    aligned angles.
    """
    if K < 1:
        raise ValueError("cutoff K must be >= 1")
    v, v_star, vt, vt_star = (np.asarray(u, dtype=float) for u in (v, v_star, vt, vt_star))
    X, Xt = v - v_star, vt - vt_star
    x, xt = float(norm(X)), float(norm(Xt))
    A1 = 2.0 * x * xt * _g_gap_sq_integral(spec, x, xt, K)
    pk, pkt = phi_k(spec, x, K), phi_k(spec, xt, K)
    A2 = -float(np.dot((v - vt) + (v_star - vt_star), X * pk - Xt * pkt))
    A3 = (x * x + 2.0 * float(norm(v - vt)) * x) * psi_k(spec, x, K)
    return A1, A2, A3


def fundest_lhs(spec: KernelSpec, K: float, v, v_star, vt, vt_star, n_phi: int = 16) -> float:
    """Direct quadrature of ``int_0^inf int_0^2pi (|v + c - vt - c_K~|^2 - |v - vt|^2) dphi dz``.

    The angular integrand is a trigonometric polynomial of degree 2, so the
    equispaced rule with ``n_phi >= 5`` nodes is exact in ``phi``.
    """
    v, v_star, vt, vt_star = (np.asarray(u, dtype=float) for u in (v, v_star, vt, vt_star))
    X, Xt = v - v_star, vt - vt_star
    x, xt = float(norm(X)), float(norm(Xt))
    phis = np.arange(n_phi) * (TWO_PI / n_phi)
    phi0, sgn = tanaka_align(X, Xt)
    psis = aligned_phi(phis, phi0, sgn)
    gam = _gamma_or_zero(np.broadcast_to(X, (n_phi, 3)), phis)
    gamt = _gamma_or_zero(np.broadcast_to(Xt, (n_phi, 3)), psis)
    d0 = v - vt
    base = float(d0 @ d0)
    sx = x ** spec.gamma if x > 0 else 0.0
    st = xt ** spec.gamma if xt > 0 else 0.0

    def dev(s, Xv, gm, z):
        if s == 0:
            return np.zeros((n_phi, 3))
        th = _g_scalar(spec, z / s)
        return -math.sin(0.5 * th) ** 2 * Xv + 0.5 * math.sin(th) * gm

    def integrand(z):
        c = dev(sx, X, gam, z)
        ct = dev(st, Xt, gamt, z) if z <= K else 0.0
        d = d0 + c - ct
        return TWO_PI * (float(np.mean(np.einsum("ij,ij->i", d, d))) - base)

    pts = [K]
    if spec.law is AngularLaw.HARD_SPHERES:
        pts += [HALF_PI * sx, HALF_PI * st]
        hi = max(K, HALF_PI * sx)
        return _quad(integrand, 0.0, min(K, hi), points=pts) + (
            _quad(integrand, K, hi, points=pts) if hi > K else 0.0)
    return _quad(integrand, 0.0, K) + _quad(integrand, K, math.inf)
