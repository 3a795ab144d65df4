"""Collision-kernel mathematics.

The kernel factorises as ``B(|v - v*|, theta) sin(theta) = |v - v*|**gamma * beta(theta)``
with ``beta`` supported on ``(0, pi/2)``. Two angular laws are supported:

* ``HARD_SPHERES``: ``beta = 1``;
* ``POWER``: ``beta(theta) = theta**(-1 - nu)`` (non-cutoff, ``0 < nu < 1``).

For both laws the tail integral ``H(theta) = int_theta^{pi/2} beta`` and its
inverse ``G`` have closed forms, which is what keeps the simulation loop free
of quadrature.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

HALF_PI = 0.5 * math.pi

# quadrature settings shared by the diagnostic integrals
_EPSREL = 1e-10
_EPSABS = 1e-13
_LIMIT = 500


class ParameterError(ValueError):
    """Raised when an argument lies outside its mathematical domain."""


class QuadratureError(RuntimeError):
    """Raised when an adaptive quadrature fails to converge."""


class AngularLaw(enum.Enum):
    HARD_SPHERES = "hard-spheres"
    POWER = "power"


@dataclass(frozen=True)
class KernelSpec:
    """Parameters of the collision kernel.

    ``nu`` is present iff ``law`` is ``AngularLaw.POWER``.
    """

    gamma: float
    law: AngularLaw
    nu: Optional[float] = None

    def __post_init__(self):
        if not (0.0 <= self.gamma <= 1.0):
            raise ParameterError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.law is AngularLaw.POWER:
            if self.nu is None or not (0.0 < self.nu < 1.0):
                raise ParameterError(f"nu must lie in (0, 1), got {self.nu}")
        elif self.nu is not None:
            raise ParameterError("nu is only meaningful for the power law")

    @classmethod
    def hard_spheres(cls, gamma: float = 1.0) -> "KernelSpec":
        return cls(gamma=float(gamma), law=AngularLaw.HARD_SPHERES)

    @classmethod
    def power_law(cls, gamma: float, nu: float) -> "KernelSpec":
        return cls(gamma=float(gamma), law=AngularLaw.POWER, nu=float(nu))

    @property
    def law_code(self) -> int:
        """Integer tag used by the compiled event kernels (0 hard spheres, 1 power)."""
        return 0 if self.law is AngularLaw.HARD_SPHERES else 1

    def to_dict(self) -> dict:
        d = {"gamma": self.gamma, "law": self.law.value}
        if self.nu is not None:
            d["nu"] = self.nu
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        law = AngularLaw(d["law"])
        return cls(gamma=float(d["gamma"]), law=law,
                   nu=None if d.get("nu") is None else float(d["nu"]))


def from_inverse_power(s: float) -> KernelSpec:
    """Kernel for a repulsive ``1/r**s`` force with ``s > 5`` (hard potentials)."""
    if not s > 5:
        raise ParameterError(f"inverse-power exponent must exceed 5, got {s}")
    return KernelSpec.power_law(gamma=(s - 5.0) / (s - 1.0), nu=2.0 / (s - 1.0))


def beta(spec: KernelSpec, theta):
    theta = np.asarray(theta, dtype=float)
    inside = (theta > 0) & (theta < HALF_PI)
    if spec.law is AngularLaw.HARD_SPHERES:
        out = np.where(inside, 1.0, 0.0)
    else:
        with np.errstate(divide="ignore"):
            out = np.where(inside, np.power(np.where(inside, theta, 1.0), -1.0 - spec.nu), 0.0)
    return out[()] if out.ndim == 0 else out


def h_of_theta(spec: KernelSpec, theta):
    """Tail integral ``H(theta)`` of the angular density, for ``theta`` in ``(0, pi/2]``."""
    theta = np.asarray(theta, dtype=float)
    if np.any(~(theta > 0)) or np.any(theta > HALF_PI):
        raise ParameterError("theta must lie in (0, pi/2]")
    if spec.law is AngularLaw.HARD_SPHERES:
        out = HALF_PI - theta
    else:
        nu = spec.nu
        out = (theta ** -nu - HALF_PI ** -nu) / nu
    return out[()] if out.ndim == 0 else out


def g_of_z(spec: KernelSpec, z):
    """Inverse ``G`` of ``H``: the deviation angle for substituted variable ``z >= 0``.

    ``z = inf`` is accepted and maps to 0 (no deflection).
    """
    z = np.asarray(z, dtype=float)
    if np.any(~(z >= 0)):
        raise ParameterError("z must be nonnegative")
    if spec.law is AngularLaw.HARD_SPHERES:
        out = np.maximum(HALF_PI - z, 0.0)
    else:
        nu = spec.nu
        out = np.minimum((nu * z + HALF_PI ** -nu) ** (-1.0 / nu), HALF_PI)
    return out[()] if out.ndim == 0 else out


def _g_scalar(spec: KernelSpec, z: float) -> float:
    if spec.law is AngularLaw.HARD_SPHERES:
        return max(HALF_PI - z, 0.0)
    nu = spec.nu
    return min((nu * z + HALF_PI ** -nu) ** (-1.0 / nu), HALF_PI)


def _quad(f, a, b, points=None):
    kw = dict(epsabs=_EPSABS, epsrel=_EPSREL, limit=_LIMIT, full_output=1)
    if points is not None and math.isfinite(b):
        pts = [p for p in points if a < p < b]
        if pts:
            kw["points"] = pts
    res = integrate.quad(f, a, b, **kw)
    val, err = res[0], res[1]
    if len(res) > 3 and res[3] and "roundoff" not in str(res[3]):
        # accept only tiny residual errors when quad complains
        if err > 1e-8 * max(1.0, abs(val)):
            raise QuadratureError(f"quadrature did not converge: {res[3]}")
    return val


def _power_tail_start(nu: float, g_small: float = 1e-3) -> float:
    """Smallest u with G(u) <= g_small for the power law."""
    return max((g_small ** -nu - HALF_PI ** -nu) / nu, 0.0)


def _power_tail_one_minus_cos(nu: float, u0: float) -> float:
    """``int_{u0}^inf (1 - cos G(u)) du`` from the series ``G^2/2 - G^4/24 + G^6/720``.

    Only used where ``G(u0) <= 1e-3`` so the truncation error is below 1e-16 relative.
    """
    w = nu * u0 + HALF_PI ** -nu
    t2 = w ** (1.0 - 2.0 / nu) / (2.0 - nu)
    t4 = w ** (1.0 - 4.0 / nu) / (4.0 - nu)
    t6 = w ** (1.0 - 6.0 / nu) / (6.0 - nu)
    return t2 / 2.0 - t4 / 24.0 + t6 / 720.0


def one_minus_cos_g_integral(spec: KernelSpec, lo: float, hi: float) -> float:
    """``int_lo^hi (1 - cos G(u)) du`` for ``0 <= lo <= hi <= inf``."""
    if not (0 <= lo <= hi):
        raise ParameterError("need 0 <= lo <= hi")
    if spec.law is AngularLaw.HARD_SPHERES:
        # 1 - cos(pi/2 - u) = 1 - sin(u) on [0, pi/2], zero beyond
        a, b = min(lo, HALF_PI), min(hi, HALF_PI)
        return (b - a) + (math.cos(b) - math.cos(a))
    nu = spec.nu
    u0 = _power_tail_start(nu)
    total = 0.0
    if lo < u0:
        top = min(hi, u0)
        total += _quad(lambda u: 1.0 - math.cos(_g_scalar(spec, u)), lo, top)
    if hi > u0:
        start = max(lo, u0)
        total += _power_tail_one_minus_cos(nu, start)
        if math.isfinite(hi):
            total -= _power_tail_one_minus_cos(nu, hi)
    return total


def phi_k(spec: KernelSpec, x: float, K: float) -> float:
    """``Phi_K(x) = pi * int_0^K (1 - cos G(z / x**gamma)) dz``."""
    if x <= 0:
        return 0.0
    s = x ** spec.gamma
    return math.pi * s * one_minus_cos_g_integral(spec, 0.0, K / s)


def psi_k(spec: KernelSpec, x: float, K: float) -> float:
    """Tail counterpart ``pi * int_K^inf (1 - cos G(z / x**gamma)) dz``."""
    if x <= 0:
        return 0.0
    s = x ** spec.gamma
    return math.pi * s * one_minus_cos_g_integral(spec, K / s, math.inf)


def squared_angle_gap(spec: KernelSpec, x: float, y: float) -> float:
    """``int_0^inf (G(z/x) - G(z/y))**2 dz`` for ``x, y > 0``."""
    if not (x > 0 and y > 0):
        raise ParameterError("x and y must be positive")
    if x == y:
        return 0.0

    def f(z):
        return (_g_scalar(spec, z / x) - _g_scalar(spec, z / y)) ** 2

    if spec.law is AngularLaw.HARD_SPHERES:
        # integrand vanishes beyond both kinks
        k1, k2 = sorted((HALF_PI * x, HALF_PI * y))
        return _quad(f, 0.0, k1) + _quad(f, k1, k2)
    # power law: finite part up to where both angles are small, then a tail
    # bounded through G(z) <= c3 (1 + z)^(-1/nu); between the two scales the
    # range is cut into decades so each piece stays well resolved
    u0 = _power_tail_start(spec.nu)
    lo, hi = sorted((x, y))
    cuts = [0.0, u0 * lo]
    while cuts[-1] * 10.0 < u0 * hi:
        cuts.append(cuts[-1] * 10.0)
    cuts.append(u0 * hi)
    cuts += [cuts[-1] * 10.0 ** k for k in range(1, 5)]
    total = math.fsum(_quad(f, a, b) for a, b in zip(cuts[:-1], cuts[1:]))
    return total + _quad(f, cuts[-1], math.inf)


def g_envelope_constants(spec: KernelSpec, z_max: float = 1e5, n: int = 4001):
    """Fit ``c2, c3`` with ``c2 (1+z)^(-1/nu) <= G(z) <= c3 (1+z)^(-1/nu)`` on ``[0, z_max]``."""
    if spec.law is not AngularLaw.POWER:
        raise ParameterError("envelope only defined for the power law")
    z = np.concatenate([[0.0], np.geomspace(1e-6, z_max, n)])
    ratio = g_of_z(spec, z) * (1.0 + z) ** (1.0 / spec.nu)
    limit = spec.nu ** (-1.0 / spec.nu)   # value as z -> inf
    return float(min(ratio.min(), limit)), float(max(ratio.max(), limit))


def gap_ratio(spec: KernelSpec, x: float, y: float) -> float:
    """``squared_angle_gap(x, y) * (x + y) / (x - y)**2``; bounded by a constant."""
    return squared_angle_gap(spec, x, y) * (x + y) / (x - y) ** 2


def fit_gap_constant(spec: KernelSpec, r_min: float = 1e-6, r_max: float = 1e6,
                     n: int = 241) -> float:
    """Fit the constant bounding ``gap_ratio``.

    The ratio depends on ``x, y`` only through ``y/x`` (substitute ``z = x w``),
    so a log grid in the ratio covers every pair.
    """
    r = np.geomspace(r_min, r_max, n)
    r = r[np.abs(r - 1.0) > 1e-3]
    # the limit r -> 1 is approached through a dense cluster
    near = 1.0 + np.array([-1e-3, -1e-4, 1e-4, 1e-3])
    vals = [gap_ratio(spec, 1.0, float(ri)) for ri in np.concatenate([r, near])]
    return float(max(vals))


def phi_k_bound_constant(spec: KernelSpec) -> float:
    """``C`` with ``Phi_K(x) <= C x**gamma`` for every ``K``: ``pi * int_0^inf (1 - cos G)``."""
    return math.pi * one_minus_cos_g_integral(spec, 0.0, math.inf)
