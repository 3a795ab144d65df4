"""Property sweeps over the kernel and collision geometry.

Each check returns its worst residual; a report passes only if every check
does. ``gamma_fn`` replaces ``Gamma`` in the contraction sweep so that a
deliberately broken implementation can be shown to fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .. import geometry as geo
from ..kernel import AngularLaw, KernelSpec, fit_gap_constant, g_envelope_constants, g_of_z, h_of_theta, squared_angle_gap
from .config import ExperimentConfig
from .streams import EXPERIMENT_CODES, stream

GEOM_TOL = 1e-12
LEMMA_TOL = 1e-6
ANTISYM_TOL = 1e-10


@dataclass
class Check:
    name: str
    passed: bool
    worst: float
    samples: int
    note: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: worst residual {self.worst:.3e} over {self.samples} samples {self.note}".rstrip()


@dataclass
class Report:
    checks: List[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> List[str]:
        return [c.line() for c in self.checks]


def random_vectors(rng: np.random.Generator, n: int) -> np.ndarray:
    """Gaussian directions with log-uniform magnitudes over four decades."""
    v = rng.standard_normal((n, 3))
    return v * np.exp(rng.uniform(-2.0, 2.0, (n, 1)) * math.log(10.0) / 2.0)


# ---------------------------------------------------------------------------
# geometry


def check_a_identity(rng, n: int) -> Check:
    v, vs = random_vectors(rng, n), random_vectors(rng, n)
    th = rng.uniform(0, math.pi, n)
    ph = rng.uniform(0, 2 * math.pi, n)
    a = geo.deviation_a(v, vs, th, ph)
    x2 = np.einsum("ij,ij->i", v - vs, v - vs)
    lhs = np.einsum("ij,ij->i", a, a)
    rhs = 0.5 * (1.0 - np.cos(th)) * x2
    worst = float(np.max(np.abs(lhs - rhs) / np.maximum(x2, 1.0)))
    return Check("|a|^2 = (1-cos theta)/2 |v-v*|^2", worst <= GEOM_TOL, worst, n)


def check_sigma_form(rng, n: int) -> Check:
    v, vs = random_vectors(rng, n), random_vectors(rng, n)
    th = rng.uniform(0, math.pi, n)
    ph = rng.uniform(0, 2 * math.pi, n)
    p1, q1 = geo.post_collision(v, vs, th, ph)
    p2, q2 = geo.post_collision_sigma(v, vs, th, ph)
    scale = np.maximum(np.linalg.norm(v, axis=1) + np.linalg.norm(vs, axis=1), 1.0)
    worst = float(max(np.max(np.linalg.norm(p1 - p2, axis=1) / scale),
                      np.max(np.linalg.norm(q1 - q2, axis=1) / scale)))
    return Check("sigma-form agrees with a-form", worst <= GEOM_TOL, worst, n)


def check_frame(rng, n: int) -> Check:
    X = random_vectors(rng, n)
    f = geo.frame_of(X)
    nx = np.linalg.norm(X, axis=1)
    res = [np.abs(np.linalg.norm(f.i_vec, axis=1) - nx) / nx,
           np.abs(np.linalg.norm(f.j_vec, axis=1) - nx) / nx,
           np.abs(np.einsum("ij,ij->i", f.i_vec, X)) / nx ** 2,
           np.abs(np.einsum("ij,ij->i", f.j_vec, X)) / nx ** 2,
           np.abs(np.einsum("ij,ij->i", f.i_vec, f.j_vec)) / nx ** 2]
    g = geo.frame_of(-X)
    res.append(np.linalg.norm(g.i_vec + f.i_vec, axis=1) / nx)
    res.append(np.linalg.norm(g.j_vec + f.j_vec, axis=1) / nx)
    worst = float(max(np.max(r) for r in res))
    return Check("frame orthogonality, norms and oddness", worst <= GEOM_TOL, worst, n)


def check_tanaka(rng, n: int, gamma_fn: Optional[Callable] = None) -> Check:
    gamma_fn = gamma_fn or geo.gamma_vec
    X, Y = random_vectors(rng, n), random_vectors(rng, n)
    # include anti-parallel-ish and mirrored pairs, where orientation differs
    Y[: n // 10] = -X[: n // 10] * rng.uniform(0.5, 2.0, (n // 10, 1)) + 1e-3 * rng.standard_normal((n // 10, 3))
    phi = rng.uniform(0, 2 * math.pi, n)
    phi0, sgn = geo.tanaka_align(X, Y)
    psi = geo.aligned_phi(phi, phi0, sgn)
    lhs = np.linalg.norm(gamma_fn(X, phi) - gamma_fn(Y, psi), axis=1)
    rhs = np.linalg.norm(X - Y, axis=1)
    excess = (lhs - rhs) / np.maximum(rhs, 1e-300)
    # rounding allowance relative to the vector sizes
    allow = 1e-12 * (np.linalg.norm(X, axis=1) + np.linalg.norm(Y, axis=1)) / np.maximum(rhs, 1e-300)
    violations = int(np.sum(excess > allow))
    worst = float(np.max(lhs - rhs))
    return Check("Tanaka contraction |Gamma(X,phi)-Gamma(Y,psi)| <= |X-Y|", violations == 0, worst, n,
                 f"({violations} violations)")


# ---------------------------------------------------------------------------
# kernel


def check_inverse(spec: KernelSpec) -> Check:
    z = np.concatenate([[0.0], np.geomspace(1e-8, 1e6, 2000)])
    if spec.law is AngularLaw.HARD_SPHERES:
        g = g_of_z(spec, z)
        exact = np.maximum(math.pi / 2 - z, 0.0)
        worst = float(np.max(np.abs(g - exact)))
        return Check("hard-sphere G = (pi/2 - z)_+", worst == 0.0, worst, z.shape[0])
    back = h_of_theta(spec, g_of_z(spec, z))
    worst = float(np.max(np.abs(back - z) / np.maximum(1.0, z)))
    return Check("H(G(z)) = z", worst <= 1e-10, worst, z.shape[0], "(relative above z = 1)")


def check_envelope(spec: KernelSpec) -> Check:
    if spec.law is not AngularLaw.POWER:
        return Check("G envelope c2 (1+z)^(-1/nu) <= G <= c3 (1+z)^(-1/nu)", True, 0.0, 0, "(power law only)")
    c2, c3 = g_envelope_constants(spec)
    z = np.geomspace(1e-6, 1e8, 3000)
    r = g_of_z(spec, z) * (1 + z) ** (1 / spec.nu)
    ok = c2 > 0 and math.isfinite(c3) and r.min() >= c2 * (1 - 1e-9) and r.max() <= c3 * (1 + 1e-9)
    worst = float(max(c2 - r.min(), r.max() - c3, 0.0))
    return Check("G envelope c2 (1+z)^(-1/nu) <= G <= c3 (1+z)^(-1/nu)", bool(ok), worst, z.shape[0],
                 f"(c2={c2:.4g}, c3={c3:.4g})")


def check_gap(spec: KernelSpec, rng, n: int) -> Check:
    C = fit_gap_constant(spec)
    x = np.exp(rng.uniform(-5, 5, n))
    y = np.exp(rng.uniform(-5, 5, n))
    worst = -math.inf
    bad = 0
    for xi, yi in zip(x, y):
        if xi == yi:
            continue
        lhs = squared_angle_gap(spec, xi, yi)
        rhs = C * (xi - yi) ** 2 / (xi + yi)
        worst = max(worst, (lhs - rhs) / rhs)
        bad += lhs > rhs * (1 + 1e-8)
    return Check("angle gap <= C |x-y|^2/(x+y)", bad == 0, worst, n, f"(C={C:.4g}, {bad} violations)")


# ---------------------------------------------------------------------------
# coupled one-collision bound


def check_lemma(spec: KernelSpec, K: float, rng, n: int) -> List[Check]:
    worst = -math.inf
    worst_anti = 0.0
    bad = 0
    for _ in range(n):
        v, vs, vt, vts = random_vectors(rng, 4)
        A1, A2, A3 = geo.fundest_terms(spec, K, v, vs, vt, vts)
        lhs = geo.fundest_lhs(spec, K, v, vs, vt, vts)
        gap = lhs - (A1 + A2 + A3)
        worst = max(worst, gap)
        bad += gap > LEMMA_TOL
        _, A2s, _ = geo.fundest_terms(spec, K, vs, v, vts, vt)
        worst_anti = max(worst_anti, abs(A2 + A2s))
    return [Check(f"one-collision bound LHS <= A1+A2+A3 (K={K:g})", bad == 0, worst, n,
                  f"({bad} violations)"),
            Check("A2 antisymmetric under v <-> v*", worst_anti <= ANTISYM_TOL, worst_anti, n)]


def diagnostics(cfg: ExperimentConfig, gamma_fn: Optional[Callable] = None) -> Report:
    """Run every property sweep with sizes from ``cfg``."""
    code = EXPERIMENT_CODES["diagnostics"]
    n = cfg.diag_samples
    rng = lambda k: stream(cfg.seed, code, k)
    checks = [
        check_a_identity(rng(0), n),
        check_sigma_form(rng(1), n),
        check_frame(rng(2), n),
        check_tanaka(rng(3), n, gamma_fn),
        check_inverse(cfg.spec),
        check_envelope(cfg.spec),
        check_gap(cfg.spec, rng(4), min(n, 1000)),
    ]
    checks += check_lemma(cfg.spec, cfg.diag_K, rng(5), cfg.diag_quadruples)
    return Report(checks)
