"""Exact quadratic Wasserstein distance between uniform point clouds.

Equal sizes are solved as an assignment problem; unequal sizes as a
transportation problem with integer supplies ``m`` (per source) and demands
``n`` (per target), so every optimal vertex has integer flows and the plan
masses are exact multiples of ``1/(n m)``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

for _k in ("PYTORCH", "JAX", "CUPY", "TENSORFLOW"):
    os.environ.setdefault(f"POT_BACKEND_DISABLE_{_k}", "1")


class TransportError(RuntimeError):
    pass


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Uniform probability measure on ``points`` (shape ``(n, 3)``); repeats allowed."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1 and pts.shape[0] == 3:
            pts = pts[None, :]
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must have shape (n, 3)")
        if pts.shape[0] < 1:
            raise ValueError("empirical measure needs at least one point")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]


def _measure(x) -> EmpiricalMeasure:
    return x if isinstance(x, EmpiricalMeasure) else EmpiricalMeasure(np.asarray(x, dtype=float))


def sq_dist_matrix(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # coordinate-wise differences; the |x|^2 + |y|^2 - 2 x.y expansion loses digits
    C = (x[:, None, 0] - y[None, :, 0]) ** 2
    C += (x[:, None, 1] - y[None, :, 1]) ** 2
    C += (x[:, None, 2] - y[None, :, 2]) ** 2
    return C


@dataclass(frozen=True)
class TransportPlan:
    """Sparse optimal coupling.

    ``src[k] -> tgt[k]`` carries ``units[k] / (n m)`` of mass; ``cost`` is the
    squared-distance objective, i.e. the squared W2 distance.
    """

    source: EmpiricalMeasure
    target: EmpiricalMeasure
    src: np.ndarray
    tgt: np.ndarray
    units: np.ndarray
    cost: float

    @property
    def n(self) -> int:
        return self.source.n

    @property
    def m(self) -> int:
        return self.target.n

    @property
    def mass(self) -> np.ndarray:
        return self.units / float(self.n * self.m)

    @property
    def flows(self):
        return list(zip(self.src.tolist(), self.tgt.tolist(), self.mass.tolist()))

    def rational_masses(self):
        d = self.n * self.m
        return [Fraction(int(u), d) for u in self.units]

    def dense(self) -> np.ndarray:
        P = np.zeros((self.n, self.m))
        np.add.at(P, (self.src, self.tgt), self.mass)
        return P

    def check_feasible(self, tol: float = 0.0) -> None:
        """Raise if marginals or cost disagree with the plan (integer check when ``tol == 0``)."""
        rows = np.bincount(self.src, weights=self.units, minlength=self.n)
        cols = np.bincount(self.tgt, weights=self.units, minlength=self.m)
        if np.any(self.units < 0):
            raise TransportError("negative mass in plan")
        if np.any(np.abs(rows - self.m) > tol) or np.any(np.abs(cols - self.n) > tol):
            raise TransportError("plan marginals do not match the measures")
        c = plan_cost(self.source.points, self.target.points, self.src, self.tgt, self.units)
        if abs(c - self.cost) > 1e-12 * max(1.0, abs(c)):
            raise TransportError("stored cost disagrees with the plan")


def plan_cost(x, y, src, tgt, units) -> float:
    d = x[src] - y[tgt]
    terms = np.asarray(units, dtype=np.longdouble) * np.einsum("ij,ij->i", d, d).astype(np.longdouble)
    return float(np.sum(terms) / np.longdouble(x.shape[0] * y.shape[0]))


def _solve_rectangular(C: np.ndarray, n: int, m: int):
    import ot  # deferred: only needed for unequal sizes

    a = np.full(n, float(m))
    b = np.full(m, float(n))
    F, log = ot.emd(a, b, C, numItermax=max(10_000_000, 50 * n * m), log=True)
    if log.get("warning"):
        raise TransportError(f"network simplex failed: {log['warning']}")
    units = np.rint(F)
    if np.any(np.abs(F - units) > 1e-6):
        raise TransportError("non-integral flow returned for integer supplies")
    src, tgt = np.nonzero(units)
    return src, tgt, units[src, tgt].astype(np.int64)


def w2_exact(mu, nu) -> TransportPlan:
    """Optimal coupling between two uniform empirical measures; ``plan.cost`` is W2^2."""
    mu, nu = _measure(mu), _measure(nu)
    x, y = mu.points, nu.points
    n, m = x.shape[0], y.shape[0]
    C = sq_dist_matrix(x, y)
    if n == m:
        rows, cols = linear_sum_assignment(C)
        src, tgt = rows.astype(np.int64), cols.astype(np.int64)
        units = np.full(n, n, dtype=np.int64)
    else:
        src, tgt, units = _solve_rectangular(C, n, m)
    cost = plan_cost(x, y, src, tgt, units)
    return TransportPlan(mu, nu, src, tgt, units, cost)


def w2_squared(mu, nu) -> float:
    return w2_exact(mu, nu).cost


# ---------------------------------------------------------------------------


def replicate_mixture(f, g, lam: Fraction) -> EmpiricalMeasure:
    """Uniform point cloud representing ``lam * f + (1 - lam) * g`` exactly."""
    f, g = _measure(f), _measure(g)
    lam = Fraction(lam)
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    # weight per point: lam/n for f, (1-lam)/m for g -> integer replication counts
    wf, wg = lam / f.n, (1 - lam) / g.n
    den = math.lcm(wf.denominator, wg.denominator)
    cf, cg = int(wf * den), int(wg * den)
    k = math.gcd(cf, cg)
    cf, cg = cf // k, cg // k
    return EmpiricalMeasure(np.concatenate([np.repeat(f.points, cf, axis=0), np.repeat(g.points, cg, axis=0)]))


def w2_mixture_bound_check(f, f2, g, g2, lam, tol: float = 1e-10) -> bool:
    """Joint convexity of W2^2 under mixing: ``W2^2(mix, mix') <= lam W2^2(f,f') + (1-lam) W2^2(g,g')``."""
    lam = Fraction(lam).limit_denominator(10**6)
    lhs = w2_squared(replicate_mixture(f, g, lam), replicate_mixture(f2, g2, lam))
    rhs = float(lam) * w2_squared(f, f2) + float(1 - lam) * w2_squared(g, g2)
    return lhs <= rhs + tol


class ConditionalSampler:
    """Column-conditional laws of a plan: for target ``j``, the law of the source
    given that the coupled target is ``w_j``."""

    def __init__(self, plan: TransportPlan):
        self.plan = plan
        col_units = np.bincount(plan.tgt, weights=plan.units, minlength=plan.m)
        if np.any(col_units == 0):
            raise TransportError("zero-mass column in plan")
        order = np.lexsort((plan.src, plan.tgt))
        self._src = plan.src[order]
        self._tgt = plan.tgt[order]
        self._units = plan.units[order]
        self._starts = np.searchsorted(self._tgt, np.arange(plan.m + 1))
        self._col_units = col_units.astype(np.int64)

    def column(self, j: int):
        """``(source indices, probabilities)`` for target ``j``."""
        sl = slice(self._starts[j], self._starts[j + 1])
        return self._src[sl], self._units[sl] / float(self._col_units[j])

    def column_exact(self, j: int):
        sl = slice(self._starts[j], self._starts[j + 1])
        return self._src[sl], [Fraction(int(u), int(self._col_units[j])) for u in self._units[sl]]

    def sample(self, j: int, rng: np.random.Generator, size: Optional[int] = None):
        idx, p = self.column(j)
        pick = rng.choice(idx, size=size, p=p)
        return self.plan.source.points[pick]

    def source_marginal(self) -> np.ndarray:
        """Mixture of the columns under the target weights."""
        out = np.zeros(self.plan.n)
        m = self.plan.m
        for j in range(m):
            idx, p = self.column(j)
            np.add.at(out, idx, p / m)
        return out

    def source_marginal_exact(self):
        out = [Fraction(0)] * self.plan.n
        m = self.plan.m
        for j in range(m):
            idx, p = self.column_exact(j)
            for i, pi in zip(idx.tolist(), p):
                out[i] += pi / m
        return out

    def displacement(self) -> float:
        """``sum_j (1/m) E_col_j |X - w_j|^2``; equals the plan cost."""
        x, w = self.plan.source.points, self.plan.target.points
        acc = []
        m = self.plan.m
        for j in range(m):
            idx, p = self.column(j)
            d = x[idx] - w[j]
            acc.extend((p * np.einsum("ij,ij->i", d, d) / m).tolist())
        return math.fsum(acc)


def pi_sampler(plan: TransportPlan) -> ConditionalSampler:
    return ConditionalSampler(plan)


# ---------------------------------------------------------------------------
# observables


def moments(mu, q: float) -> float:
    """``n^-1 sum |x_i|^q``."""
    if not q > 0:
        raise ValueError("q must be positive")
    r = np.linalg.norm(_measure(mu).points, axis=1)
    return float(np.mean(r ** q))


def exp_moment(mu, q: float):
    """``(n^-1 sum exp(|x_i|^q), saturated)``; saturates at the largest float on overflow."""
    if not 0 < q < 2:
        raise ValueError("q must lie in (0, 2)")
    r = np.linalg.norm(_measure(mu).points, axis=1)
    e = r ** q
    n = e.shape[0]
    log_mean = float(np.logaddexp.reduce(e) - math.log(n))
    if log_mean >= math.log(np.finfo(float).max):
        return float(np.finfo(float).max), True
    return math.exp(log_mean), False


def maxwellian_stats(mu):
    """``(mean, temperature, m4/m2^2)`` of the centred cloud; the ratio is 5/3 for a Maxwellian."""
    x = _measure(mu).points
    if x.shape[0] < 2:
        raise ValueError("need at least two points")
    mean = x.mean(axis=0)
    r2 = np.einsum("ij,ij->i", x - mean, x - mean)
    m2 = float(r2.mean())
    m4 = float((r2 * r2).mean())
    return mean, m2 / 3.0, m4 / (m2 * m2)


def m4_ratio_stderr(mu) -> float:
    """Delta-method standard error of the centred ``m4/m2^2`` treating points as i.i.d."""
    x = _measure(mu).points
    c = x - x.mean(axis=0)
    r2 = np.einsum("ij,ij->i", c, c)
    m2, m4 = r2.mean(), (r2 * r2).mean()
    infl = (r2 * r2 - m4) / m2 ** 2 - 2.0 * m4 * (r2 - m2) / m2 ** 3
    return float(infl.std(ddof=1) / math.sqrt(x.shape[0]))


# ---------------------------------------------------------------------------
# I/O


def save_points(path, points) -> None:
    """One point per line, three whitespace-separated fields, 17 significant digits."""
    np.savetxt(path, np.asarray(points, dtype=float).reshape(-1, 3), fmt="%.17g")


def load_points(path) -> EmpiricalMeasure:
    pts = np.loadtxt(path, dtype=float, ndmin=2)
    if pts.shape[1] != 3:
        raise ValueError(f"{path}: expected three fields per line")
    return EmpiricalMeasure(pts)


def snapshot_json(points, time: float, **extra) -> str:
    d = {"time": time, "points": np.asarray(points, dtype=float).tolist()}
    d.update(extra)
    return json.dumps(d)


def load_snapshot(path) -> EmpiricalMeasure:
    with open(path) as fh:
        d = json.load(fh)
    return EmpiricalMeasure(np.asarray(d["points"], dtype=float))


def read_cloud(path) -> EmpiricalMeasure:
    """Text or JSON-snapshot point cloud, chosen by extension."""
    return load_snapshot(path) if str(path).endswith(".json") else load_points(path)
