"""Experiment drivers: single runs, equilibration, propagation-of-chaos and
cutoff-convergence rates.

Each replica draws from its own streams (see ``streams.py``), so the
replicas can be farmed out to worker processes in any order and still give
identical tables. ``KACSIM_WORKERS`` sets the default worker count.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ..engine import CoupledState, EventSource, ParticleState, coupled_run, run
from ..transport import exp_moment, m4_ratio_stderr, maxwellian_stats, w2_squared
from .config import ExperimentConfig
from .streams import EVENTS, EXPERIMENT_CODES, INIT, REF_EVENTS, REF_INIT, stream

M4_MAXWELL = 5.0 / 3.0
EXP_Q = 1.0


class ExperimentError(RuntimeError):
    pass


@dataclass
class RateFit:
    """Least-squares fit of ``log y = intercept + slope * log x``."""

    slope: float
    intercept: float
    r_squared: float
    slope_se: float
    n_points: int

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r_squared": self.r_squared,
                "slope_se": self.slope_se, "n_points": self.n_points}


def fit_rate(x: Sequence[float], y: Sequence[float], se: Optional[Sequence[float]] = None) -> RateFit:
    """Fit a power law on log-log axes.

    ``se`` are standard errors of ``y``; they are propagated to the slope
    through ``se(log y) = se / y``. Needs at least three positive points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.shape[0] < 3:
        raise ValueError("a rate fit needs at least three grid points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("rate fit needs positive values")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (intercept + slope * lx)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    slope_se = float("nan")
    if se is not None:
        w = (lx - lx.mean()) / np.sum((lx - lx.mean()) ** 2)
        slope_se = float(np.sqrt(np.sum((w * np.asarray(se, dtype=float) / y) ** 2)))
    return RateFit(float(slope), float(intercept), r2, slope_se, int(x.shape[0]))


def mean_se(values) -> tuple:
    v = np.asarray(values, dtype=float)
    m = float(v.mean())
    se = float(v.std(ddof=1) / math.sqrt(v.shape[0])) if v.shape[0] > 1 else float("nan")
    return m, se


def worker_count(workers: Optional[int] = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("KACSIM_WORKERS")
    return max(1, int(env)) if env else 1


def _map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=1))


# ---------------------------------------------------------------------------
# building blocks


def evolve(cfg: ExperimentConfig, N: int, t: float, keys: tuple, roles=(INIT, EVENTS)) -> np.ndarray:
    """Velocities of an ``N``-particle system at time ``t`` from the streams at ``keys``."""
    v0 = cfg.init.sample(stream(cfg.seed, *keys, roles[0]), N)
    state = ParticleState(v0)
    if t > 0:
        src = EventSource(stream(cfg.seed, *keys, roles[1]), N, cfg.K)
        run(state, cfg.spec, cfg.K, t, src)
    return state.velocities


@dataclass
class ExperimentResult:
    kind: str
    columns: List[str]
    rows: List[tuple]
    summary_columns: List[str] = field(default_factory=list)
    summary: List[tuple] = field(default_factory=list)
    fit: Optional[RateFit] = None
    snapshots: List[tuple] = field(default_factory=list)   # (time, replica, points)
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# chaos rate


def _chaos_task(args):
    cfg, a, N, r, t = args
    code = EXPERIMENT_CODES["chaos-rate"]
    keys = (code, a, r)
    vN = evolve(cfg, N, t, keys, (INIT, EVENTS))
    vM = evolve(cfg, cfg.M, t, keys, (REF_INIT, REF_EVENTS))
    return w2_squared(vN, vM)


def chaos_rate_experiment(cfg: ExperimentConfig, workers: Optional[int] = None,
                          t: Optional[float] = None) -> ExperimentResult:
    """``E W2^2(mu_N(t), mu_M(t))`` over the N grid, with a fitted rate.

    Every ``(N, replica)`` pair owns an independent size-``M`` reference
    system, which stands in for the limit law.
    """
    t = cfg.t_end if t is None else t
    tasks = [(cfg, a, N, r, t) for a, N in enumerate(cfg.n_grid) for r in range(cfg.replicas)]
    vals = _map(_chaos_task, tasks, worker_count(workers))
    rows = [(N, r, t, v) for (_, _, N, r, _), v in zip(tasks, vals)]
    return _rate_result("chaos-rate", cfg.n_grid, rows, "N", cfg.replicas)


def iid_baseline(cfg: ExperimentConfig, workers: Optional[int] = None) -> ExperimentResult:
    """The chaos-rate table at ``t = 0``: the i.i.d. empirical-measure rate."""
    return chaos_rate_experiment(cfg, workers, t=0.0)


def _rate_result(kind, grid, rows, name, R, fit_mask=None) -> ExperimentResult:
    summary = []
    for g in grid:
        m, se = mean_se([row[-1] for row in rows if row[0] == g])
        summary.append((g, m, se))
    if R < 2:
        warnings.warn("a single replica gives no standard errors")
    pts = [s for s in summary if (fit_mask is None or fit_mask(s[0])) and s[1] > 0]
    fit = None
    if len(pts) >= 3:
        fit = fit_rate([p[0] for p in pts], [p[1] for p in pts], [p[2] for p in pts])
    return ExperimentResult(kind, [name, "replica", "time", "value"], rows,
                            [name, "mean", "stderr"], summary, fit)


# ---------------------------------------------------------------------------
# cutoff rate


def _cutoff_task(args):
    cfg, K1, r, t = args
    code = EXPERIMENT_CODES["cutoff-rate"]
    # initial data and event stream are shared across the K grid
    v0 = cfg.init.sample(stream(cfg.seed, code, r, INIT), cfg.N)
    coupled = CoupledState.from_state(ParticleState(v0))
    src = EventSource(stream(cfg.seed, code, r, EVENTS), cfg.N, cfg.K_ref)
    out = coupled_run(coupled, cfg.spec, K1, cfg.K_ref, t, src, observe_times=[t])
    return out[-1][1] if out else coupled.msd()


def cutoff_rate_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> ExperimentResult:
    """Coupled mean squared displacement between cutoffs ``K1`` and ``K_ref``."""
    t = cfg.t_end
    tasks = [(cfg, K1, r, t) for K1 in cfg.k_grid for r in range(cfg.replicas)]
    vals = _map(_cutoff_task, tasks, worker_count(workers))
    rows = [(K1, r, t, v) for (_, K1, r, _), v in zip(tasks, vals)]
    return _rate_result("cutoff-rate", cfg.k_grid, rows, "K", cfg.replicas,
                        fit_mask=lambda K: K < cfg.K_ref)


# ---------------------------------------------------------------------------
# single runs and equilibration


def _checkpoints(cfg: ExperimentConfig) -> List[float]:
    times = [t for t in cfg.times if 0 <= t <= cfg.t_end]
    if not times:
        times = [0.0, cfg.t_end] if cfg.t_end > 0 else [0.0]
    return sorted(set(times))


def _observe(state: ParticleState):
    v = state.velocities
    mean, T, ratio = maxwellian_stats(v)
    se = m4_ratio_stderr(v)
    em, sat = exp_moment(v, EXP_Q)
    dp, de = state.drift()
    return (state.events, T, ratio, se, em, int(sat), dp, de)


def _trajectory_task(args):
    cfg, kind, r, times, keep = args
    code = EXPERIMENT_CODES[kind]
    state = ParticleState(cfg.init.sample(stream(cfg.seed, code, r, INIT), cfg.N))
    rows, snaps = [], []
    observers = {"stats": _observe}
    if keep:
        observers["snap"] = lambda s: s.velocities.copy()
    if times[0] == 0.0:
        rows.append((r, 0.0) + _observe(state))
        if keep:
            snaps.append((0.0, r, state.velocities.copy()))
    later = [t for t in times if t > 0]
    if later:
        src = EventSource(stream(cfg.seed, code, r, EVENTS), cfg.N, cfg.K)
        res = run(state, cfg.spec, cfg.K, later[-1], src, observers=observers, observe_times=later)
        rows += [(r, t) + o for t, o in res.observations["stats"]]
        if keep:
            snaps += [(t, r, p) for t, p in res.observations["snap"]]
    return rows, snaps


TRAJ_COLUMNS = ["replica", "time", "events", "temperature", "m4_ratio", "m4_ratio_se",
                "exp_moment", "exp_saturated", "momentum_drift", "energy_drift"]


def simulate(cfg: ExperimentConfig, workers: Optional[int] = None) -> ExperimentResult:
    """Run ``replicas`` independent systems, recording observables and snapshots at the checkpoints."""
    times = _checkpoints(cfg)
    tasks = [(cfg, "simulate", r, times, True) for r in range(cfg.replicas)]
    out = _map(_trajectory_task, tasks, worker_count(workers))
    rows = [row for rr, _ in out for row in rr]
    snaps = [s for _, ss in out for s in ss]
    return ExperimentResult("simulate", TRAJ_COLUMNS, rows, snapshots=snaps)


def equilibration_experiment(cfg: ExperimentConfig, workers: Optional[int] = None,
                             n_sigma: float = 3.0) -> ExperimentResult:
    """Track relaxation towards a Maxwellian.

    The run is flagged converged when, at the final checkpoint, every
    replica's ``m4/m2^2`` lies within ``n_sigma`` standard errors of 5/3.
    """
    times = _checkpoints(cfg)
    tasks = [(cfg, "equilibrate", r, times, False) for r in range(cfg.replicas)]
    out = _map(_trajectory_task, tasks, worker_count(workers))
    rows = [row for rr, _ in out for row in rr]
    final = [row for row in rows if row[1] == times[-1]]
    zs = [abs(row[4] - M4_MAXWELL) / row[5] for row in final]
    converged = all(z <= n_sigma for z in zs)
    summary = []
    for t in times:
        sel = [row for row in rows if row[1] == t]
        m, se = mean_se([row[4] for row in sel])
        summary.append((t, m, se, max(row[8] for row in sel), max(row[9] for row in sel)))
    res = ExperimentResult("equilibrate", TRAJ_COLUMNS, rows,
                           ["time", "m4_ratio_mean", "m4_ratio_stderr", "max_momentum_drift",
                            "max_energy_drift"], summary)
    res.extra = {"converged": converged, "final_z_scores": zs, "n_sigma": n_sigma}
    return res


RUNNERS = {
    "simulate": simulate,
    "equilibrate": equilibration_experiment,
    "chaos-rate": chaos_rate_experiment,
    "cutoff-rate": cutoff_rate_experiment,
}


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> ExperimentResult:
    try:
        fn = RUNNERS[cfg.kind]
    except KeyError:
        raise ExperimentError(f"no runner for {cfg.kind!r}") from None
    return fn(cfg, workers)
