"""Event-driven simulation of the cutoff Kac particle system.

The total jump rate of the N-particle system with cutoff ``K`` does not depend
on the configuration (it is ``N * pi * K``), so waiting times are exact
exponential draws and there is no time-step error. Each event picks a pair
uniformly, ``z ~ Uniform(0, K]`` and ``phi ~ Uniform[0, 2 pi)``, and moves
``v_i += c``, ``v_j -= c``.

Randomness for a system (or a coupled pair of systems) comes from an
``EventSource`` which pre-draws events in fixed-size chunks. Chunking never
depends on observation times, so a run is reproducible however it is split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence, Union

import numpy as np

from . import _events
from .kernel import KernelSpec, ParameterError

CHUNK = 8192


# ---------------------------------------------------------------------------
# initial laws


@dataclass(frozen=True)
class Maxwellian:
    """Gaussian with given mean and per-coordinate variance ``temperature``."""

    mean: tuple = (0.0, 0.0, 0.0)
    temperature: float = 1.0

    def __post_init__(self):
        if not self.temperature > 0:
            raise ParameterError("temperature must be positive")
        if len(self.mean) != 3:
            raise ParameterError("mean must have three components")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.asarray(self.mean, dtype=float) + math.sqrt(self.temperature) * rng.standard_normal((n, 3))


@dataclass(frozen=True)
class UniformBall:
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ParameterError("radius must be positive")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        d = rng.standard_normal((n, 3))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = self.radius * rng.random(n) ** (1.0 / 3.0)
        return d * r[:, None]


@dataclass(frozen=True)
class GaussianMixture:
    """Two isotropic Gaussian components."""

    means: tuple = ((-1.0, 0.0, 0.0), (1.0, 0.0, 0.0))
    temperatures: tuple = (0.5, 0.5)
    weight: float = 0.5          # probability of the first component

    def __post_init__(self):
        if len(self.means) != 2 or any(len(m) != 3 for m in self.means):
            raise ParameterError("mixture needs two 3-vectors as means")
        if len(self.temperatures) != 2 or min(self.temperatures) <= 0:
            raise ParameterError("mixture temperatures must be two positive numbers")
        if not 0 < self.weight < 1:
            raise ParameterError("mixture weight must lie in (0, 1)")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        first = rng.random(n) < self.weight
        means = np.asarray(self.means, dtype=float)
        sd = np.sqrt(np.asarray(self.temperatures, dtype=float))
        comp = np.where(first, 0, 1)
        return means[comp] + sd[comp][:, None] * rng.standard_normal((n, 3))


InitialLaw = Union[Maxwellian, UniformBall, GaussianMixture]


@dataclass(frozen=True)
class SimConfig:
    N: int
    K: float
    spec: KernelSpec
    t_end: float
    init: InitialLaw = Maxwellian()
    seed: int = 0
    replicas: int = 1

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ParameterError("N must be an integer >= 2")
        if not (1 <= self.K < math.inf):
            raise ParameterError("cutoff K must lie in [1, inf)")
        if not self.t_end >= 0:
            raise ParameterError("t_end must be nonnegative")
        if self.replicas < 1:
            raise ParameterError("replicas must be >= 1")
        if not isinstance(self.init, (Maxwellian, UniformBall, GaussianMixture)):
            raise ParameterError(f"unsupported initial law {self.init!r}")


# ---------------------------------------------------------------------------
# state


@dataclass
class ParticleState:
    velocities: np.ndarray
    time: float = 0.0
    events: int = 0
    momentum0: np.ndarray = field(default=None, repr=False)
    energy0: float = field(default=None, repr=False)

    def __post_init__(self):
        self.velocities = np.ascontiguousarray(self.velocities, dtype=float)
        if self.velocities.ndim != 2 or self.velocities.shape[1] != 3:
            raise ValueError("velocities must have shape (N, 3)")
        if self.N < 2:
            raise ParameterError("a particle system needs N >= 2")
        if self.momentum0 is None or self.energy0 is None:
            self.momentum0, self.energy0 = conserved(self)

    @property
    def N(self) -> int:
        return self.velocities.shape[0]

    def copy(self) -> "ParticleState":
        return ParticleState(self.velocities.copy(), self.time, self.events,
                             self.momentum0.copy(), self.energy0)

    def drift(self):
        """Relative drift ``(momentum, energy)`` since the state was created."""
        p, e = conserved(self)
        scale = float(np.sum(np.linalg.norm(self.velocities, axis=1)))
        dp = float(np.linalg.norm(p - self.momentum0)) / scale if scale > 0 else 0.0
        de = abs(e - self.energy0) / self.energy0 if self.energy0 > 0 else 0.0
        return dp, de


class CollisionEvent(NamedTuple):
    i: int
    j: int
    z: float
    phi: float
    theta: float
    dt: float


def conserved(state: ParticleState):
    """Total momentum and total energy ``sum |v_i|^2``."""
    v = state.velocities
    p = np.array([math.fsum(v[:, k]) for k in range(3)])
    e = math.fsum((v * v).ravel())
    return p, e


def jump_rate(N: int, K: float) -> float:
    return N * math.pi * K


def total_rate(config: SimConfig) -> float:
    """Total jump rate ``N pi K`` of the cutoff system."""
    return jump_rate(config.N, config.K)


def init_system(config: SimConfig, stream: np.random.Generator) -> ParticleState:
    """``N`` i.i.d. velocities from the configured initial law."""
    return ParticleState(config.init.sample(stream, config.N))


# ---------------------------------------------------------------------------
# randomness


class EventSource:
    """Chunked supply of ``(time, i, j, z, phi)`` for one event stream.

    Event times are absolute: the source keeps its own clock, starting at
    ``t0``. Pairs are uniform over unordered pairs (an ordered pair drawn
    uniformly; the update is antisymmetric so order is immaterial).
    """

    def __init__(self, rng: np.random.Generator, N: int, K: float, t0: float = 0.0, chunk: int = CHUNK):
        if N < 2:
            raise ParameterError("N must be >= 2")
        if not K >= 1:
            raise ParameterError("K must be >= 1")
        self.rng = rng
        self.N = int(N)
        self.K = float(K)
        self.rate = jump_rate(N, K)
        self.chunk = int(chunk)
        self._clock = float(t0)
        self._pos = 0
        self._len = 0
        self._t = self._i = self._j = self._z = self._phi = self._dt = None

    def _refill(self):
        rng, B = self.rng, self.chunk
        dt = rng.exponential(1.0 / self.rate, B)
        i = rng.integers(0, self.N, B)
        j = rng.integers(0, self.N - 1, B)
        j += j >= i
        z = self.K * (1.0 - rng.random(B))     # (0, K]
        phi = (2.0 * math.pi) * rng.random(B)
        t = np.cumsum(np.concatenate(([self._clock], dt)))[1:]
        # keep the unconsumed tail of the previous chunk in front
        if self._pos < self._len:
            sl = slice(self._pos, self._len)
            self._t = np.concatenate((self._t[sl], t))
            self._dt = np.concatenate((self._dt[sl], dt))
            self._i = np.concatenate((self._i[sl], i))
            self._j = np.concatenate((self._j[sl], j))
            self._z = np.concatenate((self._z[sl], z))
            self._phi = np.concatenate((self._phi[sl], phi))
        else:
            self._t, self._dt, self._i, self._j, self._z, self._phi = t, dt, i, j, z, phi
        self._clock = float(t[-1])
        self._pos, self._len = 0, self._t.shape[0]

    def peek_time(self) -> float:
        if self._pos >= self._len:
            self._refill()
        return float(self._t[self._pos])

    def take_until(self, t_end: float):
        """All pending events with time ``<= t_end``, as arrays ``(t, dt, i, j, z, phi)``."""
        parts = []
        while True:
            if self._pos >= self._len:
                self._refill()
            stop = int(np.searchsorted(self._t, t_end, side="right"))
            if stop > self._pos:
                sl = slice(self._pos, stop)
                parts.append((self._t[sl], self._dt[sl], self._i[sl], self._j[sl], self._z[sl], self._phi[sl]))
                self._pos = stop
            if self._pos < self._len:
                break
        if not parts:
            e = np.empty(0)
            ei = np.empty(0, dtype=np.int64)
            return e, e, ei, ei, e, e
        return tuple(np.concatenate(col) for col in zip(*parts))

    def next_event(self):
        if self._pos >= self._len:
            self._refill()
        k = self._pos
        self._pos += 1
        return (float(self._t[k]), float(self._dt[k]), int(self._i[k]), int(self._j[k]),
                float(self._z[k]), float(self._phi[k]))


def make_source(stream: np.random.Generator, state: ParticleState, K: float) -> EventSource:
    return EventSource(stream, state.N, K, t0=state.time)


# ---------------------------------------------------------------------------
# single system


def apply_event(state: ParticleState, spec: KernelSpec, K: float, i: int, j: int,
                z: float, phi: float, dt: float = 0.0) -> CollisionEvent:
    """Apply one collision with the given randomness and advance the clock by ``dt``."""
    if i == j:
        raise ValueError("collision needs two distinct particles")
    th = np.zeros(1)
    _events.apply_events(state.velocities, np.array([i], dtype=np.int64), np.array([j], dtype=np.int64),
                         np.array([z], dtype=float), np.array([phi], dtype=float),
                         spec.law_code, spec.gamma, spec.nu or 0.0, float(K), th)
    state.time += dt
    state.events += 1
    return CollisionEvent(i, j, z, phi, float(th[0]), dt)


def step(state: ParticleState, spec: KernelSpec, K: float, stream: EventSource) -> CollisionEvent:
    """Draw and apply the next event of ``stream``."""
    t, dt, i, j, z, phi = stream.next_event()
    ev = apply_event(state, spec, K, i, j, z, phi, dt)
    state.time = t
    return ev


@dataclass
class EventLog:
    time: np.ndarray
    i: np.ndarray
    j: np.ndarray
    z: np.ndarray
    phi: np.ndarray
    theta: np.ndarray

    def __len__(self):
        return self.time.shape[0]


@dataclass
class RunResult:
    state: ParticleState
    observations: Dict[str, List[tuple]]
    log: Optional[EventLog] = None


Observer = Callable[[ParticleState], object]


def _segments(t0: float, t_end: float, observe_times: Optional[Sequence[float]]):
    times = sorted({float(t) for t in (observe_times or ()) if t0 <= t <= t_end})
    return times


def run(state: ParticleState, spec: KernelSpec, K: float, t_end: float, stream: EventSource,
        observers: Optional[Mapping[str, Observer]] = None,
        observe_times: Optional[Sequence[float]] = None,
        record_events: bool = False) -> RunResult:
    """Advance ``state`` in place to time ``t_end``.

    Each observer is called at every time in ``observe_times`` (those within
    ``[state.time, t_end]``) on the state holding all events up to that time.
    """
    if t_end < state.time:
        raise ValueError("t_end precedes the current time")
    observers = dict(observers or {})
    obs: Dict[str, List[tuple]] = {name: [] for name in observers}
    logs = []
    nu = spec.nu or 0.0
    stops = _segments(state.time, t_end, observe_times)
    if not stops or stops[-1] < t_end:
        stops.append(t_end)
    want = set(float(t) for t in (observe_times or ()))
    for stop in stops:
        t, dt, i, j, z, phi = stream.take_until(stop)
        th = np.zeros(t.shape[0])
        if t.shape[0]:
            _events.apply_events(state.velocities, i, j, z, phi, spec.law_code, spec.gamma, nu, float(K), th)
            state.events += t.shape[0]
        if record_events:
            logs.append((t, i, j, z, phi, th))
        state.time = stop
        if stop in want:
            for name, fn in observers.items():
                obs[name].append((stop, fn(state)))
    log = None
    if record_events:
        cols = [np.concatenate(c) for c in zip(*logs)] if logs else [np.empty(0)] * 6
        log = EventLog(*cols)
    return RunResult(state, obs, log)


# ---------------------------------------------------------------------------
# coupled systems


@dataclass
class CoupledState:
    """Two systems with cutoffs ``K1 <= K2`` driven by one event stream."""

    sys_a: ParticleState
    sys_b: ParticleState

    def __post_init__(self):
        if self.sys_a.N != self.sys_b.N:
            raise ValueError("coupled systems must have the same N")

    @classmethod
    def from_state(cls, state: ParticleState) -> "CoupledState":
        return cls(state.copy(), state.copy())

    @property
    def time(self) -> float:
        return self.sys_b.time

    def msd(self) -> float:
        """Mean squared displacement ``N^-1 sum |v_i^A - v_i^B|^2``."""
        d = self.sys_a.velocities - self.sys_b.velocities
        return float(np.einsum("ij,ij->", d, d)) / self.sys_a.N


def _check_cutoffs(K1, K2):
    if not (1 <= K1 <= K2):
        raise ParameterError("coupled cutoffs need 1 <= K1 <= K2")


def coupled_step(coupled: CoupledState, spec: KernelSpec, K1: float, K2: float, stream: EventSource):
    """One shared event; returns the events seen by ``(sys_a, sys_b)``."""
    _check_cutoffs(K1, K2)
    t, dt, i, j, z, phi = stream.next_event()
    tha, thb = np.zeros(1), np.zeros(1)
    _events.apply_coupled_events(coupled.sys_a.velocities, coupled.sys_b.velocities,
                                 np.array([i], dtype=np.int64), np.array([j], dtype=np.int64),
                                 np.array([z]), np.array([phi]), spec.law_code, spec.gamma,
                                 spec.nu or 0.0, float(K1), float(K2), tha, thb)
    for s in (coupled.sys_a, coupled.sys_b):
        s.time = t
        s.events += 1
    return (CollisionEvent(i, j, z, float("nan"), float(tha[0]), dt),
            CollisionEvent(i, j, z, phi, float(thb[0]), dt))


def coupled_run(coupled: CoupledState, spec: KernelSpec, K1: float, K2: float, t_end: float,
                stream: EventSource, observe_times: Optional[Sequence[float]] = None) -> List[tuple]:
    """Advance both systems to ``t_end``; returns ``[(t, msd), ...]`` at ``observe_times``."""
    _check_cutoffs(K1, K2)
    nu = spec.nu or 0.0
    stops = _segments(coupled.time, t_end, observe_times)
    if not stops or stops[-1] < t_end:
        stops.append(t_end)
    want = set(float(t) for t in (observe_times or ()))
    out = []
    for stop in stops:
        t, dt, i, j, z, phi = stream.take_until(stop)
        if t.shape[0]:
            tha, thb = np.zeros(t.shape[0]), np.zeros(t.shape[0])
            _events.apply_coupled_events(coupled.sys_a.velocities, coupled.sys_b.velocities, i, j, z, phi,
                                         spec.law_code, spec.gamma, nu, float(K1), float(K2), tha, thb)
            for s in (coupled.sys_a, coupled.sys_b):
                s.events += t.shape[0]
        for s in (coupled.sys_a, coupled.sys_b):
            s.time = stop
        if stop in want:
            out.append((stop, coupled.msd()))
    return out
