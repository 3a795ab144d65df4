import itertools
import math

import numpy as np
import pytest

from kacsim import _events
from kacsim.engine import (CoupledState, EventSource, GaussianMixture, Maxwellian, ParticleState, SimConfig,
                           UniformBall, apply_event, coupled_run, coupled_step, init_system, jump_rate, run,
                           step)
from kacsim.kernel import KernelSpec, ParameterError
from oracles import numpy_reference_run, poisson_band

SPEC = KernelSpec.power_law(0.5, 0.5)


def make_state(N=20, seed=0, law=None):
    law = law or Maxwellian()
    return ParticleState(law.sample(np.random.default_rng(seed), N))


def test_initial_laws_shapes_and_moments():
    rng = np.random.default_rng(1)
    for law in (Maxwellian((1.0, 0.0, -1.0), 2.0), UniformBall(3.0), GaussianMixture()):
        v = law.sample(rng, 20000)
        assert v.shape == (20000, 3)
    assert np.all(np.linalg.norm(UniformBall(3.0).sample(rng, 1000), axis=1) <= 3.0)
    v = Maxwellian((1.0, 0.0, -1.0), 2.0).sample(rng, 200000)
    np.testing.assert_allclose(v.mean(0), [1, 0, -1], atol=0.02)
    np.testing.assert_allclose(v.var(0), 2.0, rtol=0.02)


def test_invalid_parameters():
    with pytest.raises(ParameterError):
        Maxwellian(temperature=0.0)
    with pytest.raises(ParameterError):
        UniformBall(-1.0)
    with pytest.raises(ParameterError):
        GaussianMixture(weight=1.0)
    with pytest.raises(ParameterError):
        SimConfig(N=1, K=2.0, spec=SPEC, t_end=1.0)
    with pytest.raises(ParameterError):
        SimConfig(N=10, K=0.5, spec=SPEC, t_end=1.0)
    with pytest.raises(ParameterError):
        SimConfig(N=10, K=math.inf, spec=SPEC, t_end=1.0)
    with pytest.raises(ParameterError):
        EventSource(np.random.default_rng(), 1, 2.0)


def test_init_system():
    cfg = SimConfig(N=7, K=2.0, spec=SPEC, t_end=1.0)
    st = init_system(cfg, np.random.default_rng(0))
    assert st.N == 7 and st.time == 0.0


def test_event_source_ranges():
    src = EventSource(np.random.default_rng(3), 5, 4.0, chunk=1000)
    t, dt, i, j, z, phi = src.take_until(50.0)
    assert np.all(i != j) and np.all((i >= 0) & (i < 5)) and np.all((j >= 0) & (j < 5))
    assert np.all((z > 0) & (z <= 4.0)) and np.all((phi >= 0) & (phi < 2 * math.pi))
    assert np.all(np.diff(t) > 0) and t[-1] <= 50.0
    np.testing.assert_allclose(np.diff(t), dt[1:], rtol=0, atol=1e-12)
    # pairs are uniform over the 20 ordered pairs
    counts = np.bincount(i * 5 + j, minlength=25).reshape(5, 5)
    off = counts[~np.eye(5, dtype=bool)]
    exp = len(i) / 20
    assert np.all(np.abs(off - exp) < 5 * math.sqrt(exp))


def test_event_rate_monte_carlo():
    N, K, T = 30, 3.0, 20.0
    src = EventSource(np.random.default_rng(8), N, K)
    n = len(src.take_until(T)[0])
    lo, hi = poisson_band(jump_rate(N, K) * T)
    assert lo <= n <= hi


def test_compiled_kernel_matches_numpy_geometry():
    for spec in (SPEC, KernelSpec.hard_spheres(), KernelSpec.power_law(1.0, 0.9)):
        st = make_state(8, seed=2)
        src = EventSource(np.random.default_rng(5), 8, 3.0)
        _, _, i, j, z, phi = src.take_until(2.0)
        ref = numpy_reference_run(st.velocities, zip(i, j, z, phi), spec, 2.0)
        th = np.zeros(len(i))
        _events.apply_events(st.velocities, i, j, z, phi, spec.law_code, spec.gamma, spec.nu or 0.0, 2.0, th)
        np.testing.assert_allclose(st.velocities, ref, rtol=0, atol=1e-11)


def test_compiled_alignment_matches_numpy(rng):
    from kacsim.geometry import tanaka_align
    for X, Y in rng.normal(size=(200, 2, 3)):
        a = _events.align(*X, *Y)
        b = tanaka_align(X, Y)
        assert a[1] == b[1] and abs(a[0] - b[0]) < 1e-12


def test_conservation_and_observers():
    st = make_state(50)
    src = EventSource(np.random.default_rng(4), 50, 10.0)
    res = run(st, SPEC, 10.0, 2.0, src, observers={"n": lambda s: s.events, "t": lambda s: s.time},
              observe_times=[0.5, 1.0, 2.0])
    assert [t for t, _ in res.observations["n"]] == [0.5, 1.0, 2.0]
    counts = [n for _, n in res.observations["n"]]
    assert counts == sorted(counts) and counts[-1] == st.events
    assert st.time == 2.0
    dp, de = st.drift()
    assert dp <= 1e-12 and de <= 1e-12


def test_split_runs_match_single_run():
    a, b = make_state(30), make_state(30)
    run(a, SPEC, 5.0, 3.0, EventSource(np.random.default_rng(9), 30, 5.0))
    src = EventSource(np.random.default_rng(9), 30, 5.0)
    for t in (0.7, 1.9, 3.0):
        run(b, SPEC, 5.0, t, src)
    np.testing.assert_array_equal(a.velocities, b.velocities)


def test_step_and_t_end_zero():
    st = make_state(10)
    v0 = st.velocities.copy()
    run(st, SPEC, 2.0, 0.0, EventSource(np.random.default_rng(1), 10, 2.0))
    np.testing.assert_array_equal(st.velocities, v0)
    src = EventSource(np.random.default_rng(1), 10, 2.0)
    ev = step(st, SPEC, 2.0, src)
    assert ev.i != ev.j and st.events == 1 and st.time == pytest.approx(ev.dt)
    with pytest.raises(ValueError):
        apply_event(st, SPEC, 2.0, 3, 3, 1.0, 0.0)


def test_cutoff_skips_large_z():
    st = make_state(4)
    v0 = st.velocities.copy()
    ev = apply_event(st, SPEC, 2.0, 0, 1, 2.5, 1.0)
    assert ev.theta == 0.0
    np.testing.assert_array_equal(st.velocities, v0)


def test_exchangeability_n3():
    """Relabelling particles and the per-event pair indices permutes the trajectory."""
    st = make_state(3, seed=11)
    src = EventSource(np.random.default_rng(2), 3, 4.0)
    _, _, i, j, z, phi = src.take_until(3.0)
    ref = st.velocities.copy()
    th = np.zeros(len(i))
    _events.apply_events(ref, i, j, z, phi, 1, 0.5, 0.5, 4.0, th)
    for perm in itertools.permutations(range(3)):
        p = np.array(perm)
        v = np.empty_like(st.velocities)
        v[p] = st.velocities
        _events.apply_events(v, p[i], p[j], z, phi, 1, 0.5, 0.5, 4.0, th)
        np.testing.assert_allclose(v[p], ref, rtol=0, atol=1e-12)


def test_coupled_self_coupling_exact():
    c = CoupledState.from_state(make_state(40))
    out = coupled_run(c, SPEC, 6.0, 6.0, 1.0, EventSource(np.random.default_rng(3), 40, 6.0), [0.5, 1.0])
    assert [m for _, m in out] == [0.0, 0.0]


def test_coupled_reference_matches_plain_run():
    st = make_state(40)
    c = CoupledState.from_state(st)
    coupled_run(c, SPEC, 2.0, 8.0, 1.0, EventSource(np.random.default_rng(3), 40, 8.0))
    run(st, SPEC, 8.0, 1.0, EventSource(np.random.default_rng(3), 40, 8.0))
    np.testing.assert_array_equal(c.sys_b.velocities, st.velocities)
    assert c.msd() > 0
    dp, de = c.sys_a.drift()
    assert dp <= 1e-12 and de <= 1e-12


def test_coupled_step_and_validation():
    c = CoupledState.from_state(make_state(5))
    src = EventSource(np.random.default_rng(0), 5, 4.0)
    ea, eb = coupled_step(c, SPEC, 2.0, 4.0, src)
    assert ea.i == eb.i and ea.z == eb.z and c.time == pytest.approx(eb.dt)
    if eb.z > 2.0:
        assert ea.theta == 0.0
    with pytest.raises(ParameterError):
        coupled_step(c, SPEC, 5.0, 4.0, src)
