import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from kacsim.transport import (EmpiricalMeasure, TransportError, exp_moment, load_points, load_snapshot,
                              m4_ratio_stderr, maxwellian_stats, moments, pi_sampler, read_cloud,
                              replicate_mixture, save_points, snapshot_json, w2_exact, w2_mixture_bound_check,
                              w2_squared)
from oracles import brute_force_w2sq, replicate


def cloud(n):
    return arrays(np.float64, (n, 3), elements=st.floats(-10, 10, allow_nan=False))


@given(data=st.data(), n=st.integers(1, 6))
@settings(max_examples=150, deadline=None)
def test_assignment_matches_brute_force(data, n):
    x, y = data.draw(cloud(n)), data.draw(cloud(n))
    assert abs(w2_squared(x, y) - brute_force_w2sq(x, y)) <= 1e-12 * max(1.0, brute_force_w2sq(x, y))


def test_seven_points_brute_force(rng):
    x, y = rng.normal(size=(2, 7, 3))
    assert w2_squared(x, y) == pytest.approx(brute_force_w2sq(x, y), rel=1e-12, abs=1e-12)


def test_identity_translation_symmetry(rng):
    x = rng.normal(size=(50, 3))
    assert w2_squared(x, x) == 0.0
    d = np.array([0.3, -1.0, 2.0])
    assert w2_squared(x, x + d) == pytest.approx(d @ d, rel=1e-12)
    y = rng.normal(size=(50, 3))
    assert w2_squared(x, y) == pytest.approx(w2_squared(y, x), rel=1e-12)


def test_triangle_inequality(rng):
    for _ in range(10):
        a, b, c = rng.normal(size=(3, 12, 3)) * rng.uniform(0.5, 2, (3, 1, 1))
        assert math.sqrt(w2_squared(a, c)) <= math.sqrt(w2_squared(a, b)) + math.sqrt(w2_squared(b, c)) + 1e-12


@pytest.mark.parametrize("n,k", [(3, 2), (4, 3), (5, 5), (7, 4)])
def test_rectangular_matches_replicated_assignment(rng, n, k):
    x, y = rng.normal(size=(n, 3)), rng.normal(size=(n * k, 3))
    rect = w2_exact(x, y)
    rect.check_feasible()
    assert rect.cost == pytest.approx(w2_squared(replicate(x, k), y), rel=1e-12, abs=1e-14)


def test_rectangular_general_sizes(rng):
    x, y = rng.normal(size=(6, 3)), rng.normal(size=(10, 3))
    plan = w2_exact(x, y)
    plan.check_feasible()
    assert sum(plan.rational_masses()) == 1
    # lcm replication gives the same problem as an assignment
    assert plan.cost == pytest.approx(w2_squared(replicate(x, 5), replicate(y, 3)), rel=1e-12)
    P = plan.dense()
    np.testing.assert_allclose(P.sum(1), 1 / 6)
    np.testing.assert_allclose(P.sum(0), 1 / 10)


def test_plan_check_catches_tampering(rng):
    plan = w2_exact(rng.normal(size=(4, 3)), rng.normal(size=(8, 3)))
    bad = type(plan)(plan.source, plan.target, plan.src, plan.tgt, plan.units + 1, plan.cost)
    with pytest.raises(TransportError):
        bad.check_feasible()


def test_measure_validation():
    with pytest.raises(ValueError):
        EmpiricalMeasure(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        EmpiricalMeasure(np.zeros((0, 3)))


def test_mixture_replication_and_convexity(rng):
    f, g = rng.normal(size=(3, 3)), rng.normal(size=(4, 3)) + 2
    mix = replicate_mixture(f, g, Fraction(1, 3))
    # per-point weights 1/9 (f) and 1/6 (g) -> replication counts 2 : 3
    assert mix.n == 3 * 2 + 4 * 3
    f2, g2 = rng.normal(size=(3, 3)), rng.normal(size=(4, 3))
    for lam in (Fraction(1, 4), Fraction(1, 2), Fraction(2, 3)):
        assert w2_mixture_bound_check(f, f2, g, g2, lam)


def test_pi_sampler_identities(rng):
    x, w = rng.normal(size=(5, 3)), rng.normal(size=(15, 3))
    plan = w2_exact(x, w)
    s = pi_sampler(plan)
    assert s.source_marginal_exact() == [Fraction(1, 5)] * 5
    np.testing.assert_allclose(s.source_marginal(), 0.2, rtol=0, atol=1e-15)
    assert abs(s.displacement() - plan.cost) <= 1e-12 * max(1.0, plan.cost)
    for j in range(15):
        _, p = s.column_exact(j)
        assert sum(p) == 1
    draws = s.sample(0, rng, size=10)
    assert all(any(np.array_equal(d, xi) for xi in x) for d in draws)


def test_moments_and_stats(rng):
    x = rng.normal(size=(400000, 3))
    assert moments(x, 2) == pytest.approx(3.0, rel=0.01)
    mean, T, ratio = maxwellian_stats(x)
    assert T == pytest.approx(1.0, rel=0.01)
    assert abs(ratio - 5 / 3) < 4 * m4_ratio_stderr(x)
    with pytest.raises(ValueError):
        moments(x, 0)


def test_exp_moment_saturation():
    val, sat = exp_moment(np.array([[1.0, 0, 0], [0, 2.0, 0]]), 1.0)
    assert val == pytest.approx((math.e + math.e ** 2) / 2) and not sat
    val, sat = exp_moment(np.array([[1e5, 0, 0]]), 1.9)
    assert sat and val == np.finfo(float).max
    with pytest.raises(ValueError):
        exp_moment(np.ones((2, 3)), 2.0)


def test_io_roundtrip(tmp_path, rng):
    x = rng.normal(size=(20, 3)) * 1e3
    save_points(tmp_path / "a.txt", x)
    np.testing.assert_array_equal(load_points(tmp_path / "a.txt").points, x)
    (tmp_path / "s.json").write_text(snapshot_json(x, 1.5, replica=0))
    np.testing.assert_array_equal(load_snapshot(tmp_path / "s.json").points, x)
    np.testing.assert_array_equal(read_cloud(tmp_path / "s.json").points, x)
