import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kacsim.kernel import (AngularLaw, KernelSpec, ParameterError, beta, fit_gap_constant, from_inverse_power,
                           g_envelope_constants, g_of_z, gap_ratio, h_of_theta, phi_k, phi_k_bound_constant,
                           psi_k, squared_angle_gap)
from oracles import h_by_quadrature, hs_gap_closed_form

nus = st.floats(0.05, 0.95)


def test_validation():
    with pytest.raises(ParameterError):
        KernelSpec.power_law(0.5, 1.0)
    with pytest.raises(ParameterError):
        KernelSpec.power_law(1.5, 0.5)
    with pytest.raises(ParameterError):
        KernelSpec(0.5, AngularLaw.HARD_SPHERES, nu=0.3)
    with pytest.raises(ParameterError):
        from_inverse_power(5.0)


def test_inverse_power_mapping():
    s = from_inverse_power(9.0)
    assert s.gamma == pytest.approx(0.5) and s.nu == pytest.approx(0.25)
    assert KernelSpec.from_dict(s.to_dict()) == s


def test_hard_sphere_g_exact():
    hs = KernelSpec.hard_spheres()
    z = np.array([0.0, 0.5, math.pi / 2, 2.0, np.inf])
    np.testing.assert_array_equal(g_of_z(hs, z), [math.pi / 2, math.pi / 2 - 0.5, 0.0, 0.0, 0.0])


@given(nu=nus, z=st.floats(0.0, 1e6))
@settings(max_examples=300, deadline=None)
def test_power_h_inverts_g(nu, z):
    spec = KernelSpec.power_law(0.5, nu)
    assert abs(h_of_theta(spec, g_of_z(spec, z)) - z) <= 1e-10 * max(1.0, z)


@given(nu=nus, theta=st.floats(1e-3, math.pi / 2))
@settings(max_examples=100, deadline=None)
def test_h_matches_quadrature(nu, theta):
    spec = KernelSpec.power_law(0.5, nu)
    assert h_of_theta(spec, theta) == pytest.approx(h_by_quadrature(nu, theta), rel=1e-9, abs=1e-12)


def test_g_decreasing_from_half_pi(spec):
    z = np.linspace(0, 50, 1001)
    g = g_of_z(spec, z)
    assert g[0] == pytest.approx(math.pi / 2)
    assert np.all(np.diff(g) <= 0)
    assert g_of_z(spec, np.inf) == 0.0


def test_beta_support():
    spec = KernelSpec.power_law(0.5, 0.5)
    assert beta(spec, 0.0) == 0 and beta(spec, 2.0) == 0
    assert beta(spec, 1.0) == pytest.approx(1.0)


def test_hs_gap_closed_form():
    hs = KernelSpec.hard_spheres()
    assert squared_angle_gap(hs, 1.0, 2.0) == pytest.approx(math.pi ** 3 / 48, rel=1e-12)
    for x, y in [(0.3, 5.0), (2.0, 2.1), (7.0, 0.01)]:
        assert squared_angle_gap(hs, x, y) == pytest.approx(hs_gap_closed_form(x, y), rel=1e-10)


def test_gap_symmetry_and_scaling(spec):
    g = squared_angle_gap(spec, 1.3, 0.4)
    assert g == pytest.approx(squared_angle_gap(spec, 0.4, 1.3), rel=1e-10)
    assert squared_angle_gap(spec, 2.6, 0.8) == pytest.approx(2 * g, rel=1e-8)
    assert squared_angle_gap(spec, 1.0, 1.0) == 0.0


def test_gap_constant_bounds_random_pairs(spec, rng):
    C = fit_gap_constant(spec)
    for x, y in np.exp(rng.uniform(-4, 4, (50, 2))):
        assert gap_ratio(spec, x, y) <= C * (1 + 1e-8)


def test_envelope():
    spec = KernelSpec.power_law(0.5, 0.5)
    c2, c3 = g_envelope_constants(spec)
    z = np.geomspace(1e-4, 1e9, 500)
    r = g_of_z(spec, z) * (1 + z) ** 2
    assert 0 < c2 <= r.min() + 1e-12 and r.max() <= c3 + 1e-12


def test_phi_psi_split(spec):
    x = 1.7
    total = phi_k(spec, x, 1e12) + psi_k(spec, x, 1e12)
    for K in (1.0, 3.0, 10.0, 100.0):
        assert phi_k(spec, x, K) + psi_k(spec, x, K) == pytest.approx(total, rel=1e-8)
    assert phi_k(spec, x, 3.0) <= phi_k(spec, x, 10.0)
    C = phi_k_bound_constant(spec)
    for x in (0.1, 1.0, 10.0):
        assert phi_k(spec, x, 50.0) <= C * x ** spec.gamma * (1 + 1e-9)
