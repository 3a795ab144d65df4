"""
The angular kernel and its substitution variable
================================================

Collisions are parameterised by z in (0, inf): the deflection angle is
theta = G(z / |v - v*|^gamma), where G inverts the tail integral H of the
angular density. Small z means a grazing-free, large-angle collision; large z
means almost no deflection.
"""

import numpy as np

from kacsim.kernel import (KernelSpec, fit_gap_constant, from_inverse_power, g_envelope_constants, g_of_z,
                           h_of_theta, phi_k_bound_constant)

# an inverse-power force 1/r^9 gives gamma = 1/2, nu = 1/4
spec = from_inverse_power(9.0)
print("1/r^9 force ->", spec)

z = np.array([0.0, 0.1, 1.0, 10.0, 100.0, 1e4])
theta = g_of_z(spec, z)
for zi, ti in zip(z, theta):
    print(f"z = {zi:8.1f}   theta = {ti:.6f}")

# H undoes G
print("max |H(G(z)) - z| =", np.max(np.abs(h_of_theta(spec, theta) - z)))

# hard spheres: G is a ramp that stops at z = pi/2
hs = KernelSpec.hard_spheres()
print("hard spheres G on", z[:3], "->", g_of_z(hs, z[:3]))

# G decays like (1 + z)^(-1/nu): the two envelope constants
c2, c3 = g_envelope_constants(spec)
print(f"envelope: {c2:.4f} (1+z)^(-1/nu) <= G(z) <= {c3:.4f} (1+z)^(-1/nu)")

# the squared gap between the angles at two speeds is controlled by one constant
print("gap constant:", fit_gap_constant(spec))
print("Phi_K(x) <= C x^gamma with C =", phi_k_bound_constant(spec))
