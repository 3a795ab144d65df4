"""
Collision geometry and angle alignment
======================================

Post-collision velocities are v' = v + a, v*' = v* - a, with a built from the
relative velocity X and an orthogonal vector Gamma(X, phi) of the same length.
Aligning the azimuthal angle of a second collision with relative velocity Y
makes the two Gamma vectors as close as |X - Y|: this is what lets two
particle systems be coupled tightly.
"""

import math

import numpy as np

from kacsim import geometry as geo

rng = np.random.default_rng(0)
v, vs = rng.normal(size=3), rng.normal(size=3)
theta, phi = 0.7, 2.1

p, q = geo.post_collision(v, vs, theta, phi)
print("momentum before/after:", v + vs, p + q)
print("energy before/after:  ", v @ v + vs @ vs, p @ p + q @ q)

# the same collision through the unit-sphere parameterisation
p2, q2 = geo.post_collision_sigma(v, vs, theta, phi)
print("a-form vs sigma-form:", np.abs(p - p2).max())

# the frame is odd: I(-X) = -I(X)
X = v - vs
f, g = geo.frame_of(X), geo.frame_of(-X)
print("frame oddness residual:", np.abs(f.i_vec + g.i_vec).max())

# alignment: for every phi, |Gamma(X, phi) - Gamma(Y, psi)| <= |X - Y|
Y = rng.normal(size=3)
phi0, sign = geo.tanaka_align(X, Y)
phis = np.linspace(0, 2 * math.pi, 9)
psis = geo.aligned_phi(phis, phi0, sign)
gaps = np.linalg.norm(geo.gamma_vec(X, phis) - geo.gamma_vec(Y, psis), axis=1)
print(f"|X - Y| = {np.linalg.norm(X - Y):.6f}; aligned gaps:", np.round(gaps, 6))

# unaligned angles do not have this property
gaps_raw = np.linalg.norm(geo.gamma_vec(X, phis) - geo.gamma_vec(Y, phis), axis=1)
print("same-angle gaps:         ", np.round(gaps_raw, 6))
