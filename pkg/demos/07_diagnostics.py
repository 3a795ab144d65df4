"""
Property sweeps, and what a bug looks like
==========================================

The diagnostics run every geometric and kernel identity on random inputs,
including the one-collision bound that splits the coupled squared distance
into a gap term A1, a drift term A2 and a cutoff tail A3. A deliberately
broken Gamma (the J component flipped) is caught by the contraction sweep.
"""

import numpy as np

from kacsim.geometry import frame_of, fundest_lhs, fundest_terms
from kacsim.harness import ExperimentConfig, diagnostics
from kacsim.kernel import KernelSpec

spec = KernelSpec.power_law(0.5, 0.5)
rng = np.random.default_rng(5)
v, vs, vt, vts = rng.normal(size=(4, 3))
A1, A2, A3 = fundest_terms(spec, 10.0, v, vs, vt, vts)
lhs = fundest_lhs(spec, 10.0, v, vs, vt, vts)
print(f"LHS {lhs:.5f} <= A1 + A2 + A3 = {A1:.5f} + {A2:.5f} + {A3:.5f} = {A1 + A2 + A3:.5f}")

cfg = ExperimentConfig("diagnostics", spec=spec, diag_samples=2000, diag_quadruples=10)
print("\n".join(diagnostics(cfg).lines()))


def broken(X, phi):
    f = frame_of(X)
    phi = np.asarray(phi)[..., None]
    return np.cos(phi) * f.i_vec - np.sin(phi) * f.j_vec


print("\nwith a sign flip in Gamma:")
print([line for line in diagnostics(cfg, gamma_fn=broken).lines() if "Tanaka" in line][0])
