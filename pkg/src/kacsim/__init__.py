"""Kac particle simulation of the spatially homogeneous Boltzmann equation
with hard potentials and angular cutoff, plus the Wasserstein tooling used to
measure propagation of chaos."""

from .kernel import (AngularLaw, KernelSpec, ParameterError, QuadratureError, from_inverse_power,
                     g_of_z, h_of_theta, beta, phi_k, psi_k)
from .geometry import (c_fn, c_k_fn, deflection_angle, deviation_a, frame_of, fundest_lhs, fundest_terms,
                       gamma_vec, post_collision, post_collision_sigma, tanaka_align)
from .engine import (CoupledState, EventSource, GaussianMixture, Maxwellian, ParticleState, SimConfig,
                     UniformBall, coupled_run, coupled_step, init_system, run, step)
from .transport import (EmpiricalMeasure, TransportPlan, exp_moment, maxwellian_stats, moments, pi_sampler,
                        w2_exact, w2_squared)

__version__ = "0.1.0"
