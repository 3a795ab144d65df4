import math
import warnings

import numpy as np
import pytest

from kacsim.engine import EventSource, Maxwellian, UniformBall
from kacsim.harness import (ConfigError, ExperimentConfig, chaos_rate_experiment, cutoff_rate_experiment,
                            diagnostics, equilibration_experiment, fit_rate, iid_baseline, parse_config_text,
                            simulate, stream)
from kacsim.harness.experiments import worker_count
from kacsim.harness.output import render_result
from kacsim.harness.streams import EVENTS
from kacsim.kernel import AngularLaw, KernelSpec

CHAOS = """
[kernel]
law = power
gamma = 0.5
nu = 0.5
[system]
K = 4
t_end = 0.2
replicas = 4
[grids]
N = 8, 16, 32
M = 128
"""


def test_parse_full_config():
    cfg = parse_config_text(CHAOS, "chaos-rate")
    assert cfg.n_grid == (8, 16, 32) and cfg.M == 128 and cfg.K == 4.0 and cfg.replicas == 4
    assert cfg.spec == KernelSpec.power_law(0.5, 0.5)
    cfg = parse_config_text("[kernel]\ns = 9\n[init]\nlaw = uniform-ball\nradius = 2\n", "simulate")
    assert cfg.spec.nu == pytest.approx(0.25) and cfg.init == UniformBall(2.0)
    cfg = parse_config_text("[kernel]\nlaw = hard-spheres\n", "simulate")
    assert cfg.spec.law is AngularLaw.HARD_SPHERES


@pytest.mark.parametrize("text,kind", [
    ("[kernel]\nlaw = power\nnu = 0.5\ncolour = red\n", "simulate"),
    ("[extras]\nx = 1\n", "simulate"),
    ("[grids]\nN = 32, 16\nM = 64\n", "chaos-rate"),
    ("[grids]\nN = 8, 16\nM = 10\n", "chaos-rate"),
    ("[grids]\nK = 2, 4, 128\nK_ref = 64\n", "cutoff-rate"),
    ("[system]\nN = 1\n", "simulate"),
    ("[system]\nN = 2.5\n", "simulate"),
    ("[system]\nK = abc\n", "simulate"),
    ("[kernel]\nlaw = power\nnu = 1.5\n", "simulate"),
    ("[kernel]\nlaw = soft\n", "simulate"),
    ("no section header\n", "simulate"),
    ("[system]\nreplicas = 0\n", "simulate"),
])
def test_invalid_configs(text, kind):
    with pytest.raises(ConfigError):
        parse_config_text(text, kind)


def test_overrides_and_warning():
    cfg = parse_config_text(CHAOS, "chaos-rate", overrides=[("system", "k", "6")], seed=5)
    assert cfg.K == 6.0 and cfg.seed == 5
    with pytest.warns(UserWarning):
        parse_config_text(CHAOS.replace("M = 128", "M = 40"), "chaos-rate")


def test_fit_rate_exact_power_law():
    x = np.array([10.0, 20.0, 40.0, 80.0])
    f = fit_rate(x, 3.0 * x ** -0.5, 0.01 * 3.0 * x ** -0.5)
    assert f.slope == pytest.approx(-0.5) and f.r_squared == pytest.approx(1.0)
    assert math.exp(f.intercept) == pytest.approx(3.0)
    # equal relative errors sigma: slope se = sigma / sqrt(Sxx)
    lx = np.log(x)
    assert f.slope_se == pytest.approx(0.01 / math.sqrt(np.sum((lx - lx.mean()) ** 2)))
    with pytest.raises(ValueError):
        fit_rate([1, 2], [1, 2])


def test_streams_distinct_and_reproducible():
    a = stream(7, 3, 0, 1).random(4)
    np.testing.assert_array_equal(a, stream(7, 3, 0, 1).random(4))
    assert not np.array_equal(a, stream(7, 3, 0, 2).random(4))
    assert not np.array_equal(a, stream(8, 3, 0, 1).random(4))


def test_replica_streams_uncorrelated():
    R, bins = 40, 200
    counts = []
    for r in range(R):
        src = EventSource(stream(1, 9, 0, r, EVENTS), 10, 1.0)
        t = src.take_until(float(bins))[0]
        counts.append(np.histogram(t, bins=bins, range=(0, bins))[0])
    rho = np.corrcoef(np.array(counts))
    off = rho[~np.eye(R, dtype=bool)]
    assert np.max(np.abs(off)) < 5 / math.sqrt(bins)


def test_chaos_rate_deterministic_and_t0_matches_iid():
    cfg = parse_config_text(CHAOS, "chaos-rate", seed=3)
    a = chaos_rate_experiment(cfg)
    b = chaos_rate_experiment(cfg)
    assert render_result(cfg, a)["table.csv"] == render_result(cfg, b)["table.csv"]
    assert len(a.rows) == 12 and a.fit is not None and a.fit.n_points == 3
    z = chaos_rate_experiment(cfg, t=0.0)
    base = iid_baseline(cfg)
    assert [r[-1] for r in z.rows] == [r[-1] for r in base.rows]


def test_chaos_rate_parallel_matches_serial():
    cfg = parse_config_text(CHAOS, "chaos-rate", seed=3)
    a = chaos_rate_experiment(cfg, workers=1)
    b = chaos_rate_experiment(cfg, workers=2)
    assert sorted(a.rows) == sorted(b.rows)


def test_worker_env(monkeypatch):
    monkeypatch.setenv("KACSIM_WORKERS", "3")
    assert worker_count() == 3 and worker_count(1) == 1
    monkeypatch.delenv("KACSIM_WORKERS")
    assert worker_count() == 1


def test_estimator_consistency_in_m():
    base = CHAOS.replace("N = 8, 16, 32", "N = 10").replace("replicas = 4", "replicas = 24")
    out = []
    for M in (200, 400):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cfg = parse_config_text(base.replace("M = 128", f"M = {M}"), "chaos-rate", seed=11)
        out.append(chaos_rate_experiment(cfg).summary[0])
    (_, m1, s1), (_, m2, s2) = out
    assert abs(m1 - m2) / m2 <= 2 * math.hypot(s1, s2) / m2


CUT = """
[system]
N = 30
t_end = 0.3
replicas = {R}
[grids]
K = 2, 4, 8
K_ref = 8
"""


def test_cutoff_self_coupling_zero_and_decreasing():
    cfg = parse_config_text(CUT.format(R=8), "cutoff-rate", seed=2)
    res = cutoff_rate_experiment(cfg)
    means = [m for _, m, _ in res.summary]
    assert means[-1] == 0.0
    assert means[0] > means[1] > 0
    assert res.fit is None   # only two grid points below K_ref


def test_stderr_scales_with_replicas():
    se = {}
    for R in (64, 256):
        cfg = parse_config_text(CUT.format(R=R), "cutoff-rate", seed=4)
        se[R] = cutoff_rate_experiment(cfg).summary[0][2]
    # four times the replicas halves the standard error (CLT), within 30%
    assert 0.7 * 2 <= se[64] / se[256] <= 1.3 * 2


def test_simulate_snapshots_and_t_end_zero():
    cfg = ExperimentConfig("simulate", N=20, K=3.0, t_end=0.0, replicas=1, seed=1)
    res = simulate(cfg)
    assert len(res.snapshots) == 1 and res.snapshots[0][0] == 0.0
    assert len(res.rows) == 1
    cfg = ExperimentConfig("simulate", N=20, K=3.0, t_end=1.0, times=(0.0, 0.5, 1.0), replicas=2, seed=1)
    res = simulate(cfg)
    assert len(res.snapshots) == 6 and len(res.rows) == 6
    files = render_result(cfg, res)
    assert sum(k.startswith("plotdata/snapshot") for k in files) == 6


def test_equilibration_maxwellian_stationary():
    cfg = ExperimentConfig("equilibrate", spec=KernelSpec.hard_spheres(), K=math.pi / 2 + 1, N=1000,
                           init=Maxwellian(), t_end=1.0, times=(0.0, 0.5, 1.0), replicas=2, seed=6)
    res = equilibration_experiment(cfg)
    for row in res.rows:
        assert abs(row[4] - 5 / 3) <= 4 * row[5]
        assert row[8] <= 1e-12 and row[9] <= 1e-12
    assert res.extra["converged"]


def test_diagnostics_pass_and_minimal_cutoff():
    for spec in (KernelSpec.power_law(0.5, 0.5), KernelSpec.hard_spheres()):
        cfg = ExperimentConfig("diagnostics", spec=spec, diag_samples=500, diag_quadruples=6, diag_K=1.0)
        rep = diagnostics(cfg)
        assert rep.passed, rep.lines()


def test_diagnostics_detects_gamma_sign_flip():
    from kacsim.geometry import frame_of

    def flipped(X, phi):
        f = frame_of(X)
        phi = np.asarray(phi)[..., None]
        return np.cos(phi) * f.i_vec - np.sin(phi) * f.j_vec

    cfg = ExperimentConfig("diagnostics", diag_samples=500, diag_quadruples=1)
    rep = diagnostics(cfg, gamma_fn=flipped)
    assert not rep.passed
    assert [c.passed for c in rep.checks if c.name.startswith("Tanaka")] == [False]
