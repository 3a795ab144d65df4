"""Experiment configuration: an INI file with fixed sections and keys.

Example::

    [kernel]
    law = power          ; power | hard-spheres
    gamma = 0.5
    nu = 0.5             ; or: s = 9 (inverse-power force exponent)

    [system]
    N = 200
    K = 20
    t_end = 1.0
    replicas = 32

    [init]
    law = maxwellian     ; maxwellian | uniform-ball | mixture
    temperature = 1.0
    mean = 0, 0, 0

    [grids]
    N = 50, 100, 200, 400, 800
    K = 2, 4, 8, 16
    times = 0, 0.5, 1
    M = 3200
    K_ref = 64

Time is measured in the generator's own units: the total jump rate of an
N-particle system with cutoff K is ``N pi K`` per unit time.
"""

from __future__ import annotations

import configparser
import math
import warnings
from dataclasses import asdict, dataclass, replace
from typing import Optional, Tuple

from ..engine import GaussianMixture, Maxwellian, SimConfig, UniformBall
from ..kernel import AngularLaw, KernelSpec, ParameterError, from_inverse_power

KINDS = ("simulate", "equilibrate", "chaos-rate", "cutoff-rate", "w2", "diagnostics")


class ConfigError(ValueError):
    """Invalid, incomplete or unreadable configuration."""


SCHEMA = {
    "kernel": {"law", "gamma", "nu", "s"},
    "system": {"n", "k", "t_end", "replicas"},
    "init": {"law", "mean", "temperature", "radius", "means", "temperatures", "weight"},
    "grids": {"n", "k", "times", "m", "k_ref"},
    "diagnostics": {"samples", "quadruples", "k"},
    "output": {"dir"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    spec: KernelSpec = KernelSpec.power_law(0.5, 0.5)
    init: object = Maxwellian()
    N: int = 100
    K: float = 10.0
    t_end: float = 1.0
    replicas: int = 1
    seed: int = 0
    n_grid: Tuple[int, ...] = ()
    k_grid: Tuple[float, ...] = ()
    times: Tuple[float, ...] = ()
    M: int = 0
    K_ref: float = 0.0
    diag_samples: int = 1000
    diag_quadruples: int = 100
    diag_K: float = 10.0
    out: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        for name in ("n_grid", "k_grid", "times"):
            g = getattr(self, name)
            if list(g) != sorted(set(g)):
                raise ConfigError(f"grid {name} must be strictly increasing")
        if self.kind == "chaos-rate":
            if not self.n_grid:
                raise ConfigError("chaos-rate needs a nonempty N grid")
            if min(self.n_grid) < 2:
                raise ConfigError("N grid entries must be >= 2")
            if self.M < max(self.n_grid):
                raise ConfigError("reference size M must be >= max(N grid)")
            if self.M < 4 * max(self.n_grid):
                warnings.warn("reference size M below 4 * max(N grid): reference bias may dominate")
            if self.spec.law is AngularLaw.POWER:
                k_term = self.K ** (1.0 - 2.0 / self.spec.nu)
                if k_term > 0.1 * max(self.n_grid) ** (-1.0 / 3.0):
                    warnings.warn("cutoff term K^(1-2/nu) is not negligible over the N grid")
        if self.kind == "cutoff-rate":
            if not self.k_grid:
                raise ConfigError("cutoff-rate needs a nonempty K grid")
            if min(self.k_grid) < 1 or max(self.k_grid) > self.K_ref:
                raise ConfigError("K grid must lie in [1, K_ref]")
        try:
            self.sim_config()
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None

    def sim_config(self, N: Optional[int] = None, K: Optional[float] = None) -> SimConfig:
        return SimConfig(N=self.N if N is None else N, K=self.K if K is None else K, spec=self.spec,
                         t_end=self.t_end, init=self.init, seed=self.seed, replicas=self.replicas)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spec"] = self.spec.to_dict()
        d["init"] = {"law": type(self.init).__name__, **asdict(self.init)}
        for k in ("n_grid", "k_grid", "times"):
            d[k] = list(d[k])
        return d

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _floats(text: str, what: str) -> Tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.replace(";", ",").split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"cannot parse {what}: {text!r}") from None


def _num(sec, key, conv, default=None):
    if key not in sec:
        return default
    raw = sec[key]
    try:
        val = conv(raw)
    except ValueError:
        raise ConfigError(f"[{sec.name}] {key}: cannot parse {raw!r}") from None
    if isinstance(val, float) and not math.isfinite(val):
        raise ConfigError(f"[{sec.name}] {key}: must be finite")
    return val


def _int(text):
    f = float(text)
    if f != int(f):
        raise ValueError(text)
    return int(f)


def parse_kernel(sec) -> KernelSpec:
    law = sec.get("law", "power").strip().lower()
    try:
        if "s" in sec:
            return from_inverse_power(_num(sec, "s", float))
        if law in ("hard-spheres", "hard_spheres", "hs"):
            return KernelSpec.hard_spheres(_num(sec, "gamma", float, 1.0))
        if law == "power":
            if "nu" not in sec:
                raise ConfigError("[kernel] power law needs nu (or s)")
            return KernelSpec.power_law(_num(sec, "gamma", float, 0.5), _num(sec, "nu", float))
    except ParameterError as exc:
        raise ConfigError(f"[kernel] {exc}") from None
    raise ConfigError(f"[kernel] unknown law {law!r}")


def parse_init(sec):
    if sec is None:
        return Maxwellian()
    law = sec.get("law", "maxwellian").strip().lower()
    try:
        if law == "maxwellian":
            mean = _floats(sec.get("mean", "0,0,0"), "mean")
            return Maxwellian(mean=mean, temperature=_num(sec, "temperature", float, 1.0))
        if law in ("uniform-ball", "uniform_ball", "ball"):
            return UniformBall(radius=_num(sec, "radius", float, 1.0))
        if law == "mixture":
            flat = _floats(sec.get("means", "-1,0,0; 1,0,0"), "means")
            if len(flat) != 6:
                raise ConfigError("[init] means needs six numbers")
            temps = _floats(sec.get("temperatures", "0.5, 0.5"), "temperatures")
            return GaussianMixture(means=(flat[:3], flat[3:]), temperatures=temps,
                                   weight=_num(sec, "weight", float, 0.5))
    except ParameterError as exc:
        raise ConfigError(f"[init] {exc}") from None
    raise ConfigError(f"[init] unknown law {law!r}")


def parse_config_text(text: str, kind: str, source: str = "<config>", overrides=(),
                      **fields) -> ExperimentConfig:
    """Parse INI text; ``overrides`` are ``(section, key, value)`` triples
    applied on top, ``fields`` set dataclass fields directly (seed, out)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        msg = str(exc).splitlines()[0]
        raise ConfigError(f"{source}: malformed config: {msg}") from None
    for section, key, value in overrides:
        if not cp.has_section(section):
            cp.add_section(section)
        cp[section][key] = str(value)
    for name in cp.sections():
        if name not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{name}]")
        unknown = set(cp[name].keys()) - SCHEMA[name]
        if unknown:
            raise ConfigError(f"{source}: unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    kw = {"kind": kind}
    if cp.has_section("kernel"):
        kw["spec"] = parse_kernel(cp["kernel"])
    kw["init"] = parse_init(cp["init"] if cp.has_section("init") else None)
    if cp.has_section("system"):
        s = cp["system"]
        for key, name, conv in (("n", "N", _int), ("k", "K", float), ("t_end", "t_end", float),
                                ("replicas", "replicas", _int)):
            v = _num(s, key, conv)
            if v is not None:
                kw[name] = v
    if cp.has_section("grids"):
        g = cp["grids"]
        if "n" in g:
            vals = _floats(g["n"], "N grid")
            if any(v != int(v) for v in vals):
                raise ConfigError("N grid must hold integers")
            kw["n_grid"] = tuple(int(v) for v in vals)
        if "k" in g:
            kw["k_grid"] = _floats(g["k"], "K grid")
        if "times" in g:
            kw["times"] = _floats(g["times"], "times")
        if "m" in g:
            kw["M"] = _num(g, "m", _int)
        if "k_ref" in g:
            kw["K_ref"] = _num(g, "k_ref", float)
    if cp.has_section("diagnostics"):
        d = cp["diagnostics"]
        for key, name, conv in (("samples", "diag_samples", _int), ("quadruples", "diag_quadruples", _int),
                                ("k", "diag_K", float)):
            v = _num(d, key, conv)
            if v is not None:
                kw[name] = v
    if cp.has_section("output") and "dir" in cp["output"]:
        kw["out"] = cp["output"]["dir"]
    kw.update({k: v for k, v in fields.items() if v is not None})
    try:
        return ExperimentConfig(**kw)
    except (ParameterError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path, kind: str, overrides=(), **fields) -> ExperimentConfig:
    """Read ``path`` (or start from defaults when ``path`` is None) and apply overrides."""
    text, source = "", "<defaults>"
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
        source = str(path)
    return parse_config_text(text, kind, source, overrides, **fields)
