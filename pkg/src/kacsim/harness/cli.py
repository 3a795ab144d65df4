"""Command-line entry point.

    kacsim simulate     -c run.ini --seed 1 --out results/sim
    kacsim equilibrate  -c eq.ini  --seed 1 --out results/eq
    kacsim chaos-rate   -c chaos.ini --seed 7 --out results/chaos --workers 4
    kacsim cutoff-rate  -c cut.ini --seed 7 --out results/cut
    kacsim w2 a.txt b.txt
    kacsim diagnostics  [-c diag.ini] [--seed 0] [--out results/diag]

Exit codes: 0 success, 2 configuration or input error, 3 runtime error,
4 diagnostics failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
import warnings

from ..kernel import ParameterError
from ..transport import TransportError, read_cloud, w2_squared
from .config import ConfigError, load_config
from .diagnostics import diagnostics
from .experiments import run_experiment, worker_count
from .output import fmt, render_meta, render_result, write_files

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_DIAGNOSTICS = 0, 2, 3, 4

log = logging.getLogger("kacsim")

EXPERIMENTS = ("simulate", "equilibrate", "chaos-rate", "cutoff-rate")


class InputError(ConfigError):
    pass


def _override(text: str):
    try:
        lhs, value = text.split("=", 1)
        section, key = lhs.split(".", 1)
    except ValueError:
        raise ConfigError(f"--set expects section.key=value, got {text!r}") from None
    return section.strip(), key.strip().lower(), value.strip()


HELP = {
    "simulate": "run replicas and write velocity snapshots",
    "equilibrate": "track moments of replicas and test for relaxation to a Maxwellian",
    "chaos-rate": "estimate E W2^2 against a large reference system over an N grid",
    "cutoff-rate": "couple cutoffs K1 <= K_ref and measure their squared distance",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kacsim", description="Kac particle simulations of the Boltzmann equation.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        s = sub.add_parser(name, help=HELP[name])
        s.add_argument("-c", "--config", help="INI config file")
        s.add_argument("--seed", type=int, required=True, help="root seed (required)")
        s.add_argument("--out", help="output directory (overrides [output] dir)")
        s.add_argument("--N", type=int, dest="N")
        s.add_argument("--K", type=float, dest="K")
        s.add_argument("--t-end", type=float, dest="t_end")
        s.add_argument("--replicas", type=int)
        s.add_argument("--workers", type=int, help="worker processes (default: $KACSIM_WORKERS or 1)")
        s.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override any config key")
    s = sub.add_parser("w2", help="print the squared Wasserstein-2 distance between two point clouds")
    s.add_argument("file_a")
    s.add_argument("file_b")
    s = sub.add_parser("diagnostics", help="run the property sweeps; exit 4 on any failure")
    s.add_argument("-c", "--config")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.add_argument("--samples", type=int)
    s.add_argument("--quadruples", type=int)
    s.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    return p


def _config(args, kind):
    overrides = [_override(t) for t in args.set]
    for attr, section, key in (("N", "system", "n"), ("K", "system", "k"), ("t_end", "system", "t_end"),
                               ("replicas", "system", "replicas"), ("samples", "diagnostics", "samples"),
                               ("quadruples", "diagnostics", "quadruples")):
        val = getattr(args, attr, None)
        if val is not None:
            overrides.append((section, key, repr(val)))
    return load_config(args.config, kind, overrides, seed=args.seed, out=args.out)


def cmd_experiment(args) -> int:
    cfg = _config(args, args.command)
    if not cfg.out:
        raise ConfigError("no output directory: pass --out or set [output] dir")
    workers = worker_count(args.workers)
    t0 = time.perf_counter()
    result = run_experiment(cfg, workers)
    files = render_result(cfg, result)
    write_files(cfg.out, files)
    log.info("%s finished in %.1fs; wrote %d files to %s", cfg.kind, time.perf_counter() - t0, len(files), cfg.out)
    if result.fit is not None:
        f = result.fit
        print(f"slope {fmt(f.slope)} +/- {f.slope_se:.3g} (r^2 {f.r_squared:.4f}, {f.n_points} points)")
    if cfg.kind == "equilibrate":
        print("converged" if result.extra["converged"] else "not converged")
    return EXIT_OK


def cmd_w2(args) -> int:
    clouds = []
    for path in (args.file_a, args.file_b):
        try:
            clouds.append(read_cloud(path))
        except OSError as exc:
            raise InputError(f"cannot read point cloud {path}: {exc.strerror or exc}") from None
        except ValueError as exc:
            raise InputError(f"malformed point cloud {path}: {exc}") from None
    print(fmt(w2_squared(*clouds)))
    return EXIT_OK


def cmd_diagnostics(args) -> int:
    cfg = _config(args, "diagnostics")
    report = diagnostics(cfg)
    for line in report.lines():
        print(line)
    if cfg.out:
        rows = "".join(f"{c.name}\t{int(c.passed)}\t{fmt(c.worst)}\t{c.samples}\n" for c in report.checks)
        write_files(cfg.out, {"plotdata/diagnostics.tsv": "check\tpassed\tworst\tsamples\n" + rows,
                              "meta.json": render_meta(cfg, extra={"passed": report.passed})})
    return EXIT_OK if report.passed else EXIT_DIAGNOSTICS


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    logging.captureWarnings(True)
    handler = {"w2": cmd_w2, "diagnostics": cmd_diagnostics}.get(args.command, cmd_experiment)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return handler(args)
    except (ConfigError, ParameterError) as exc:
        print(f"kacsim: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TransportError, RuntimeError, ValueError, OSError) as exc:
        print(f"kacsim: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
