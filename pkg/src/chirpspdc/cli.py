"""Command-line interface: run, sweep, validate.

Exit codes: 0 success, 2 configuration error, 3 convergence/grid
failure, 4 I/O error.  CHIRPSPDC_OUT sets the default output directory.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, parse_config_file
from .runner import (RunFailure, RunRequest, SweepRequest, SWEEP_AXES,
                     run_single, run_sweep)
from . import schmidt

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4

ENV_OUT_DIR = "CHIRPSPDC_OUT"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chirpspdc",
        description="Spatial entanglement of photon pairs from chirped "
                    "quasi-phase-matched down-conversion")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_out=True):
        p.add_argument("--config", required=True, help="key = value config file")
        if with_out:
            p.add_argument("--out", default=None,
                           help=f"output directory (default: ${ENV_OUT_DIR} or cwd)")
            p.add_argument("--workers", type=int, default=1,
                           help="parallel worker count (results are "
                                "worker-count independent)")
            p.add_argument("--no-converge", action="store_true",
                           help="skip the grid-doubling convergence gate")

    common(sub.add_parser("run", help="single configuration"))
    sweep = sub.add_parser("sweep", help="sweep one parameter axis")
    common(sweep)
    sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sweep.add_argument("--values", required=True,
                       help="comma-separated, strictly increasing")
    common(sub.add_parser("validate",
                          help="parse + grid feasibility, no computation"),
           with_out=False)
    return parser


def _out_dir(args) -> str:
    return args.out or os.environ.get(ENV_OUT_DIR) or os.getcwd()


def _cmd_run(args) -> int:
    parsed = parse_config_file(args.config)
    req = RunRequest(parsed=parsed, workers=args.workers,
                     converge=not args.no_converge)
    report = run_single(req, _out_dir(args))
    conv = report.diagnostics.get("converged")
    print(f"E = {report.E:.6g} ebits, K = {report.K:.6g}, "
          f"l_max = {report.diagnostics['l_cut']}, "
          f"converged = {conv}")
    return EXIT_OK if conv is not False else EXIT_CONVERGENCE


def _cmd_sweep(args) -> int:
    parsed = parse_config_file(args.config)
    try:
        values = tuple(float(v) for v in args.values.split(","))
    except ValueError:
        raise ConfigError(f"--values {args.values!r} is not a comma-separated "
                          "list of numbers") from None
    try:
        req = SweepRequest(
            base=RunRequest(parsed=parsed, workers=args.workers,
                            converge=not args.no_converge),
            axis=args.axis, values=values, parallelism=args.workers)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = run_sweep(req, _out_dir(args))
    failed = [r for r in rows if "error" in r]
    for r in failed:
        print(f"point {r['axis_value']:g} failed: {r['error']}", file=sys.stderr)
    print(f"sweep complete: {len(rows) - len(failed)}/{len(rows)} points ok")
    return EXIT_CONVERGENCE if failed else EXIT_OK


def _cmd_validate(args) -> int:
    parsed = parse_config_file(args.config)
    cfg = parsed.cfg
    p_max = parsed.p_max or schmidt.default_p_max(cfg)
    n_phi = parsed.n_phi or schmidt.default_n_phi(cfg, p_max)
    n_radial = parsed.n_radial or schmidt.default_n_radial(cfg)
    # feasibility only: grid construction runs all structural invariants
    schmidt.RadialGrid.build(n_radial, p_max)
    if n_phi < 4 or n_phi & (n_phi - 1):
        raise ConfigError("grid.n_phi must be a power of two >= 4")
    print(f"ok: alpha = {cfg.alpha:g} um^-2, p_max = {p_max:.6g} um^-1, "
          f"n_radial = {n_radial}, n_phi = {n_phi}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "sweep": _cmd_sweep, "validate": _cmd_validate}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RunFailure, schmidt.AliasingError, schmidt.TailMassError) as exc:
        print(f"convergence/grid failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
