"""Command-line interface.

Subcommands::

    cvpurify simulate --config run.json [--seed N] [--out results.csv]
    cvpurify sweep --config run.json --grid "sigma=0,0.1,0.2;rate=0.5" [--out sweep.csv]
    cvpurify wigner --vx 0.1 --vp 10 --sigma 0.523 --grid 256,256,18 --out wigner.csv
    cvpurify calibrate --vx 0.4416 --sigma 0.304 --product 7.6

Every subcommand accepts ``--threads N``, which never changes results.
Errors exit non-zero with a JSON object on stderr.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

import numpy as np

from .calibration import calibrate_vp
from .config import load_config
from .exceptions import ConfigError
from .harness import run, sweep
from .io import results_to_csv, wigner_to_csv, write_wigner_csv
from .phase_space import SqueezedStateSpec, db_of
from .wigner import GridGeometry, wigner_diffused_grid


def parse_grid_spec(text: str) -> dict:
    """Parse ``"sigma=0,0.1;rate=0.1:1.0:10"`` into a sweep grid.

    ``a:b:k`` expands to ``k`` evenly spaced values from ``a`` to ``b``.
    """
    grid = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        if "=" not in part:
            raise ConfigError(f"grid entry {part!r} is not axis=values")
        axis, values = (s.strip() for s in part.split("=", 1))
        if ":" in values:
            try:
                start, stop, count = values.split(":")
                grid[axis] = [float(v) for v in np.linspace(float(start), float(stop), int(count))]
            except ValueError as exc:
                raise ConfigError(f"bad range {values!r}; expected start:stop:count") from exc
        else:
            try:
                grid[axis] = [float(v) for v in values.split(",")]
            except ValueError as exc:
                raise ConfigError(f"bad value list {values!r}") from exc
    return grid


def _parse_wigner_grid(text):
    try:
        nx, np_, extent = text.split(",")
        return int(nx), int(np_), float(extent)
    except ValueError as exc:
        raise ConfigError(f"--grid expects nx,np,extent, got {text!r}") from exc


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    rows = run(cfg, out=None, threads=args.threads)
    _emit(results_to_csv(rows), args.out or cfg.output)


def cmd_sweep(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    grid = parse_grid_spec(args.grid) if args.grid else None
    rows = sweep(cfg, grid=grid, out=None, threads=args.threads)
    _emit(results_to_csv(rows), args.out or cfg.output)


def cmd_wigner(args):
    nx, np_, extent = _parse_wigner_grid(args.grid)
    grid = wigner_diffused_grid(SqueezedStateSpec(args.vx, args.vp), args.sigma,
                                GridGeometry.square(extent, nx, np_))
    if args.out:
        write_wigner_csv(grid, args.out)
    else:
        sys.stdout.write(wigner_to_csv(grid))


def cmd_calibrate(args):
    vp = calibrate_vp(args.vx, args.sigma, args.product)
    json.dump({"vx": args.vx, "vp": vp, "squeeze_db": -db_of(args.vx),
               "antisqueeze_db": db_of(vp), "sigma": args.sigma, "product": args.product},
              sys.stdout)
    sys.stdout.write("\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker threads (results unchanged)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="cvpurify", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run one experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common], help="sweep sigma, rate or X")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", help='e.g. "sigma=0,0.1,0.2;rate=0.1:1:10" (default: config sweep)')
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("wigner", parents=[common], help="phase-diffused Wigner function on a grid")
    p.add_argument("--vx", type=float, required=True)
    p.add_argument("--vp", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--grid", required=True, help="nx,np,extent")
    p.add_argument("--out")
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("calibrate", parents=[common], help="fit vp to a variance product")
    p.add_argument("--vx", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--product", type=float, required=True)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        args.threads = 1
    try:
        args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        sys.stderr.write(json.dumps(payload) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
