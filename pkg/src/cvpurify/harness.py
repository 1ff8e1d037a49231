"""Experiment execution: single runs and parameter sweeps."""
from __future__ import annotations

import hashlib
import itertools
import json
import logging
import math

from . import _rng
from .calibration import calibrate_vp
from .config import ExperimentConfig, normalize_grid
from .exceptions import CVPurifyError
from .io import RESULT_COLUMNS, write_results_csv
from .protocol import iterate_purify

__all__ = ["calibrate_vp", "run", "sweep", "grid_points", "point_seed"]

log = logging.getLogger(__name__)

SWEEP_STREAM = 1000


def _execute(config: ExperimentConfig, seed, threads: int):
    return iterate_purify(
        config.state,
        config.noise,
        config.rounds,
        config.rules,
        config.n,
        seed,
        loss=config.loss,
        threads=threads,
        compute_log_negativity=config.log_negativity,
    )


def run(config: ExperimentConfig, out=None, threads: int = 1):
    """Run one experiment and return one :class:`RunResult` per round (round 0 first).

    The CSV goes to ``out``, else to ``config.output``, else nowhere.
    Results depend only on ``config`` (including its seed), never on ``threads``.
    """
    log.info("run: %s, sigma=%s, rounds=%d, n=%d, seed=%d", config.state, config.noise.sigma,
             config.rounds, config.n, config.seed)
    rows = _execute(config, config.seed, threads)
    path = out or config.output
    if path:
        write_results_csv(rows, path)
    return rows


def grid_points(grid: dict) -> list[dict]:
    """Cartesian product of a sweep grid, ``sigma`` varying slowest."""
    grid = normalize_grid(grid)
    axes = list(grid)
    return [dict(zip(axes, combo)) for combo in itertools.product(*(grid[a] for a in axes))]


def point_seed(base_seed: int, point: dict) -> tuple:
    """Seed key of a sweep point, derived from the point's values alone.

    Removing or reordering other grid points leaves it unchanged.
    """
    canonical = json.dumps({k: repr(float(v)) for k, v in point.items()}, sort_keys=True)
    digest = int.from_bytes(hashlib.sha256(canonical.encode()).digest()[:8], "big")
    return _rng.derive(base_seed, SWEEP_STREAM, digest)


def _error_row(config, point, exc):
    row = dict.fromkeys(RESULT_COLUMNS)
    row["sigma"] = float(point.get("sigma", config.noise.sigma))
    rule = config.rules[-1] if config.rounds else None
    row["rate_target"] = float(point.get("rate", rule.rate_or_nan if rule else math.nan))
    row["X"] = float(point.get("X", math.nan))
    row["seed"] = config.seed
    row["n"] = config.n
    row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep(config: ExperimentConfig, grid: dict | None = None, out=None, threads: int = 1):
    """Run every grid point and return one row (final round) per point, in grid order.

    Failing points produce a row whose ``error`` column holds the message;
    the sweep carries on.
    """
    grid = grid if grid is not None else config.sweep
    if not grid:
        raise CVPurifyError("sweep needs a non-empty grid")
    rows = []
    for point in grid_points(grid):
        try:
            cfg = config.with_point(point)
            result = _execute(cfg, point_seed(config.seed, point), threads)[-1]
            row = result.as_dict()
            row["error"] = ""
        except (CVPurifyError, ValueError) as exc:
            log.warning("sweep point %s failed: %s", point, exc)
            row = _error_row(config, point, exc)
        rows.append(row)
    path = out or config.output
    if path:
        write_results_csv(rows, path)
    return rows
