"""Experiment configuration (JSON, versioned, unknown keys rejected)."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .calibration import calibrate_vp
from .channels import BANDLIMITED, GAUSSIAN_IID, LossSpec, PhaseNoiseSpec
from .exceptions import ConfigError, CVPurifyError
from .phase_space import SqueezedStateSpec, spec_from_db
from .protocol import THRESHOLD, TARGET_RATE, SelectionRule

SCHEMA = "cvpurify.experiment/1"
MIN_SAMPLES = 10_000
DEFAULT_N = 1_000_000

# measured squeezing without phase noise, and the variance product at sigma = 0.304
DEFAULT_SQUEEZE_DB = 3.55
DEFAULT_CALIBRATION = {"sigma": 0.304, "product": 7.6}

SWEEP_AXES = ("sigma", "rate", "X")


@dataclass(frozen=True)
class ExperimentConfig:
    state: SqueezedStateSpec
    noise: PhaseNoiseSpec
    selection: tuple
    rounds: int = 1
    n: int = DEFAULT_N
    seed: int = 0
    loss: tuple = (None, None)
    output: str | None = None
    log_negativity: bool = False
    sweep: dict | None = None

    def __post_init__(self):
        if self.n < MIN_SAMPLES:
            raise ConfigError(f"n must be >= {MIN_SAMPLES}, got {self.n}")
        if self.rounds < 0:
            raise ConfigError(f"rounds must be >= 0, got {self.rounds}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if len(self.selection) not in (1, max(self.rounds, 1)):
            raise ConfigError(
                f"selection must be a single rule or one per round ({self.rounds}), "
                f"got {len(self.selection)}"
            )

    @property
    def rules(self) -> list:
        if len(self.selection) == 1:
            return [self.selection[0]] * self.rounds
        return list(self.selection)

    def with_point(self, point: dict) -> "ExperimentConfig":
        """Copy with ``sigma``, ``rate`` and/or ``X`` overridden."""
        cfg = self
        if "sigma" in point:
            cfg = replace(cfg, noise=replace(cfg.noise, sigma=float(point["sigma"])))
        if "rate" in point:
            cfg = replace(cfg, selection=(SelectionRule.target_rate(point["rate"]),))
        if "X" in point:
            cfg = replace(cfg, selection=(SelectionRule.threshold(point["X"]),))
        return replace(cfg, sweep=None)


def _reject_unknown(d: dict, allowed, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object, got {type(d).__name__}")
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")


def _number(d, key, where, default=None):
    if key not in d:
        if default is None:
            raise ConfigError(f"{where}: missing {key!r}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}.{key}: expected a finite number, got {v!r}")
    return float(v)


def _parse_state(d) -> SqueezedStateSpec:
    if d is None:
        d = {"squeeze_db": DEFAULT_SQUEEZE_DB, "calibrate": dict(DEFAULT_CALIBRATION)}
    _reject_unknown(d, {"vx", "vp", "squeeze_db", "antisqueeze_db", "calibrate"}, "state")
    if "vx" in d or "vp" in d:
        if set(d) != {"vx", "vp"}:
            raise ConfigError("state: give either vx/vp or dB values, not both")
        return SqueezedStateSpec(_number(d, "vx", "state"), _number(d, "vp", "state"))
    squeeze_db = _number(d, "squeeze_db", "state")
    if "antisqueeze_db" in d:
        if "calibrate" in d:
            raise ConfigError("state: antisqueeze_db and calibrate are mutually exclusive")
        return spec_from_db(squeeze_db, _number(d, "antisqueeze_db", "state"))
    cal = d.get("calibrate", DEFAULT_CALIBRATION)
    _reject_unknown(cal, {"sigma", "product"}, "state.calibrate")
    vx = 10 ** (-squeeze_db / 10)
    vp = calibrate_vp(vx, _number(cal, "sigma", "state.calibrate"),
                      _number(cal, "product", "state.calibrate"))
    return SqueezedStateSpec(vx, vp)


def _parse_noise(d) -> PhaseNoiseSpec:
    if d is None:
        raise ConfigError("noise: missing")
    _reject_unknown(d, {"kind", "sigma", "band", "fs"}, "noise")
    kind = d.get("kind", GAUSSIAN_IID)
    sigma = _number(d, "sigma", "noise")
    if kind == BANDLIMITED:
        band = d.get("band")
        if not (isinstance(band, list) and len(band) == 2):
            raise ConfigError("noise.band: expected [f_lo, f_hi]")
        return PhaseNoiseSpec(sigma, kind, tuple(band), _number(d, "fs", "noise"))
    if "band" in d or "fs" in d:
        raise ConfigError("noise: band/fs only apply to kind='bandlimited'")
    return PhaseNoiseSpec(sigma, kind)


def _parse_rule(d) -> SelectionRule:
    _reject_unknown(d, {"mode", "X", "rate"}, "selection")
    mode = d.get("mode", TARGET_RATE)
    stray = {THRESHOLD: "rate", TARGET_RATE: "X"}.get(mode)
    if stray in d:
        raise ConfigError(f"selection: {stray!r} does not apply to mode {mode!r}")
    if mode == THRESHOLD:
        return SelectionRule.threshold(_number(d, "X", "selection"))
    if mode == TARGET_RATE:
        return SelectionRule.target_rate(_number(d, "rate", "selection"))
    raise ConfigError(f"selection.mode: unknown mode {mode!r}")


def _parse_loss(d):
    if d is None:
        return (None, None)
    _reject_unknown(d, {"eta", "a", "b"}, "loss")
    if "eta" in d:
        if set(d) != {"eta"}:
            raise ConfigError("loss: give either eta or per-arm a/b")
        spec = LossSpec(_number(d, "eta", "loss"))
        return (spec, spec)
    out = []
    for arm in ("a", "b"):
        sub = d.get(arm)
        if sub is None:
            out.append(None)
        else:
            _reject_unknown(sub, {"eta"}, f"loss.{arm}")
            out.append(LossSpec(_number(sub, "eta", f"loss.{arm}")))
    return tuple(out)


def _parse_sweep(d):
    if d is None:
        return None
    _reject_unknown(d, SWEEP_AXES, "sweep")
    return normalize_grid(d)


def normalize_grid(grid: dict) -> dict:
    if not grid:
        raise ConfigError("sweep grid is empty")
    if "rate" in grid and "X" in grid:
        raise ConfigError("sweep over rate and X at once is ambiguous")
    out = {}
    for axis in SWEEP_AXES:
        if axis in grid:
            values = grid[axis]
            if not isinstance(values, list) or not values:
                raise ConfigError(f"sweep.{axis}: expected a non-empty list")
            out[axis] = [float(v) for v in values]
    return out


def config_from_dict(d: dict) -> ExperimentConfig:
    """Validate a parsed JSON document and build an :class:`ExperimentConfig`."""
    allowed = {"schema", "state", "noise", "loss", "selection", "rounds", "n", "seed",
               "output", "log_negativity", "sweep"}
    _reject_unknown(d, allowed, "config")
    if d.get("schema") != SCHEMA:
        raise ConfigError(f"config: schema must be {SCHEMA!r}, got {d.get('schema')!r}")
    sel = d.get("selection", {"mode": TARGET_RATE, "rate": 0.5})
    for key in ("rounds", "n", "seed"):
        if key in d and (isinstance(d[key], bool) or not isinstance(d[key], int)):
            raise ConfigError(f"config.{key}: expected an integer, got {d[key]!r}")
    try:
        rules = tuple(_parse_rule(s) for s in sel) if isinstance(sel, list) else (_parse_rule(sel),)
        return ExperimentConfig(
            state=_parse_state(d.get("state")),
            noise=_parse_noise(d.get("noise")),
            selection=rules,
            rounds=d.get("rounds", 1),
            n=d.get("n", DEFAULT_N),
            seed=d.get("seed", 0),
            loss=_parse_loss(d.get("loss")),
            output=d.get("output"),
            log_negativity=bool(d.get("log_negativity", False)),
            sweep=_parse_sweep(d.get("sweep")),
        )
    except CVPurifyError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(doc)
