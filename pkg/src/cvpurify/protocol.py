"""Two-copy purification: beam-splitter mixing and homodyne post-selection.

Both quadratures of every surviving mode-II sample are kept. This is only
legitimate because the joint Wigner function of the two output modes is a
true probability density for every state this package produces (Gaussian
states, random rotations of them, and selections thereof): the samples then
reproduce any homodyne marginal and every symmetrically ordered moment. It
would be wrong for states with negative Wigner functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .channels import LossSpec, PhaseNoiseSpec, apply_loss, apply_phase_noise
from .exceptions import EmptySelectionError, SurvivorStarvationError
from .phase_space import Ensemble, SqueezedStateSpec, sample_squeezed
from .results import RunResult, summarize
from .stats import VarianceEstimate, covariance4, log_negativity, variance_with_se

SQRT_HALF = math.sqrt(0.5)
THRESHOLD = "threshold"
TARGET_RATE = "target_rate"


@dataclass(frozen=True, eq=False)
class TwoModeEnsemble:
    """Paired samples ``(x_I, p_I, x_II, p_II)`` of the two splitter outputs."""

    rows: np.ndarray
    provenance: tuple = field(default_factory=tuple)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != 4 or rows.shape[0] == 0:
            raise ValueError(f"rows must have shape (n > 0, 4), got {rows.shape}")
        if rows is self.rows and rows.flags.writeable:
            rows = rows.copy()
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def x_I(self):
        return self.rows[:, 0]

    @property
    def p_I(self):
        return self.rows[:, 1]

    @property
    def x_II(self):
        return self.rows[:, 2]

    @property
    def p_II(self):
        return self.rows[:, 3]

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class SelectionRule:
    """Keep rows with ``|x_I| <= X``, or choose ``X`` to keep a target fraction."""

    mode: str = TARGET_RATE
    X: float | None = None
    rate: float | None = None

    def __post_init__(self):
        if self.mode == THRESHOLD:
            if self.X is None or not self.X >= 0:
                raise ValueError(f"threshold rule needs X >= 0, got {self.X}")
        elif self.mode == TARGET_RATE:
            if self.rate is None or not 0 < self.rate <= 1:
                raise ValueError(f"target_rate rule needs 0 < rate <= 1, got {self.rate}")
        else:
            raise ValueError(f"unknown selection mode {self.mode!r}")

    @classmethod
    def threshold(cls, X: float) -> "SelectionRule":
        return cls(THRESHOLD, X=float(X))

    @classmethod
    def target_rate(cls, rate: float) -> "SelectionRule":
        return cls(TARGET_RATE, rate=float(rate))

    @property
    def rate_or_nan(self) -> float:
        return self.rate if self.mode == TARGET_RATE else float("nan")


@dataclass(frozen=True)
class ModeStats:
    var_x: VarianceEstimate
    var_p: VarianceEstimate

    @classmethod
    def of(cls, ens: Ensemble) -> "ModeStats":
        return cls(variance_with_se(ens.x), variance_with_se(ens.p))

    @property
    def variance_product(self) -> float:
        return self.var_x.value * self.var_p.value


@dataclass(frozen=True, eq=False)
class PurifiedResult:
    survivors: Ensemble
    survival_rate: float
    threshold_used: float
    n_input: int
    input_stats: ModeStats
    output_stats: ModeStats


def beam_split(ens_a: Ensemble, ens_b: Ensemble) -> TwoModeEnsemble:
    """Mix two independent copies on a 50/50 beam splitter.

    Row ``i`` is ``((a + b) / sqrt 2, (a - b) / sqrt 2)`` applied to both
    quadratures, with output I first.
    """
    if ens_a.n != ens_b.n:
        raise ValueError(f"ensemble sizes differ: {ens_a.n} != {ens_b.n}")
    if ens_a.seed and ens_a.seed == ens_b.seed:
        raise ValueError(f"both copies come from seed {ens_a.seed}; copies must be independent")
    a, b = ens_a.points, ens_b.points
    rows = np.empty((ens_a.n, 4))
    rows[:, 0:2] = (a + b) * SQRT_HALF
    rows[:, 2:4] = (a - b) * SQRT_HALF
    return TwoModeEnsemble(rows, provenance=(f"beam_split({ens_a.seed}, {ens_b.seed})",))


def _rank_for_rate(rate, n):
    return max(1, min(n, int(math.floor(rate * n + 0.5))))


def threshold_from_rate(tm: TwoModeEnsemble, rate: float) -> float:
    """Threshold on ``|x_I|`` that keeps ``round(rate * n)`` rows (at least one)."""
    if not 0 < rate <= 1:
        raise ValueError(f"rate must lie in (0, 1], got {rate}")
    a = np.abs(tm.x_I)
    k = _rank_for_rate(rate, a.size)
    return float(np.partition(a, k - 1)[k - 1])


def condition(tm: TwoModeEnsemble, rule: SelectionRule) -> PurifiedResult:
    """Keep mode II of every row with ``|x_I| <= X`` (ties accepted)."""
    X = rule.X if rule.mode == THRESHOLD else threshold_from_rate(tm, rule.rate)
    keep = np.abs(tm.x_I) <= X
    count = int(np.count_nonzero(keep))
    if count == 0:
        raise EmptySelectionError(f"threshold X={X!r} keeps none of {tm.n} rows")
    mode_ii = tm.rows[:, 2:4]
    survivors = Ensemble(
        mode_ii[keep],
        seed=(),
        provenance=tm.provenance + (f"condition(|x_I| <= {X!r})",),
    )
    return PurifiedResult(
        survivors=survivors,
        survival_rate=count / tm.n,
        threshold_used=X,
        n_input=tm.n,
        input_stats=ModeStats.of(Ensemble(mode_ii)),
        output_stats=ModeStats.of(survivors),
    )


def _with_seed(result: PurifiedResult, seed) -> PurifiedResult:
    survivors = Ensemble(result.survivors.points, seed=seed, provenance=result.survivors.provenance)
    return PurifiedResult(survivors, result.survival_rate, result.threshold_used,
                          result.n_input, result.input_stats, result.output_stats)


def purify_round(ens_a: Ensemble, ens_b: Ensemble, rule: SelectionRule) -> PurifiedResult:
    """One purification step: :func:`beam_split` then :func:`condition`.

    ``input_stats`` describe copy A; survivors inherit copy A's seed record.
    """
    res = condition(beam_split(ens_a, ens_b), rule)
    res = _with_seed(res, ens_a.seed)
    return PurifiedResult(res.survivors, res.survival_rate, res.threshold_used,
                          res.n_input, ModeStats.of(ens_a), res.output_stats)


def prepare_arm(spec: SqueezedStateSpec, noise: PhaseNoiseSpec, n: int, seed, index: int,
                loss: LossSpec | None = None, threads: int = 1) -> Ensemble:
    """Generate copy number ``index`` of a phase-diffused (and optionally lossy) state.

    Copies with different ``index`` use disjoint substreams of ``seed``.
    """
    ens = sample_squeezed(spec, n, _rng.derive(seed, _rng.STATE, index), threads=threads)
    ens = apply_phase_noise(ens, noise, _rng.derive(seed, _rng.PHASE, index), threads=threads)
    if loss is not None:
        ens = apply_loss(ens, loss, _rng.derive(seed, _rng.LOSS, index), threads=threads)
    return ens


def _shuffled(ens: Ensemble, seed) -> Ensemble:
    perm = _rng.generator(seed).permutation(ens.n)
    return Ensemble(ens.points[perm], seed=ens.seed, provenance=ens.provenance + (f"shuffle({seed})",))


def _per_round_rules(rules, rounds):
    if isinstance(rules, SelectionRule):
        return [rules] * rounds
    rules = list(rules)
    if len(rules) != rounds:
        raise ValueError(f"need {rounds} selection rules, got {len(rules)}")
    return rules


def _check_expected_survivors(rules, n, min_survivors):
    expected = float(n)
    for k, rule in enumerate(rules, start=1):
        if rule.mode != TARGET_RATE:
            return
        expected *= rule.rate
        if expected < min_survivors:
            raise SurvivorStarvationError(k, int(expected), min_survivors)


def iterate_purify(spec: SqueezedStateSpec, noise: PhaseNoiseSpec, rounds: int, rules, n: int,
                   seed, loss=None, threads: int = 1, min_survivors: int = 1000,
                   compute_log_negativity: bool = False) -> list[RunResult]:
    """Run ``rounds`` iterations of two-copy purification.

    Round ``k`` consumes two independent outputs of round ``k - 1``; the
    round-0 states are ``2**rounds`` independently prepared copies
    (:func:`prepare_arm` with index ``j``). From round 2 on, survivors are
    shuffled with their own substreams and paired by index, truncating to the
    shorter ensemble. Results follow the leftmost branch of the tree: entry
    ``k`` compares the copy-A input of the round-``k`` step with its
    survivors, and entry 0 describes copy 0 alone, so the list has
    ``rounds + 1`` entries.

    Args:
        spec: input squeezed state.
        noise: phase noise applied to every copy.
        rounds: number of purification rounds (>= 0).
        rules: one :class:`SelectionRule` for all rounds, or one per round.
        n: samples per initial copy.
        seed: root seed.
        loss: optional :class:`LossSpec`, or a pair for even/odd copies.
        threads: worker threads for sample generation; never changes results.
        min_survivors: every step must keep at least this many samples.
        compute_log_negativity: also report the Gaussian-approximation log
            negativity of the unconditioned splitter output.

    Raises:
        SurvivorStarvationError: a round (named in the error) kept too few samples.
    """
    if rounds < 0:
        raise ValueError(f"rounds must be >= 0, got {rounds}")
    key = _rng.seed_key(seed)
    rules = _per_round_rules(rules, rounds)
    _check_expected_survivors(rules, n, min_survivors)
    losses = loss if isinstance(loss, (tuple, list)) else (loss, loss)

    def leaf(index):
        return prepare_arm(spec, noise, n, key, index, loss=losses[index % 2], threads=threads)

    results: dict[int, RunResult] = {}

    def build(level, index):
        if level == 0:
            ens = leaf(index)
            if index == 0:
                results[0] = summarize(
                    ens, ens, round_index=0, sigma=noise.sigma, threshold=math.inf,
                    survival_rate=1.0, rate_target=float("nan"), seed=key, n=n,
                )
            return ens
        a = build(level - 1, 2 * index)
        b = build(level - 1, 2 * index + 1)
        if level >= 2:
            a = _shuffled(a, _rng.derive(key, _rng.SHUFFLE, level, 2 * index))
            b = _shuffled(b, _rng.derive(key, _rng.SHUFFLE, level, 2 * index + 1))
            m = min(a.n, b.n)
            a = Ensemble(a.points[:m], seed=a.seed, provenance=a.provenance)
            b = Ensemble(b.points[:m], seed=b.seed, provenance=b.provenance)
        rule = rules[level - 1]
        tm = beam_split(a, b)
        res = _with_seed(condition(tm, rule), a.seed)
        if res.survivors.n < min_survivors:
            raise SurvivorStarvationError(level, res.survivors.n, min_survivors)
        if index == 0:
            e_n = log_negativity(covariance4(tm)) if compute_log_negativity else float("nan")
            results[level] = summarize(
                a, res.survivors, round_index=level, sigma=noise.sigma,
                threshold=res.threshold_used, survival_rate=res.survival_rate,
                rate_target=rule.rate_or_nan, seed=key, n=n, log_negativity=e_n,
            )
        return res.survivors

    build(rounds, 0)
    return [results[k] for k in range(rounds + 1)]
