"""Adversarial extension from sample labels to a whole-space function.

Regression: drop the highest-slope epsilon mass of the sample, build an
epsilon-net of the remainder, extend from the net. The distortion, Lipschitz
and weak-distortion guarantees proved for this construction are checked on
every call:

    ||f - y||_L1(mu_n) <= 3 eps max(1, strong mean of y)
    lip(f) <= 2 (weak mean of y) / eps
    ||f - y||_L1(mu_n) <= eps + 2 eps (1 + ln(2/eps)) (weak mean of y)

Classification: extend from the full sample (labels stay exact on it).

The game validator stands in for an ambient (Omega, mu) with a dense
weighted grid, samples from it with replacement, lets an adversary label the
sample, and measures how far the extension's average slope over the ambient
drifts from the sample's. Those ratios are probabilistic: they are reported,
never hard-asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EpsilonOutOfRange, InvalidParameters, WeakMeanTooLarge
from .metric_core import FiniteMetricSpace, LabeledSample, WeightedSample
from .nets import build_net
from .pmse import Extender, build_extender, pmse_extend
from .slope import profile
from .synthetic import sawtooth

__all__ = [
    "ExtensionGuarantees",
    "ExtensionResult",
    "extend_regression",
    "extend_classification",
    "round_to_label",
    "GameConfig",
    "GameStatistics",
    "validate_extension_game",
]


@dataclass(frozen=True)
class ExtensionGuarantees:
    sample_distortion: float
    lip_bound: float
    lip_actual: float
    sample_strong_mean: float
    sample_weak_mean: float


@dataclass(frozen=True)
class ExtensionResult:
    extender: Extender
    removed_indices: tuple
    net_indices: tuple
    epsilon: float
    guarantees: ExtensionGuarantees


def extend_regression(labeled: LabeledSample, epsilon: float) -> ExtensionResult:
    """Slope-trimmed net extension with hard-checked deterministic bounds.

    Removal is by mass: highest-slope points drop out (ties toward the
    lowest index) as long as the removed weight stays at most epsilon. With
    uniform weights that is exactly the top floor(eps*n) points.
    """
    if not 0.0 < epsilon < 1.0:
        raise EpsilonOutOfRange(f"epsilon {epsilon} outside (0, 1)")
    space = labeled.space
    n = space.n
    if n < 1.0 / epsilon:
        raise EpsilonOutOfRange(f"need n >= 1/epsilon, got n={n} epsilon={epsilon}")
    y = np.asarray(labeled.labels, dtype=np.float64)
    mu = labeled.weights
    prof = profile(labeled.sample, y)
    order = np.lexsort((np.arange(n), -prof.local))
    removed: list[int] = []
    mass = 0.0
    for i in order:
        if mass + mu[i] > epsilon + 1e-12:
            break
        removed.append(int(i))
        mass += mu[i]
    keep = np.setdiff1d(np.arange(n), np.array(removed, dtype=np.int64))
    net = build_net(space.subspace(keep), epsilon)
    v_global = keep[np.asarray(net.center_indices, dtype=np.int64)]
    v_global.sort()
    ext = build_extender(space, v_global, y[v_global])

    f_sample = pmse_extend(space, v_global, y[v_global])
    distortion = float(np.dot(mu, np.abs(f_sample - y)))
    strong, weak = prof.strong_mean, prof.weak_mean
    lip_bound = 2.0 * weak / epsilon
    lip_actual = ext.lip()
    tol = 1e-9
    assert distortion <= 3.0 * epsilon * max(1.0, strong) + tol
    assert lip_actual <= lip_bound + tol
    assert distortion <= epsilon + 2.0 * epsilon * (1.0 + math.log(2.0 / epsilon)) * weak + tol

    return ExtensionResult(
        extender=ext,
        removed_indices=tuple(removed),
        net_indices=tuple(int(v) for v in v_global),
        epsilon=float(epsilon),
        guarantees=ExtensionGuarantees(
            sample_distortion=distortion,
            lip_bound=lip_bound,
            lip_actual=lip_actual,
            sample_strong_mean=strong,
            sample_weak_mean=weak,
        ),
    )


def extend_classification(labeled: LabeledSample) -> ExtensionResult:
    """Extend binary labels from the whole sample; anchors keep their labels."""
    if labeled.kind != "binary":
        raise InvalidParameters("extend_classification requires binary labels")
    space = labeled.space
    n = space.n
    y = np.asarray(labeled.labels, dtype=np.float64)
    prof = profile(labeled.sample, y)
    if prof.weak_mean > n:
        raise WeakMeanTooLarge(f"weak mean {prof.weak_mean} exceeds n={n}")
    ext = build_extender(space, np.arange(n), y)
    return ExtensionResult(
        extender=ext,
        removed_indices=(),
        net_indices=tuple(range(n)),
        epsilon=0.0,
        guarantees=ExtensionGuarantees(
            sample_distortion=0.0,
            lip_bound=math.inf,
            lip_actual=ext.lip(),
            sample_strong_mean=prof.strong_mean,
            sample_weak_mean=prof.weak_mean,
        ),
    )


def round_to_label(values) -> np.ndarray:
    """Binary decision for classification outputs; the 0.5 tie goes to 1."""
    return (np.asarray(values, dtype=np.float64) >= 0.5).astype(np.float64)


# ---------------------------------------------------------------------------
# the extension game at desk scale


@dataclass(frozen=True)
class GameConfig:
    """Dense-grid ambient standing in for (Omega, mu), plus an adversary."""

    ambient_size: int = 2000
    n: int = 200
    epsilon: float = 0.1
    adversary: str = "sawtooth"  # sawtooth | lipschitz | classification
    seed: int = 0

    def __post_init__(self) -> None:
        if self.ambient_size < 2 or self.n < 1:
            raise InvalidParameters("ambient_size >= 2 and n >= 1 required")
        if not 0.0 < self.epsilon < 1.0:
            raise InvalidParameters("epsilon must lie in (0, 1)")
        if self.adversary not in ("sawtooth", "lipschitz", "classification"):
            raise InvalidParameters(f"unknown adversary {self.adversary!r}")


@dataclass(frozen=True)
class GameStatistics:
    ratios: np.ndarray  # ambient strong mean over sample strong mean, per trial
    weak_ratio_f: np.ndarray  # ambient weak mean over sample weak mean of f
    weak_ratio_y: np.ndarray  # ambient weak mean over sample weak mean of y
    n: int
    adversary: str

    def fraction_at_most(self, bound: float) -> float:
        return float(np.mean(self.ratios <= bound))

    def quantile(self, q: float) -> float:
        return float(np.quantile(self.ratios, q))

    @property
    def log_sq_factor(self) -> float:
        """Largest measured ratio divided by log^2 n (classification scaling)."""
        return float(np.max(self.ratios) / (math.log(self.n) ** 2))


def _adversary_labels(kind: str, coords: np.ndarray, epsilon: float, rng) -> tuple[np.ndarray, str]:
    x = coords[:, 0]
    if kind == "lipschitz":
        phase = rng.uniform(0.0, 1.0)
        return np.clip(0.5 + 0.4 * np.sin(2.0 * math.pi * (x + phase)), 0.0, 1.0), "real01"
    period = 8.0 * epsilon * (1.0 + 0.5 * rng.uniform())
    wave = sawtooth(x + rng.uniform(0.0, period), period)
    if kind == "classification":
        return (wave >= 0.5).astype(np.float64), "binary"
    return wave, "real01"


def validate_extension_game(config: GameConfig, trials: int) -> GameStatistics:
    """Monte-Carlo ratios of ambient to sample average slope.

    Each trial draws n points from the ambient grid with replacement
    (weighting distinct points by multiplicity), labels them adversarially,
    extends, and evaluates the extension on the full grid.
    """
    if trials < 1:
        raise InvalidParameters("trials must be positive")
    lo, hi = 0.0, 1.0
    coords = np.linspace(lo, hi, config.ambient_size).reshape(-1, 1)
    ambient = FiniteMetricSpace(coords=coords)
    ambient_sample = WeightedSample(ambient)

    ratios = np.empty(trials)
    weak_f = np.empty(trials)
    weak_y = np.empty(trials)
    for trial in range(trials):
        rng = np.random.default_rng(config.seed + 7919 * trial)
        draws = rng.integers(0, config.ambient_size, size=config.n)
        distinct, counts = np.unique(draws, return_counts=True)
        sub = ambient.subspace(distinct)
        weights = counts / config.n
        y, kind = _adversary_labels(config.adversary, sub.coords, config.epsilon, rng)
        labeled = LabeledSample(WeightedSample(sub, weights), y, kind=kind)
        if config.adversary == "classification":
            res = extend_classification(labeled)
        else:
            res = extend_regression(labeled, config.epsilon)
        f_ambient = res.extender.eval_coords(coords)
        amb_prof = profile(ambient_sample, f_ambient)
        smp_prof = profile(labeled.sample, y)
        f_smp_prof = profile(labeled.sample, f_ambient[distinct])
        denom = max(smp_prof.strong_mean, 1e-12)
        ratios[trial] = amb_prof.strong_mean / denom
        weak_f[trial] = amb_prof.weak_mean / max(f_smp_prof.weak_mean, 1e-12)
        weak_y[trial] = amb_prof.weak_mean / max(smp_prof.weak_mean, 1e-12)
    return GameStatistics(
        ratios=ratios,
        weak_ratio_f=weak_f,
        weak_ratio_y=weak_y,
        n=config.n,
        adversary=config.adversary,
    )
