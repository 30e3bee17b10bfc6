"""Closed-form covering, deviation, and generalization bounds.

Every calculator reproduces its printed algebraic form exactly, using the
natural logarithm, and returns a BoundReport so callers can see the inputs
and whether a nonpositive log was clamped to zero. Nothing here estimates:
the one empirical tool, `empirical_cover_estimate`, is a greedy cover of an
explicit function bank used to sanity-check the analytic bounds at desk
scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, SolverFailure
from .slope import profile

__all__ = [
    "BoundReport",
    "lip_cover_bound",
    "ambient_cover_bound",
    "empirical_cover_bound",
    "eps0_from",
    "distance_additive_term",
    "generalization_bound",
    "tv_bound",
    "weak_strong_log_check",
    "empirical_cover_estimate",
    "sample_weak_class",
]


@dataclass(frozen=True)
class BoundReport:
    name: str
    inputs: dict = field(default_factory=dict)
    value: float = 0.0
    clamped: bool = False
    notes: str = ""

    def __post_init__(self) -> None:
        if not (self.value >= 0.0):
            raise InvalidParameter(f"bound {self.name} produced negative value {self.value}")

    def __float__(self) -> float:
        return self.value


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidParameter(msg)


def lip_cover_bound(t: float, L: float, d: float, diam: float = 1.0) -> BoundReport:
    """log-covering bound (16 L diam / t)^d ln(8/t) for the Lipschitz ball."""
    _require(t > 0 and L > 0 and d > 0 and diam > 0, "t, L, d, diam must be positive")
    log_term = math.log(8.0 / t)
    inputs = {"t": t, "L": L, "d": d, "diam": diam}
    if log_term <= 0.0:
        return BoundReport("lip_cover", inputs, 0.0, clamped=True, notes="log(8/t) <= 0")
    value = (16.0 * L * diam / t) ** d * log_term
    return BoundReport("lip_cover", inputs, value)


def ambient_cover_bound(t: float, L: float, d: float, diam: float = 1.0) -> BoundReport:
    """log-covering bound (128 L / t^3)^d ln(16/t); stated for diam <= 1."""
    _require(t > 0 and L > 0 and d > 0, "t, L, d must be positive")
    _require(0 < diam <= 1.0, "formula assumes diam <= 1; rescale the space first")
    log_term = math.log(16.0 / t)
    inputs = {"t": t, "L": L, "d": d, "diam": diam}
    if log_term <= 0.0:
        return BoundReport("ambient_cover", inputs, 0.0, clamped=True, notes="log(16/t) <= 0")
    value = (128.0 * L / t**3) ** d * log_term
    return BoundReport("ambient_cover", inputs, value)


def eps0_from(n: int, L: float, d: float, c_delta: float = 1.0) -> float:
    """Resolution scale C_delta sqrt(L) n^(-1/8d) used by the empirical bound."""
    _require(n >= 1 and L >= 0 and d > 0 and c_delta > 0, "bad eps0 inputs")
    return c_delta * math.sqrt(L) * float(n) ** (-1.0 / (8.0 * d))


def empirical_cover_bound(alpha: float, eps0: float, L: float, d: float) -> BoundReport:
    """log-covering bound (L/(alpha^3 eps0^3))^d ln(1/(alpha eps0))."""
    _require(alpha > 0 and eps0 > 0 and L > 0 and d >= 1, "alpha, eps0, L > 0 and d >= 1 required")
    log_term = math.log(1.0 / (alpha * eps0))
    inputs = {"alpha": alpha, "eps0": eps0, "L": L, "d": d}
    if log_term <= 0.0:
        return BoundReport("empirical_cover", inputs, 0.0, clamped=True, notes="alpha*eps0 >= 1")
    value = (L / (alpha**3 * eps0**3)) ** d * log_term
    return BoundReport("empirical_cover", inputs, value)


def distance_additive_term(n: int, L: float, d: float, delta: float) -> BoundReport:
    """Four-term additive deviation: the sqrt(L) n^(-1/8d) term dominates."""
    _require(n >= 1 and L >= 0 and d > 0 and 0 < delta < 1, "bad distance-term inputs")
    nf = float(n)
    value = (
        25.0 * nf ** (-1.0 / (4.0 * d))
        + 15.0 * math.sqrt(L) * nf ** (-1.0 / (8.0 * d))
        + (6.0 + 2.0 ** (d / 4.0)) * nf ** (-1.0 / 8.0)
        + (162.0 / nf * math.log(2.0 / delta)) ** 0.25
    )
    return BoundReport("distance_additive", {"n": n, "L": L, "d": d, "delta": delta}, value)


def generalization_bound(
    n: int, L: float, d: float, delta: float, c_delta: float = 1.0, kind: str = "regression"
) -> BoundReport:
    """Three-term excess-risk bound; the same form serves both tasks."""
    _require(n >= 1 and L >= 0 and d > 0 and 0 < delta < 1 and c_delta > 0, "bad inputs")
    if kind not in ("regression", "classification"):
        raise InvalidParameter(f"unknown kind {kind!r}")
    nf = float(n)
    value = (
        c_delta * math.sqrt(L) / nf ** (1.0 / (8.0 * d))
        + c_delta ** (-d / 2.0) * math.sqrt(2.0) / nf ** (5.0 / 16.0)
        + 3.0 * math.sqrt(math.log(2.0 / delta) / (2.0 * nf))
    )
    inputs = {"n": n, "L": L, "d": d, "delta": delta, "c_delta": c_delta, "kind": kind}
    return BoundReport("generalization", inputs, value)


def tv_bound(m: int, n: int, delta: float) -> BoundReport:
    """Partition-mass deviation sqrt(m/n) + sqrt((2/n) ln(2/delta))."""
    _require(m >= 1 and n >= 1 and 0 < delta < 1, "m, n >= 1 and delta in (0,1) required")
    value = math.sqrt(m / n) + math.sqrt(2.0 / n * math.log(2.0 / delta))
    notes = "vacuous (>= 1)" if value >= 1.0 else ""
    return BoundReport("tv", {"m": m, "n": n, "delta": delta}, value, notes=notes)


def weak_strong_log_check(values, weights) -> tuple[float, float]:
    """Both sides of E[X] <= 2 W[X] ln(1/p*) for a finite nonnegative X.

    W[X] is the weak mean sup_t t P(X >= t) and p* the smallest positive
    atom. A point mass gives rhs = 0 and the inequality genuinely fails;
    callers exclude that degenerate case.
    """
    v = np.asarray(values, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    _require(v.ndim == 1 and v.shape == w.shape, "values and weights must be matching vectors")
    _require(bool(np.all(v >= 0)) and bool(np.all(np.isfinite(v))), "X must be finite nonnegative")
    _require(bool(np.all(w >= 0)) and abs(float(w.sum()) - 1.0) <= 1e-9, "weights must sum to 1")
    lhs = float(np.dot(v, w))
    order = np.argsort(-v, kind="stable")
    weak = float(np.max(v[order] * np.cumsum(w[order]))) if v.size else 0.0
    positive = w[w > 0]
    p_star = float(np.min(positive)) if positive.size else 1.0
    rhs = 2.0 * weak * math.log(1.0 / p_star) if p_star < 1.0 else 0.0
    return lhs, rhs


def empirical_cover_estimate(function_bank, weighted_sample, t: float) -> int:
    """Greedy first-fit L2(mu) cover size of the bank at radius t."""
    _require(t > 0, "t must be positive")
    bank = [np.asarray(f, dtype=np.float64) for f in function_bank]
    if not bank:
        return 0
    mu = weighted_sample.weights
    centers: list[np.ndarray] = []
    for f in bank:
        covered = any(
            math.sqrt(float(np.dot(mu, (f - g) ** 2))) <= t for g in centers
        )
        if not covered:
            centers.append(f)
    return len(centers)


def sample_weak_class(space, weights, L: float, count: int, seed: int = 0) -> list:
    """Rejection-sample value vectors whose weak mean slope is at most L.

    Proposals mix a random piecewise-constant function (splits along the
    index order) with a random affine ramp in the first coordinate, clipped
    to [0,1]. This explores the class; it is not a uniform measure on it.
    """
    _require(L > 0 and count >= 1, "L > 0 and count >= 1 required")
    from .metric_core import WeightedSample

    sample = WeightedSample(space, weights)
    rng = np.random.default_rng(seed)
    n = space.n
    x = space.coords[:, 0] if space.coords is not None else np.arange(n) / max(n - 1, 1)
    out: list[np.ndarray] = []
    attempts = 0
    max_attempts = 400 * count
    while len(out) < count:
        attempts += 1
        if attempts > max_attempts:
            raise SolverFailure(
                f"rejection sampler collected {len(out)}/{count} after {max_attempts} tries"
            )
        pieces = int(rng.integers(1, 5))
        cuts = np.sort(rng.integers(1, n, size=pieces - 1)) if pieces > 1 else np.array([], dtype=np.int64)
        levels = rng.uniform(0.0, 1.0, size=pieces)
        step = levels[np.searchsorted(cuts, np.arange(n), side="right")]
        slope = rng.uniform(-L, L)
        ramp = rng.uniform(0.0, 1.0) + slope * (x - x.mean())
        lam = rng.uniform(0.0, 1.0)
        f = np.clip(lam * step + (1.0 - lam) * ramp, 0.0, 1.0)
        if profile(sample, f).weak_mean <= L:
            out.append(f)
    return out
