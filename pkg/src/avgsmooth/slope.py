"""Local slopes and the two averaged smoothness functionals.

The local slope of f at x is the largest difference quotient against any
witness point. Averaging it gives the strong mean; the weak mean is the
Markov-style functional sup_t t * mass{slope >= t}. The chain

    weak_mean <= strong_mean <= lip

always holds, and each inequality can be loose by a log factor at most
(uniform weights): strong_mean <= 2 ln(n) * weak_mean for n >= 3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric_core import FiniteMetricSpace, WeightedSample

__all__ = [
    "SlopeProfile",
    "local_slope",
    "local_slopes",
    "profile",
    "class_membership",
    "level_set",
    "check_markov",
]


@dataclass(frozen=True)
class SlopeProfile:
    """Per-point slopes with their aggregates and the level-mass curve.

    `level_curve` holds (t, mass) at every distinct slope value t, sorted
    ascending; mass is the total weight of points with slope at least t.
    """

    local: np.ndarray
    strong_mean: float
    weak_mean: float
    lip: float
    level_curve: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "local", np.array(self.local, dtype=np.float64, copy=True))
        self.local.setflags(write=False)


def local_slopes(space: FiniteMetricSpace, f_values) -> np.ndarray:
    """All n local slopes against the full space, O(n^2)."""
    f = np.asarray(f_values, dtype=np.float64)
    n = space.n
    if n == 1:
        return np.zeros(1)
    d = space.dist_matrix().copy()
    np.fill_diagonal(d, np.inf)
    return np.max(np.abs(f[:, None] - f[None, :]) / d, axis=1)


def local_slope(space: FiniteMetricSpace, f_values, i: int, subset=None) -> float:
    """Slope of f at point i against witnesses in `subset` (default: all points).

    The sup over an empty witness set is 0 by convention.
    """
    f = np.asarray(f_values, dtype=np.float64)
    if subset is None:
        witnesses = np.arange(space.n)
    else:
        witnesses = np.asarray(list(subset), dtype=np.int64)
    witnesses = witnesses[witnesses != i]
    if witnesses.size == 0:
        return 0.0
    d = space.dist_matrix()[i, witnesses]
    return float(np.max(np.abs(f[i] - f[witnesses]) / d))


def profile(sample: WeightedSample, f_values) -> SlopeProfile:
    f = np.asarray(f_values, dtype=np.float64)
    if f.shape != (sample.space.n,):
        raise ValueError(f"expected {sample.space.n} values, got shape {f.shape}")
    local = local_slopes(sample.space, f)
    w = sample.weights
    strong = float(np.dot(w, local))
    lip = float(np.max(local))
    # sort descending; t * mass(t) is maximized at one of the slope values
    order = np.argsort(-local, kind="stable")
    lam = local[order]
    cumw = np.cumsum(w[order])
    weak = float(np.max(lam * cumw)) if lam.size else 0.0
    # mass at a tied value is the cumulative weight at its last occurrence
    curve: list[tuple[float, float]] = []
    for k in range(lam.size):
        if k + 1 == lam.size or lam[k + 1] != lam[k]:
            curve.append((float(lam[k]), float(cumw[k])))
    curve.reverse()
    return SlopeProfile(
        local=local,
        strong_mean=strong,
        weak_mean=weak,
        lip=lip,
        level_curve=tuple(curve),
    )


def class_membership(prof: SlopeProfile, L: float) -> str:
    """Tightest smoothness class containing f at budget L.

    Returns "lip", "strong", "weak", or "none"; the classes are nested in
    that order, worst-case to weakest-average.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    if prof.lip <= L:
        return "lip"
    if prof.strong_mean <= L:
        return "strong"
    if prof.weak_mean <= L:
        return "weak"
    return "none"


def level_set(prof: SlopeProfile, t: float) -> np.ndarray:
    """Indices of points with local slope at least t."""
    if t <= 0:
        raise ValueError("t must be positive")
    return np.flatnonzero(prof.local >= t)


def check_markov(prof: SlopeProfile, L: float) -> bool:
    """Whether t * mass{slope >= t} <= L at every materialized threshold."""
    return all(t * m <= L for t, m in prof.level_curve)
