"""Synthetic datasets and random instances.

Every generator here is deterministic given its arguments (RNG-backed ones
take an explicit seed), so shipped CSVs, tests, and experiment scripts can
all regenerate identical data. Generators return ``(space, values)`` pairs;
callers wrap them in samples as needed.
"""

from __future__ import annotations

import numpy as np

from .metric_core import FiniteMetricSpace, build_space

__all__ = [
    "grid1d",
    "step_anchors",
    "gapped_step",
    "margin_loss",
    "power_law",
    "noisy_step",
    "two_clusters",
    "random_points",
    "random_metric",
    "sawtooth",
]


def grid1d(n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """Evenly spaced column of n points on [lo, hi], endpoints included."""
    return np.linspace(lo, hi, n).reshape(-1, 1)


def step_anchors() -> tuple[FiniteMetricSpace, np.ndarray]:
    """Ten uniform anchors k/9 on [0, 1] with step labels 1{x > 1/2}."""
    coords = grid1d(10)
    y = (coords[:, 0] > 0.5).astype(np.float64)
    return build_space(coords=coords), y


def gapped_step(gamma: float = 0.1, n: int = 1000) -> tuple[FiniteMetricSpace, np.ndarray]:
    """Step function on two segments separated by a gap of width 2*gamma.

    The domain is [0, 1/2 - gamma] union [1/2 + gamma, 1], discretized with
    n//2 points per segment (endpoints included), labels 0 on the left and
    1 on the right. The gap caps the worst-case slope at 1/(2*gamma) while
    the mean slope stays logarithmic in 1/gamma.
    """
    if not 0.0 < gamma < 0.25:
        raise ValueError("gamma must lie in (0, 0.25)")
    m = n // 2
    left = np.linspace(0.0, 0.5 - gamma, m)
    right = np.linspace(0.5 + gamma, 1.0, n - m)
    x = np.concatenate([left, right])
    y = (x > 0.5).astype(np.float64)
    return build_space(coords=x.reshape(-1, 1)), y


def margin_loss(gamma: float = 0.1, n: int = 2000) -> tuple[FiniteMetricSpace, np.ndarray]:
    """Ramp clamp(1 - x/gamma, 0, 1) on a uniform grid over [0, 1]."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    x = np.linspace(0.0, 1.0, n)
    y = np.clip(1.0 - x / gamma, 0.0, 1.0)
    return build_space(coords=x.reshape(-1, 1)), y


def power_law(p: float = 0.5, n: int = 2000) -> tuple[FiniteMetricSpace, np.ndarray]:
    """f(x) = x**p on a uniform grid over [0, 1], 0 < p <= 1."""
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    x = np.linspace(0.0, 1.0, n)
    return build_space(coords=x.reshape(-1, 1)), x**p


def noisy_step(n: int = 32, noise: float = 0.15, seed: int = 7) -> tuple[FiniteMetricSpace, np.ndarray]:
    """Step labels on a uniform 1-D grid with additive uniform noise, clipped to [0, 1].

    Small by design so exact LP reference solvers stay cheap on it.
    """
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 1.0, n)
    y = (x > 0.5).astype(np.float64)
    y = np.clip(y + rng.uniform(-noise, noise, size=n), 0.0, 1.0)
    return build_space(coords=x.reshape(-1, 1)), y


def two_clusters(n: int = 60, sep: float = 4.0, seed: int = 11) -> tuple[FiniteMetricSpace, np.ndarray]:
    """Two well-separated planar Gaussian blobs with clean binary labels."""
    rng = np.random.default_rng(seed)
    m = n // 2
    a = rng.normal(loc=(0.0, 0.0), scale=0.5, size=(m, 2))
    b = rng.normal(loc=(sep, 0.0), scale=0.5, size=(n - m, 2))
    coords = np.vstack([a, b])
    y = np.concatenate([np.zeros(m), np.ones(n - m)])
    return build_space(coords=coords), y


def random_points(n: int, d: int = 2, seed: int = 0, scale: float = 1.0) -> np.ndarray:
    """n uniform random points in [0, scale]^d."""
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, scale, size=(n, d))


def random_metric(n: int, seed: int = 0) -> np.ndarray:
    """Random finite metric: symmetric uniform weights closed under shortest paths.

    Floyd-Warshall closure guarantees the triangle inequality exactly; entries
    start in [0.1, 1] so distances stay bounded away from zero.
    """
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.1, 1.0, size=(n, n))
    d = np.triu(w, 1)
    d = d + d.T
    np.fill_diagonal(d, 0.0)
    for k in range(n):
        # in-place closure; row/column broadcast keeps it O(n^2) per pivot
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return d


def sawtooth(x: np.ndarray, period: float, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """Triangular wave of the given period mapped into [lo, hi].

    Piecewise linear with |slope| = 2*(hi-lo)/period, so mean and worst-case
    slope coincide; the adversarial regime for mean-slope guarantees.
    """
    phase = np.mod(np.asarray(x, dtype=np.float64) / period, 1.0)
    tri = 1.0 - np.abs(2.0 * phase - 1.0)
    return lo + (hi - lo) * tri
