"""Nets, Voronoi partitions, and dyadic hierarchies.

A t-net is simultaneously a t-cover (every point within t of a center) and a
t-packing (centers pairwise more than t apart). Nets are built greedily by
farthest-point traversal, which satisfies both properties by construction and
is deterministic: ties always break toward the lowest point index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCenters, InvalidRadius, TooFewPoints
from .metric_core import FiniteMetricSpace, diameter, min_interpoint_distance

__all__ = [
    "NetResult",
    "Hierarchy",
    "DdimEstimate",
    "build_net",
    "voronoi_assign",
    "build_hierarchy",
    "estimate_ddim",
]

# Levels below this radius fraction of min distance cannot exist; hard stop
# against pathological aspect ratios.
_MAX_LEVELS = 60


@dataclass(frozen=True)
class NetResult:
    """Greedy net: ordered center point-indices, the radius, and the Voronoi map."""

    center_indices: tuple[int, ...]
    radius: float
    assignment: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignment", np.array(self.assignment, dtype=np.int64, copy=True))
        self.assignment.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.center_indices)


@dataclass(frozen=True)
class Hierarchy:
    """Nested dyadic nets, coarsest to finest.

    Distances are normalized by `scale` so the diameter is at most 1; level k
    is then a 2**-k net (raw radius scale * 2**-k). Center sets are nested:
    every level-k center is also a center at every finer level. `parent[k]`
    maps each level-k center's point index to its covering center at level
    k-1 (empty array at level 0).
    """

    levels: tuple[NetResult, ...]
    parent: tuple[np.ndarray, ...]
    scale: float

    @property
    def depth(self) -> int:
        return len(self.levels)

    def radius_at(self, k: int) -> float:
        """Raw (unnormalized) radius of level k."""
        return self.scale * 2.0 ** (-k)


@dataclass(frozen=True)
class DdimEstimate:
    value: float

    @property
    def ceil(self) -> int:
        """Integer dimension for plugging into bound formulas; at least 1."""
        return max(1, math.ceil(self.value - 1e-9))


def voronoi_assign(space: FiniteMetricSpace, centers) -> np.ndarray:
    """Map each point to its nearest center's point index, ties to the lowest index.

    `centers` is a sequence of point indices; the returned vector has one
    entry per point of the space. Centers map to themselves.
    """
    idx = np.asarray(list(centers), dtype=np.int64)
    if idx.size == 0:
        raise EmptyCenters("at least one center is required")
    order = np.sort(idx)
    d = space.dist_matrix()[:, order]
    # argmin returns the first minimum, so sorting centers gives lowest-index ties
    return order[np.argmin(d, axis=1)]


def build_net(space: FiniteMetricSpace, radius: float, seed_order=None) -> NetResult:
    """Greedy farthest-point net of the whole space at the given radius.

    Optional `seed_order` lists point indices adopted as centers, in order,
    before the farthest-point phase; a seed already within `radius` of an
    earlier center is skipped so the packing property always holds. With
    seeds drawn from a coarser net this yields nested hierarchies.
    """
    if not (radius > 0.0 and math.isfinite(radius)):
        raise InvalidRadius(f"radius must be positive and finite, got {radius}")
    n = space.n
    dm = space.dist_matrix()
    # distance from each point to the nearest adopted center so far
    mind = np.full(n, np.inf)
    centers: list[int] = []

    def adopt(c: int) -> None:
        centers.append(c)
        np.minimum(mind, dm[c], out=mind)

    if seed_order is not None:
        for s in seed_order:
            s = int(s)
            if mind[s] > radius:
                adopt(s)
    if not centers:
        adopt(0)
    while True:
        far = float(np.max(mind))
        if far <= radius:
            break
        adopt(int(np.argmax(mind)))
    return NetResult(
        center_indices=tuple(centers),
        radius=float(radius),
        assignment=voronoi_assign(space, centers),
    )


def build_hierarchy(space: FiniteMetricSpace) -> Hierarchy:
    """Nested dyadic nets from one root center down to the identity net.

    The scale factor max(1, diam) normalizes the diameter to at most 1, so
    level 0 (radius 1 normalized) always has a single center. Levels descend
    until the radius drops below the minimal interpoint distance, where the
    packing property forces every point to be a center.
    """
    n = space.n
    if n == 1:
        root = NetResult((0,), 1.0, np.zeros(1, dtype=np.int64))
        return Hierarchy(levels=(root,), parent=(np.array([], dtype=np.int64),), scale=1.0)
    scale = max(1.0, diameter(space))
    min_dist = min_interpoint_distance(space)
    levels: list[NetResult] = []
    parents: list[np.ndarray] = []
    for k in range(_MAX_LEVELS + 1):
        radius = scale * 2.0 ** (-k)
        seeds = levels[-1].center_indices if levels else None
        net = build_net(space, radius, seed_order=seeds)
        if levels:
            coarse = levels[-1]
            parents.append(coarse.assignment[np.asarray(net.center_indices, dtype=np.int64)])
        else:
            parents.append(np.array([], dtype=np.int64))
        levels.append(net)
        if radius < min_dist:
            break
    return Hierarchy(levels=tuple(levels), parent=tuple(parents), scale=scale)


def estimate_ddim(space: FiniteMetricSpace, max_centers: int = 32) -> DdimEstimate:
    """Doubling-dimension estimate from sampled balls.

    For a strided sample of ball centers and a dyadic ladder of radii r, a
    greedy r/2-net of each ball B(x, r) is built; the estimate is log2 of the
    largest net found. Empirical by nature: it lower-bounds the worst ball
    but is the right scale for feeding covering-bound formulas.
    """
    n = space.n
    if n < 2:
        raise TooFewPoints("ddim estimation needs at least 2 points")
    dm = space.dist_matrix()
    diam = diameter(space)
    min_dist = min_interpoint_distance(space)
    stride = max(1, n // max_centers)
    best = 1
    for x in range(0, n, stride):
        r = diam / 2.0
        while r >= min_dist and r > 0.0:
            ball = np.flatnonzero(dm[x] <= r)
            if ball.size > best:  # a smaller ball can never beat the best net
                sub = space.subspace(ball)
                net = build_net(sub, r / 2.0)
                best = max(best, net.size)
            r /= 2.0
    return DdimEstimate(value=math.log2(best) if best > 1 else 0.0)
