"""Finite metric spaces with weighted and labeled samples.

A space is backed either by point coordinates under a named metric
(euclidean, l1, linf) or by an explicit distance matrix.  Construction
validates metric axioms; the O(n^3) triangle check for explicit matrices
sits behind a flag that defaults to on for n <= 512 and off above.
All arrays are float64 and frozen after construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AsymmetricMatrix,
    DegenerateSpace,
    DuplicatePoints,
    NegativeDistance,
    TooFewPoints,
    TriangleViolation,
    ValidationError,
)

__all__ = [
    "METRIC_TAGS",
    "TRIANGLE_CHECK_MAX_N",
    "FiniteMetricSpace",
    "WeightedSample",
    "LabeledSample",
    "build_space",
    "diameter",
    "aspect_ratio",
    "min_interpoint_distance",
]

METRIC_TAGS = ("euclidean", "l1", "linf")

# default cutoff for the cubic triangle-inequality check on explicit matrices
TRIANGLE_CHECK_MAX_N = 512

_CHUNK = 256


def _pairwise_from_coords(a: np.ndarray, b: np.ndarray, metric_tag: str) -> np.ndarray:
    """Distances from rows of a to rows of b, computed by direct differences.

    Row-chunked so temporaries stay at _CHUNK * len(b) * dim floats.  The
    per-pair formula is a pure function of the two coordinate rows, so
    repeated computation is bit-identical and the full matrix is symmetric.
    """
    out = np.empty((a.shape[0], b.shape[0]), dtype=np.float64)
    for lo in range(0, a.shape[0], _CHUNK):
        hi = min(lo + _CHUNK, a.shape[0])
        diff = a[lo:hi, None, :] - b[None, :, :]
        if metric_tag == "euclidean":
            out[lo:hi] = np.sqrt(np.sum(diff * diff, axis=2))
        elif metric_tag == "l1":
            out[lo:hi] = np.sum(np.abs(diff), axis=2)
        elif metric_tag == "linf":
            out[lo:hi] = np.max(np.abs(diff), axis=2)
        else:
            raise ValidationError(f"unknown metric tag {metric_tag!r}")
    return out


class FiniteMetricSpace:
    """Immutable finite metric space.

    Parameters
    ----------
    coords : (n, d) array, optional
        Point coordinates; distances derive from ``metric_tag``.
    metric_tag : str
        One of METRIC_TAGS; ignored for matrix-backed spaces.
    matrix : (n, n) array, optional
        Explicit distance matrix (mutually exclusive with coords).
    validate_triangle : bool, optional
        Force the O(n^3) triangle check on or off.  Default: on for
        matrix-backed spaces with n <= TRIANGLE_CHECK_MAX_N, off otherwise
        (coordinate metrics satisfy the axioms by construction).
    """

    __slots__ = ("n", "coords", "metric_tag", "_matrix")

    def __init__(
        self,
        coords: Optional[np.ndarray] = None,
        metric_tag: str = "euclidean",
        matrix: Optional[np.ndarray] = None,
        validate_triangle: Optional[bool] = None,
        _skip_validation: bool = False,
    ):
        if (coords is None) == (matrix is None):
            raise ValidationError("give exactly one of coords or matrix")
        if coords is not None:
            coords = np.array(coords, dtype=np.float64, copy=True)
            if coords.ndim == 1:
                coords = coords[:, None]
            if coords.ndim != 2:
                raise ValidationError("coords must be a 2-d array")
            if metric_tag not in METRIC_TAGS:
                raise ValidationError(f"metric_tag must be one of {METRIC_TAGS}")
            n = coords.shape[0]
            if n < 1:
                raise TooFewPoints("a space needs at least one point")
            if not np.all(np.isfinite(coords)):
                raise ValidationError("coords must be finite")
            if not _skip_validation:
                self._check_coord_duplicates(coords)
            coords.flags.writeable = False
            self.coords = coords
            self.metric_tag = metric_tag
            self.n = n
            self._matrix = None
        else:
            m = np.asarray(matrix, dtype=np.float64)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValidationError("distance matrix must be square")
            n = m.shape[0]
            if n < 1:
                raise TooFewPoints("a space needs at least one point")
            if not _skip_validation:
                self._validate_matrix(m, validate_triangle)
            m = m.copy()
            m.flags.writeable = False
            self.coords = None
            self.metric_tag = "matrix"
            self.n = n
            self._matrix = m

    @staticmethod
    def _check_coord_duplicates(coords: np.ndarray) -> None:
        order = np.lexsort(coords.T[::-1])
        sorted_rows = coords[order]
        same = np.all(sorted_rows[1:] == sorted_rows[:-1], axis=1)
        if np.any(same):
            k = int(np.flatnonzero(same)[0])
            i, j = sorted((int(order[k]), int(order[k + 1])))
            raise DuplicatePoints(f"points {i} and {j} have identical coordinates")

    @staticmethod
    def _validate_matrix(m: np.ndarray, validate_triangle: Optional[bool]) -> None:
        n = m.shape[0]
        if not np.all(np.isfinite(m)):
            raise ValidationError("distances must be finite")
        if np.any(np.diag(m) != 0.0):
            raise NegativeDistance("diagonal entries must all be zero")
        if np.any(m < 0.0):
            raise NegativeDistance("distances must be nonnegative")
        if not np.array_equal(m, m.T):
            raise AsymmetricMatrix("distance matrix must be symmetric")
        off = m[~np.eye(n, dtype=bool)]
        if off.size and np.any(off == 0.0):
            idx = np.argwhere((m == 0.0) & ~np.eye(n, dtype=bool))[0]
            raise DuplicatePoints(f"points {idx[0]} and {idx[1]} are at distance zero")
        do_check = validate_triangle if validate_triangle is not None else n <= TRIANGLE_CHECK_MAX_N
        if do_check:
            tol = 1e-9 * float(m.max(initial=0.0))
            for k in range(n):
                # d(i,j) <= d(i,k) + d(k,j) up to a relative float slack
                if np.any(m > m[:, [k]] + m[[k], :] + tol):
                    i, j = np.argwhere(m > m[:, [k]] + m[[k], :] + tol)[0]
                    raise TriangleViolation(
                        f"triangle inequality fails for ({i},{k},{j})"
                    )

    # -- distances -------------------------------------------------------

    def dist_matrix(self) -> np.ndarray:
        """Full pairwise distance matrix (computed once, then cached)."""
        if self._matrix is None:
            m = _pairwise_from_coords(self.coords, self.coords, self.metric_tag)
            np.fill_diagonal(m, 0.0)
            m.flags.writeable = False
            self._matrix = m
        return self._matrix

    def dist(self, i: int, j: int) -> float:
        return float(self.dist_matrix()[i, j])

    def dists_to(self, points: np.ndarray) -> np.ndarray:
        """(m, n) distances from external coordinate rows to all points.

        Only available for coordinate-backed spaces.
        """
        if self.coords is None:
            raise ValidationError("matrix-backed space cannot place external points")
        points = np.asarray(points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        if points.shape[1] != self.coords.shape[1]:
            raise ValidationError("query dimension does not match the space")
        return _pairwise_from_coords(points, self.coords, self.metric_tag)

    def subspace(self, indices: Sequence[int]) -> "FiniteMetricSpace":
        """Restriction to a subset of point indices, preserving the backing."""
        idx = np.asarray(indices, dtype=np.intp)
        if idx.size < 1:
            raise TooFewPoints("a subspace needs at least one point")
        if self.coords is not None:
            return FiniteMetricSpace(
                coords=self.coords[idx], metric_tag=self.metric_tag, _skip_validation=True
            )
        sub = self.dist_matrix()[np.ix_(idx, idx)]
        return FiniteMetricSpace(matrix=sub, _skip_validation=True)

    def __repr__(self) -> str:  # pragma: no cover
        return f"FiniteMetricSpace(n={self.n}, metric={self.metric_tag})"


def build_space(
    coords: Optional[np.ndarray] = None,
    metric_tag: str = "euclidean",
    matrix: Optional[np.ndarray] = None,
    validate_triangle: Optional[bool] = None,
) -> FiniteMetricSpace:
    """Construct a validated FiniteMetricSpace from coords or a matrix."""
    return FiniteMetricSpace(
        coords=coords, metric_tag=metric_tag, matrix=matrix, validate_triangle=validate_triangle
    )


def diameter(space: FiniteMetricSpace) -> float:
    """Largest pairwise distance; 0 for a single point."""
    if space.n == 1:
        return 0.0
    return float(space.dist_matrix().max())


def min_interpoint_distance(space: FiniteMetricSpace) -> float:
    """Smallest positive pairwise distance; raises on a single point."""
    if space.n == 1:
        raise DegenerateSpace("minimal interpoint distance needs two points")
    m = space.dist_matrix()
    off = m[~np.eye(space.n, dtype=bool)]
    return float(off.min())


def aspect_ratio(space: FiniteMetricSpace) -> float:
    """diameter / min positive distance; raises DegenerateSpace for n = 1."""
    if space.n == 1:
        raise DegenerateSpace("aspect ratio undefined for a single point")
    return diameter(space) / min_interpoint_distance(space)


@dataclass(frozen=True)
class WeightedSample:
    """A space together with a probability vector over its points.

    weights=None means uniform.  Weights must be nonnegative and sum to 1
    within 1e-12.
    """

    space: FiniteMetricSpace
    weights: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        n = self.space.n
        if self.weights is None:
            w = np.full(n, 1.0 / n)
        else:
            w = np.asarray(self.weights, dtype=np.float64)
            if w.shape != (n,):
                raise ValidationError("weights length must equal the number of points")
            if np.any(w < 0.0) or not np.all(np.isfinite(w)):
                raise ValidationError("weights must be finite and nonnegative")
            if abs(float(w.sum()) - 1.0) > 1e-12:
                raise ValidationError("weights must sum to 1 within 1e-12")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class LabeledSample:
    """WeightedSample plus one label per point.

    kind="real01": labels in [0, 1].  kind="binary": labels in {0, 1}.
    """

    sample: WeightedSample
    labels: np.ndarray
    kind: str = "real01"

    def __post_init__(self):
        y = np.asarray(self.labels, dtype=np.float64)
        if y.shape != (self.sample.space.n,):
            raise ValidationError("labels length must equal the number of points")
        if not np.all(np.isfinite(y)):
            raise ValidationError("labels must be finite")
        if self.kind == "real01":
            if np.any(y < 0.0) or np.any(y > 1.0):
                raise ValidationError("real01 labels must lie in [0, 1]")
        elif self.kind == "binary":
            if not np.all((y == 0.0) | (y == 1.0)):
                raise ValidationError("binary labels must be 0 or 1")
        else:
            raise ValidationError(f"unknown label kind {self.kind!r}")
        y = y.copy()
        y.flags.writeable = False
        object.__setattr__(self, "labels", y)

    @property
    def space(self) -> FiniteMetricSpace:
        return self.sample.space

    @property
    def weights(self) -> np.ndarray:
        return self.sample.weights
