"""Pointwise minimum slope extension.

Extending f from an anchor set A to a query x maximizes, over ordered anchor
pairs (u, v), the quotient

    R_x(u, v) = (f(v) - f(u)) / (dist(x, u) + dist(x, v))

and returns f(u*) + R* . dist(x, u*). Among all extensions of f|A this one
has the smallest possible local slope at every point simultaneously, which
is what every downstream construction (defect repair, relabeling, the
extension game) leans on. Ties in R break lexicographically on (u, v); with
equal R the extended value is equal anyway, so the tie rule only fixes the
reported witness pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyAnchors, ZeroDistanceToNonAnchor
from .metric_core import FiniteMetricSpace
from .slope import local_slopes

__all__ = [
    "Extender",
    "PropertyReport",
    "build_extender",
    "pmse_eval",
    "pmse_extend",
    "verify_pmse_properties",
]

_QUERY_CHUNK = 64


@dataclass(frozen=True)
class Extender:
    """Anchor set with values, evaluable anywhere via distances to the anchors."""

    anchor_space: FiniteMetricSpace
    anchor_values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.array(self.anchor_values, dtype=np.float64, copy=True)
        if vals.shape != (self.anchor_space.n,):
            raise ValueError(f"expected {self.anchor_space.n} anchor values, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "anchor_values", vals)

    @property
    def size(self) -> int:
        return self.anchor_space.n

    def eval_dists(self, dists_to_anchors) -> float:
        return pmse_eval(self, dists_to_anchors)

    def eval_coords(self, points) -> np.ndarray:
        """Evaluate at external coordinate queries (coordinate-backed anchors only)."""
        dx = self.anchor_space.dists_to(points)
        return _eval_many(self.anchor_values, dx, strict_positive=False)

    def lip(self) -> float:
        """Lipschitz seminorm of the anchor restriction."""
        if self.size == 1:
            return 0.0
        d = self.anchor_space.dist_matrix().copy()
        np.fill_diagonal(d, np.inf)
        f = self.anchor_values
        return float(np.max(np.abs(f[:, None] - f[None, :]) / d))


def build_extender(space: FiniteMetricSpace, anchor_indices, anchor_values) -> Extender:
    idx = np.asarray(list(anchor_indices), dtype=np.int64)
    if idx.size == 0:
        raise EmptyAnchors("at least one anchor is required")
    return Extender(anchor_space=space.subspace(idx), anchor_values=np.asarray(anchor_values))


def pmse_eval(extender: Extender, dists_to_anchors, strict_positive: bool = False) -> float:
    """Extend to one query point given its distances to the anchors.

    A zero distance means the query coincides with that anchor and returns
    its value exactly; under `strict_positive` (bulk extension of rows known
    to be non-anchors) it raises instead.
    """
    dx = np.asarray(dists_to_anchors, dtype=np.float64)
    f = extender.anchor_values
    if dx.shape != f.shape:
        raise ValueError(f"expected {f.shape[0]} distances, got {dx.shape}")
    out = _eval_many(f, dx.reshape(1, -1), strict_positive=strict_positive)
    return float(out[0])


def pmse_extend(space: FiniteMetricSpace, anchor_indices, anchor_values) -> np.ndarray:
    """Extend anchor values to every point of the space; anchors copy bitwise."""
    idx = np.asarray(list(anchor_indices), dtype=np.int64)
    if idx.size == 0:
        raise EmptyAnchors("at least one anchor is required")
    vals = np.asarray(anchor_values, dtype=np.float64)
    out = np.empty(space.n)
    out[idx] = vals
    rest = np.setdiff1d(np.arange(space.n), idx)
    if rest.size:
        dx = space.dist_matrix()[np.ix_(rest, idx)]
        out[rest] = _eval_many(vals, dx, strict_positive=True)
    return out


def _eval_many(f: np.ndarray, dx: np.ndarray, strict_positive: bool) -> np.ndarray:
    """Batched evaluation; dx has one row of anchor distances per query."""
    q, m = dx.shape
    out = np.empty(q)
    zero_rows = np.flatnonzero(np.any(dx <= 0.0, axis=1))
    if zero_rows.size and strict_positive:
        raise ZeroDistanceToNonAnchor(f"query {int(zero_rows[0])} at zero distance from an anchor")
    for r in zero_rows:
        out[r] = f[np.argmax(dx[r] <= 0.0)]
    live = np.setdiff1d(np.arange(q), zero_rows)
    if live.size == 0:
        return out
    if m == 1 or np.max(f) == np.min(f):
        out[live] = f[0]
        return out
    diff = f[None, :] - f[:, None]  # diff[u, v] = f(v) - f(u)
    for lo in range(0, live.size, _QUERY_CHUNK):
        rows = live[lo : lo + _QUERY_CHUNK]
        d = dx[rows]
        denom = d[:, :, None] + d[:, None, :]
        ratio = diff[None, :, :] / denom
        flat = np.argmax(ratio.reshape(rows.size, m * m), axis=1)
        u, v = flat // m, flat % m
        rmax = ratio.reshape(rows.size, m * m)[np.arange(rows.size), flat]
        vals = f[u] + rmax * d[np.arange(rows.size), u]
        # float guard for the sandwich f(u*) <= value <= f(v*)
        out[rows] = np.minimum(np.maximum(vals, f[u]), f[v])
    return out


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of the structural checks; `violations` lists human-readable failures."""

    pointwise_minimal: bool
    max_slope_excess: float
    lip_preserved: bool
    lip_gap: float
    sandwich: bool
    anchor_monotone: bool | None
    violations: tuple[str, ...]

    @property
    def all_ok(self) -> bool:
        return not self.violations


def verify_pmse_properties(
    space: FiniteMetricSpace,
    anchor_indices,
    f_original,
    f_extended,
    nested_anchor_indices=None,
    tol: float = 1e-9,
) -> PropertyReport:
    """Check the extension's structural guarantees against a competing extension.

    `f_original` is any function agreeing with the anchor values on the
    anchors; `f_extended` the extension under test. When a nested subset of
    the anchors is supplied, extensions from both sets are compared for the
    anchor-growth monotonicity property.
    """
    idx = np.asarray(list(anchor_indices), dtype=np.int64)
    f0 = np.asarray(f_original, dtype=np.float64)
    fa = np.asarray(f_extended, dtype=np.float64)
    violations: list[str] = []
    if not np.array_equal(f0[idx], fa[idx]):
        violations.append("competing function disagrees with anchors")

    lam_a = local_slopes(space, fa)
    lam_0 = local_slopes(space, f0)
    excess = float(np.max(lam_a - lam_0))
    minimal = excess <= tol
    if not minimal:
        violations.append(f"pointwise minimality violated by {excess:.3e}")

    ext = build_extender(space, idx, fa[idx])
    lip_gap = abs(float(np.max(lam_a)) - ext.lip())
    lip_ok = lip_gap <= tol
    if not lip_ok:
        violations.append(f"lip mismatch {lip_gap:.3e}")

    lo, hi = float(np.min(fa[idx])), float(np.max(fa[idx]))
    sandwich = bool(np.all(fa >= lo) and np.all(fa <= hi))
    if not sandwich:
        violations.append("value outside anchor range")

    monotone: bool | None = None
    if nested_anchor_indices is not None:
        sub = np.asarray(list(nested_anchor_indices), dtype=np.int64)
        if not np.all(np.isin(sub, idx)):
            raise ValueError("nested anchors must be a subset of the anchors")
        f_sub = pmse_extend(space, sub, fa[sub])
        gap = float(np.max(local_slopes(space, f_sub) - lam_a))
        monotone = gap <= tol
        if not monotone:
            violations.append(f"anchor-growth monotonicity violated by {gap:.3e}")

    return PropertyReport(
        pointwise_minimal=minimal,
        max_slope_excess=excess,
        lip_preserved=lip_ok,
        lip_gap=lip_gap,
        sandwich=sandwich,
        anchor_monotone=monotone,
        violations=tuple(violations),
    )
