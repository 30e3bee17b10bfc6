"""Defect detection and repair.

A point is an (eta, ell, c)-defect when its local slope reaches ell yet
every witness of slope ell/c sits within eta in value: a large slope caused
entirely by small jumps. Repair excises the interiors of entirely-defective
balls and re-extends from the rest, which provably removes all defects at a
modestly relaxed scale while never increasing any local slope.

Growing c recruits more witnesses into condition (b), so defect sets shrink:
Xi(eta, ell, c) is contained in Xi(eta, ell, c') whenever c' <= c.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameters
from .metric_core import FiniteMetricSpace
from .nets import build_net
from .pmse import pmse_extend
from .slope import local_slopes

__all__ = [
    "DefectReport",
    "slope_witnesses",
    "find_defects",
    "repair",
]

REPAIR_C = 6.0


@dataclass(frozen=True)
class DefectReport:
    eta: float
    ell: float
    c: float
    defect_indices: tuple[int, ...]

    @property
    def is_defect_free(self) -> bool:
        return not self.defect_indices


def slope_witnesses(space: FiniteMetricSpace, f, i: int, threshold: float) -> np.ndarray:
    """Indices j != i whose difference quotient against i reaches the threshold."""
    if threshold <= 0:
        raise InvalidParameters("witness threshold must be positive")
    fv = np.asarray(f, dtype=np.float64)
    d = space.dist_matrix()[i].copy()
    d[i] = np.inf
    return np.flatnonzero(np.abs(fv[i] - fv) / d >= threshold)


def find_defects(space: FiniteMetricSpace, f, eta: float, ell: float, c: float) -> DefectReport:
    if eta <= 0 or ell <= 0 or c < 1:
        raise InvalidParameters("need eta > 0, ell > 0, c >= 1")
    fv = np.asarray(f, dtype=np.float64)
    n = space.n
    if n == 1:
        return DefectReport(eta, ell, c, ())
    d = space.dist_matrix().copy()
    np.fill_diagonal(d, np.inf)
    gap = np.abs(fv[:, None] - fv[None, :])
    quot = gap / d
    lam = np.max(quot, axis=1)
    # a row fails (b) if any ell/c-slope witness jumps by more than eta
    bad = np.any((quot >= ell / c) & (gap > eta), axis=1)
    idx = np.flatnonzero((lam >= ell) & ~bad)
    return DefectReport(eta, ell, c, tuple(int(i) for i in idx))


def repair(space: FiniteMetricSpace, f, eta: float, ell: float) -> np.ndarray:
    """Defect-free approximation of f within 4*eta in sup norm.

    Builds an (eta/ell)-net of the ell-level set, classifies each net ball as
    smooth (contains a non-defect) or rough (all defects), removes the rough
    balls' interiors minus any smooth overlap, and extends f back over the
    removed set from everything kept. The output has no (eta/2, ell, 6)
    defects and pointwise local slope at most that of f.
    """
    if eta <= 0 or ell <= 0:
        raise InvalidParameters("need eta > 0 and ell > 0")
    fv = np.asarray(f, dtype=np.float64)
    if np.any(fv < 0.0) or np.any(fv > 1.0):
        raise InvalidParameters("repair expects values in [0, 1]")
    lam = local_slopes(space, fv)
    level = np.flatnonzero(lam >= ell)
    if level.size == 0:
        return np.array(fv, copy=True)
    radius = eta / ell
    net = build_net(space.subspace(level), radius)
    centers = level[np.asarray(net.center_indices, dtype=np.int64)]
    dm = space.dist_matrix()
    defect = np.zeros(space.n, dtype=bool)
    defect[list(find_defects(space, fv, eta, ell, 1.0).defect_indices)] = True
    in_rough = np.zeros(space.n, dtype=bool)
    in_smooth = np.zeros(space.n, dtype=bool)
    for v in centers:
        ball = dm[v] <= radius
        if np.all(defect[ball]):
            in_rough |= ball
        else:
            in_smooth |= ball
    removed = in_rough & ~in_smooth
    removed[centers] = False
    if not np.any(removed):
        return np.array(fv, copy=True)
    kept = np.flatnonzero(~removed)
    return pmse_extend(space, kept, fv[kept])
