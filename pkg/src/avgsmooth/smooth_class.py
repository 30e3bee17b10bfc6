"""Classification smoothing by local slope removal.

Relabels a near-minimal set of binary-labeled points so that afterwards, for
every t in [1, n+1], at most n/t points carry local slope b*t*L or more
(b = 6). Works level by level over thresholds t_i = 2^i: a 1/(2 t_i L)-net
partitions the sample into neighborhoods, mixed neighborhoods are split into
co-located single-label entries, entries with a nearby opposite-label entry
are collected, and a knapsack-cover 2-approximation picks the cheapest
entries whose neighborhoods account for all but 6n/t_i of the suspect
points. Relabeled points receive real values extended from the kept ones.

The exact removal problem is NP-hard, so optimality is only checked against
a brute-force oracle at toy sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleDemand, InvalidParameters
from .metric_core import LabeledSample
from .nets import build_net
from .pmse import pmse_extend
from .slope import local_slopes

__all__ = [
    "AUDIT_B",
    "NetEntry",
    "LevelPlan",
    "RelabelPlan",
    "clsrp_bicriteria",
    "min_knapsack_cover_2approx",
    "slope_audit",
]

AUDIT_B = 6.0


@dataclass(frozen=True)
class NetEntry:
    """One single-label bookkeeping entry of a level net.

    `point` is the net center; a mixed neighborhood yields two entries at the
    same center, one per label, splitting the members between them.
    """

    point: int
    label: int
    members: tuple


@dataclass(frozen=True)
class LevelPlan:
    t: float
    net: tuple  # center indices of T_i
    entries: tuple  # all NetEntry after the split
    suspect: tuple  # positions into entries forming T'_i
    chosen: tuple  # positions into entries forming C_i
    relabeled: tuple  # P_i


@dataclass(frozen=True)
class RelabelPlan:
    relabeled_indices: tuple
    new_labels: np.ndarray
    levels_used: tuple
    per_level: tuple

    def __post_init__(self) -> None:
        vals = np.array(self.new_labels, dtype=np.float64, copy=True)
        vals.setflags(write=False)
        object.__setattr__(self, "new_labels", vals)

    def apply(self, labels) -> np.ndarray:
        out = np.array(labels, dtype=np.float64, copy=True)
        if self.relabeled_indices:
            out[list(self.relabeled_indices)] = self.new_labels
        return out


def min_knapsack_cover_2approx(items, demand) -> tuple:
    """Pick item indices with total size >= demand at near-minimal weight.

    Greedy by weight/size density, compared against the best single item
    that covers the demand alone; the lighter of the two is returned
    (factor-2 guarantee for nonnegative weights).
    """
    weights = [float(w) for w, _ in items]
    sizes = [float(s) for _, s in items]
    if demand <= 0:
        return ()
    if sum(sizes) < demand:
        raise InfeasibleDemand(f"total size {sum(sizes)} below demand {demand}")

    usable = [i for i in range(len(sizes)) if sizes[i] > 0]
    order = sorted(usable, key=lambda i: (weights[i] / sizes[i], weights[i], i))
    greedy: list[int] = []
    covered = 0.0
    for i in order:
        greedy.append(i)
        covered += sizes[i]
        if covered >= demand:
            break
    greedy_w = sum(weights[i] for i in greedy)

    singles = [i for i in usable if sizes[i] >= demand]
    if singles:
        best = min(singles, key=lambda i: (weights[i], i))
        if weights[best] < greedy_w:
            return (best,)
    return tuple(sorted(greedy))


def slope_audit(space, labels, L: float, b: float) -> float:
    """Worst ratio t * #{local slope >= b t L} / n over real t in [1, n+1].

    The ratio only changes where b*t*L crosses a slope value or where the
    comparison target n/t crosses an integer, so evaluating at those points
    plus the interval ends is exact. At most 1 means compliant.
    """
    if b < 1.0:
        raise InvalidParameters("b must be at least 1")
    n = space.n
    lam = local_slopes(space, np.asarray(labels, dtype=np.float64))
    ts = np.concatenate([[1.0, float(n + 1)], n / np.arange(1, n + 1)])
    thr = (b * L) * ts
    if b * L > 0:
        # slope-derived grid points compare against the slope value itself;
        # recomputing b*L*t would round past the >= boundary
        v = lam[lam > 0]
        tv = v / (b * L)
        inside = (tv > 1.0) & (tv < n + 1)
        ts = np.concatenate([ts, tv[inside]])
        thr = np.concatenate([thr, v[inside]])
    counts = (lam[None, :] >= thr[:, None]).sum(axis=1)
    return float(np.max(ts * counts / n))


def _build_level(space, y: np.ndarray, L: float, t: float):
    """Net, label split, suspects, weights and sizes for one threshold."""
    n = space.n
    dm = space.dist_matrix()
    radius = 1.0 / (2.0 * t * L)
    net = build_net(space, radius)
    entries: list[NetEntry] = []
    for p in net.center_indices:
        members = np.flatnonzero(net.assignment == p)
        lp = int(y[p])
        same = members[y[members] == lp]
        opp = members[y[members] != lp]
        entries.append(NetEntry(point=int(p), label=lp, members=tuple(int(m) for m in same)))
        if opp.size:
            entries.append(NetEntry(point=int(p), label=1 - lp, members=tuple(int(m) for m in opp)))

    reach = 2.0 / (t * L)
    pts = np.array([e.point for e in entries], dtype=np.int64)
    labs = np.array([e.label for e in entries])
    pairwise = dm[np.ix_(pts, pts)]
    near = pairwise <= reach
    opposite = labs[:, None] != labs[None, :]
    suspect = np.flatnonzero(np.any(near & opposite, axis=1))

    items = []
    for e_pos in suspect:
        in_reach = np.flatnonzero(near[e_pos])
        in_reach = in_reach[np.isin(in_reach, suspect)]
        s0: set[int] = set()
        s1: set[int] = set()
        for q_pos in in_reach:
            target = s0 if labs[q_pos] == 0 else s1
            target.update(entries[q_pos].members)
        w = min(len(s0), len(s1))
        items.append((w, len(entries[e_pos].members)))

    m = sum(len(entries[e].members) for e in suspect)
    # a compliant label set may keep slope >= t*L/6 on at most 6n/t_i points
    # (the n/t profile at t = t_i/6), so everything past that must go
    demand = max(0.0, m - 6.0 * n / t)
    chosen_rel = min_knapsack_cover_2approx(items, demand) if items else ()
    chosen = tuple(int(suspect[c]) for c in chosen_rel)
    relabeled = sorted({m for c in chosen for m in entries[c].members})
    return LevelPlan(
        t=t,
        net=tuple(int(p) for p in net.center_indices),
        entries=tuple(entries),
        suspect=tuple(int(e) for e in suspect),
        chosen=chosen,
        relabeled=tuple(relabeled),
    )


def clsrp_bicriteria(labeled: LabeledSample, L: float) -> RelabelPlan:
    """Bi-criteria relabeling: few points changed, audited slope profile.

    Runs the per-threshold construction for t_i = 2^i up to 2^ceil(log2 n),
    unions the per-level relabel sets, and assigns the relabeled points real
    values extended from the untouched ones (0.5 everywhere if nothing was
    kept).
    """
    if labeled.kind != "binary":
        raise InvalidParameters("clsrp_bicriteria requires binary labels")
    if not L > 0:
        raise InvalidParameters("L must be positive")
    space = labeled.space
    y = np.asarray(labeled.labels)
    n = space.n
    levels = []
    for i in range(int(math.ceil(math.log2(n))) + 1 if n > 1 else 1):
        levels.append(_build_level(space, y, L, float(2**i)))
    relabel = sorted({p for lv in levels for p in lv.relabeled})
    if relabel:
        kept = np.setdiff1d(np.arange(n), np.array(relabel, dtype=np.int64))
        if kept.size:
            full = pmse_extend(space, kept, y[kept].astype(np.float64))
            new_labels = full[relabel]
        else:
            new_labels = np.full(len(relabel), 0.5)
    else:
        new_labels = np.zeros(0)
    return RelabelPlan(
        relabeled_indices=tuple(relabel),
        new_labels=new_labels,
        levels_used=tuple(lv.t for lv in levels),
        per_level=tuple(levels),
    )
