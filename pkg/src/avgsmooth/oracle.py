"""Brute-force reference implementations for tests.

Everything here is written as naive exhaustive search with plain loops, on
purpose: these functions are the independent ground truth that the fast
production code is checked against, so they must not share algorithmic code
with it. They reuse only the domain types (spaces, samples). None of this
is exported through the package's public surface.
"""

from __future__ import annotations

import itertools
import math

from .errors import Infeasible, TooLarge
from .metric_core import FiniteMetricSpace, LabeledSample

__all__ = [
    "oracle_slopes",
    "oracle_weak_mean",
    "oracle_pmse_eval",
    "oracle_defects",
    "oracle_constant_fit",
    "oracle_exhaustive_knapsack",
    "oracle_lp_vertices",
    "oracle_audit",
    "oracle_clsrp",
]


def oracle_slopes(space: FiniteMetricSpace, f) -> list[float]:
    """Naive double-loop local slopes."""
    n = space.n
    out = []
    for i in range(n):
        best = 0.0
        for j in range(n):
            if j == i:
                continue
            q = abs(f[i] - f[j]) / space.dist(i, j)
            if q > best:
                best = q
        out.append(best)
    return out


def oracle_weak_mean(slopes, weights, grid: int = 20000) -> float:
    """sup_t t * mass{slope >= t} by scanning a dense t-grid plus the slope values."""
    top = max(slopes) if slopes else 0.0
    if top == 0.0:
        return 0.0
    ts = [top * k / grid for k in range(1, grid + 1)]
    ts.extend(slopes)
    best = 0.0
    for t in ts:
        if t <= 0.0:
            continue
        mass = sum(w for s, w in zip(slopes, weights) if s >= t)
        best = max(best, t * mass)
    return best


def oracle_pmse_eval(anchor_values, query_dists) -> float:
    """Exhaustive max over ordered anchor pairs of the extension quotient.

    `query_dists[u]` is the (positive) distance from the query to anchor u;
    within-anchor distances never enter the formula. Ties in the quotient
    keep the lexicographically first pair.
    """
    m = len(anchor_values)
    if m == 1:
        return float(anchor_values[0])
    best_r = -math.inf
    best_u = 0
    for u in range(m):
        for v in range(m):
            if u == v:
                continue
            r = (anchor_values[v] - anchor_values[u]) / (query_dists[u] + query_dists[v])
            if r > best_r:
                best_r = r
                best_u = u
    if best_r <= 0.0:
        # all values equal (max positive quotient requires some increase)
        return float(anchor_values[0])
    return float(anchor_values[best_u] + best_r * query_dists[best_u])


def oracle_defects(space: FiniteMetricSpace, f, eta: float, ell: float, c: float) -> list[int]:
    """Defect indices by the two-condition definition, checked literally.

    A defect has local slope at least ell and every witness of slope ell/c
    differs from it by at most eta in value.
    """
    n = space.n
    out = []
    for i in range(n):
        lam = 0.0
        for j in range(n):
            if j != i:
                lam = max(lam, abs(f[i] - f[j]) / space.dist(i, j))
        if lam < ell:
            continue
        ok = True
        for j in range(n):
            if j == i:
                continue
            if abs(f[i] - f[j]) / space.dist(i, j) >= ell / c and abs(f[i] - f[j]) > eta:
                ok = False
                break
        if ok:
            out.append(i)
    return out


def oracle_constant_fit(y, weights, step: float = 0.01) -> tuple[float, float]:
    """Best constant on the grid {0, step, ..., 1} for weighted mean absolute error."""
    best_c, best_obj = 0.0, math.inf
    k = 0
    while True:
        c = k * step
        if c > 1.0 + 1e-12:
            break
        obj = sum(w * abs(c - yi) for yi, w in zip(y, weights))
        if obj < best_obj:
            best_c, best_obj = c, obj
        k += 1
    return best_c, best_obj


def oracle_exhaustive_knapsack(items, demand) -> tuple[int, ...]:
    """Exact minimum-weight cover: subset of (weight, size) items with total size >= demand."""
    if len(items) > 20:
        raise TooLarge("exhaustive knapsack limited to 20 items")
    if demand <= 0:
        return ()
    if sum(s for _, s in items) < demand:
        raise Infeasible("total size below demand")
    best: tuple[int, ...] | None = None
    best_w = math.inf
    for r in range(len(items) + 1):
        for combo in itertools.combinations(range(len(items)), r):
            if sum(items[i][1] for i in combo) >= demand:
                w = sum(items[i][0] for i in combo)
                if w < best_w:
                    best_w, best = w, combo
    assert best is not None
    return best


def oracle_lp_vertices(c, a_ub, b_ub) -> tuple[float, list[float]]:
    """Minimize c.x over {x : A x <= b} by enumerating basic feasible points.

    Every subset of d rows is solved by hand-rolled Gaussian elimination;
    feasible solutions compete on objective. Bounded polytopes only.
    """
    d = len(c)
    m = len(a_ub)
    if math.comb(m, d) > 200000:
        raise TooLarge("too many vertex candidates")
    best = math.inf
    best_x: list[float] | None = None
    for rows in itertools.combinations(range(m), d):
        mat = [list(a_ub[r]) + [b_ub[r]] for r in rows]
        x = _solve_square(mat, d)
        if x is None:
            continue
        if all(sum(a_ub[r][j] * x[j] for j in range(d)) <= b_ub[r] + 1e-9 for r in range(m)):
            val = sum(c[j] * x[j] for j in range(d))
            if val < best - 1e-12:
                best, best_x = val, x
    if best_x is None:
        raise Infeasible("no feasible vertex found")
    return best, best_x


def _solve_square(aug, d):
    # Gaussian elimination with partial pivoting on a d x (d+1) augmented matrix
    for col in range(d):
        piv = max(range(col, d), key=lambda r: abs(aug[r][col]))
        if abs(aug[piv][col]) < 1e-12:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        for r in range(d):
            if r != col and aug[r][col] != 0.0:
                factor = aug[r][col] / aug[col][col]
                for k in range(col, d + 1):
                    aug[r][k] -= factor * aug[col][k]
    return [aug[r][d] / aug[r][r] for r in range(d)]


def oracle_audit(space: FiniteMetricSpace, labels, L: float, b: float) -> float:
    """Worst ratio t * count{slope >= b t L} / n over t in [1, n+1], exhaustively.

    The ratio only changes where b t L crosses a slope value or n/t crosses
    an integer, so scanning those t (clamped to the interval) is exact.
    """
    n = space.n
    lams = oracle_slopes(space, labels)
    cands = [(1.0, b * L * 1.0), (float(n + 1), b * L * (n + 1))]
    for k in range(1, n + 1):
        cands.append((n / k, b * L * (n / k)))
    for lam in lams:
        if lam > 0 and b * L > 0:
            t = lam / (b * L)
            if 1.0 < t < n + 1:
                # pair the grid point with its defining slope so the >=
                # comparison is exact instead of a rounded reconstruction
                cands.append((t, lam))
    worst = 0.0
    for t, thr in cands:
        count = sum(1 for lam in lams if lam >= thr)
        worst = max(worst, t * count / n)
    return worst


def oracle_clsrp(labeled: LabeledSample, L: float) -> tuple[int, ...]:
    """Exact minimum relabel set: smallest P whose PMSE relabel passes the audit at b=1.

    Searches subsets by size then lexicographic order; relabeled values come
    from this module's own PMSE from the kept points, which is pointwise
    slope-minimal, so no smaller P with any other [0,1] relabels can pass.
    """
    space = labeled.space
    n = space.n
    if n > 10:
        raise TooLarge("exhaustive CLSRP limited to 10 points")
    y = [float(v) for v in labeled.labels]
    for r in range(n + 1):
        for combo in itertools.combinations(range(n), r):
            kept = [i for i in range(n) if i not in combo]
            if kept:
                f = list(y)
                vals = [y[i] for i in kept]
                for p in combo:
                    dx = [space.dist(p, i) for i in kept]
                    f[p] = oracle_pmse_eval(vals, dx)
            else:
                f = [0.5] * n
            if oracle_audit(space, f, L, 1.0) <= 1.0 + 1e-12:
                return combo
    return tuple(range(n))  # unreachable: relabeling everything always passes
