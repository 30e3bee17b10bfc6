"""Regression label smoothing under an average-slope budget.

The dense program, in variables (w_i, z_i, L_i):

    minimize    sum_i mu_i w_i
    subject to  sum_i mu_i L_i <= L
                w_i >= |z_i - y_i|
                |z_i - z_j| <= L_i dist(i, j)   for all ordered pairs
                0 <= w, z <= 1,  L_i >= 0

Since any feasible (w, z, L) can take L_i equal to the local slope of z at i
and w_i = |z_i - y_i| without changing feasibility or cost, the program is
exactly the z-only problem: minimize the weighted mean absolute distortion
subject to the strong mean slope of z staying within budget. The exact
backend solves the LP with a self-contained simplex; the approximate backend
runs multiplicative weights on the nonnegative packing-covering rewrite
(dummy variables zt_i = 1 - z_i), restores exact feasibility by contracting
toward a best constant, and polishes with coordinate descent.

The hierarchical formulation replaces the Theta(n^2) pairwise rows with
per-level Voronoi cell maxima/minima (auxiliary variables squeezed by the
cell members) plus slope rows against nearby cell centers only, giving
O(n log aspect) rows at the price of a constant-factor budget distortion:
the returned z is audited densely and always lands within 6x the budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    Infeasible,
    InvalidParameters,
    NonconvergenceAfterMaxIters,
    SolverFailure,
    Unbounded,
)
from .metric_core import LabeledSample
from .nets import build_hierarchy
from .slope import local_slopes

__all__ = [
    "RegSmoothingProblem",
    "SmoothingSolution",
    "SolverStats",
    "LinearProgram",
    "LPSolution",
    "exact_lp_solve",
    "PackingCoveringForm",
    "pc_form",
    "approx_pc_solve",
    "dense_lp",
    "smooth_dense",
    "smooth_hierarchical",
]

_RESIDUAL_TOL = 1e-7
_MAX_PIVOTS = 50000


# ---------------------------------------------------------------------------
# problem and solution records


@dataclass(frozen=True)
class RegSmoothingProblem:
    labeled: LabeledSample
    budget_L: float
    approx_c: float = 0.1
    formulation: str = "dense"

    def __post_init__(self) -> None:
        if not (self.budget_L >= 0.0 and math.isfinite(self.budget_L)):
            raise InvalidParameters("budget_L must be finite and nonnegative")
        if not 0.0 < self.approx_c < 1.0:
            raise InvalidParameters("approx_c must lie in (0, 1)")
        if self.formulation not in ("dense", "hierarchical"):
            raise InvalidParameters(f"unknown formulation {self.formulation!r}")


@dataclass(frozen=True)
class SolverStats:
    backend: str
    iterations: int
    constraint_count: int
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SmoothingSolution:
    z: np.ndarray
    per_point_budget: np.ndarray
    objective: float
    stats: SolverStats


# ---------------------------------------------------------------------------
# exact LP backend: dense two-phase simplex with Bland's rule


@dataclass(frozen=True)
class LinearProgram:
    """min c.x subject to a_ub x <= b_ub, a_eq x = b_eq, per-variable bounds.

    Bounds default to (0, None); lower bounds must be finite, upper bounds
    may be None. Kept dense and simple: this is a desk-scale reference
    backend, not a general-purpose solver.
    """

    c: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    bounds: tuple | None = None


@dataclass(frozen=True)
class LPSolution:
    x: np.ndarray
    objective: float
    iterations: int


def exact_lp_solve(lp: LinearProgram) -> LPSolution:
    c = np.asarray(lp.c, dtype=np.float64)
    nv = c.size
    a_ub = np.asarray(lp.a_ub, dtype=np.float64).reshape(-1, nv)
    b_ub = np.asarray(lp.b_ub, dtype=np.float64).copy()
    bounds = list(lp.bounds) if lp.bounds is not None else [(0.0, None)] * nv
    lo = np.array([b[0] for b in bounds], dtype=np.float64)
    if not np.all(np.isfinite(lo)):
        raise InvalidParameters("lower bounds must be finite")

    # shift to u = x - lo >= 0 and fold upper bounds in as rows
    b_ub = b_ub - a_ub @ lo
    ub_rows, ub_rhs = [], []
    for i, (blo, bhi) in enumerate(bounds):
        if bhi is not None:
            row = np.zeros(nv)
            row[i] = 1.0
            ub_rows.append(row)
            ub_rhs.append(bhi - blo)
    if ub_rows:
        a_ub = np.vstack([a_ub, ub_rows])
        b_ub = np.concatenate([b_ub, ub_rhs])
    if lp.a_eq is not None:
        a_eq = np.asarray(lp.a_eq, dtype=np.float64).reshape(-1, nv)
        b_eq = np.asarray(lp.b_eq, dtype=np.float64) - a_eq @ lo
    else:
        a_eq = np.zeros((0, nv))
        b_eq = np.zeros(0)

    mu, me = a_ub.shape[0], a_eq.shape[0]
    m = mu + me
    rows = np.vstack([a_ub, a_eq])
    rhs = np.concatenate([b_ub, b_eq])
    is_eq = np.zeros(m, dtype=bool)
    is_eq[mu:] = True
    flip = rhs < 0
    rows[flip] *= -1.0
    rhs = np.where(flip, -rhs, rhs)
    needs_art = is_eq | flip

    slack_cols = mu
    art_idx = np.flatnonzero(needs_art)
    na = art_idx.size
    width = nv + slack_cols + na + 1
    t = np.zeros((m, width))
    t[:, :nv] = rows
    for r in range(mu):
        t[r, nv + r] = -1.0 if flip[r] else 1.0
    basis = np.empty(m, dtype=np.int64)
    for pos, r in enumerate(art_idx):
        t[r, nv + slack_cols + pos] = 1.0
        basis[r] = nv + slack_cols + pos
    for r in range(mu):
        if not needs_art[r]:
            basis[r] = nv + r
    t[:, -1] = rhs

    scale = max(1.0, float(np.max(np.abs(rhs))) if m else 1.0)
    tol = 1e-9 * scale
    iterations = 0

    def pivot(r: int, col: int) -> None:
        t[r] /= t[r, col]
        factors = t[:, col].copy()
        factors[r] = 0.0
        t[:] -= np.outer(factors, t[r])
        basis[r] = col

    def run_phase(obj: np.ndarray, allowed: int) -> np.ndarray:
        nonlocal iterations
        for r in range(m):
            if obj[basis[r]] != 0.0:
                obj = obj - obj[basis[r]] * t[r]
        while True:
            negs = np.flatnonzero(obj[:allowed] < -tol)
            if negs.size == 0:
                return obj
            entering = int(negs[0])  # Bland: lowest eligible index
            col_vals = t[:, entering]
            ok = col_vals > 1e-10
            if not np.any(ok):
                raise Unbounded("no leaving row for entering column")
            ratios = np.where(ok, t[:, -1] / np.where(ok, col_vals, 1.0), np.inf)
            best_ratio = float(np.min(ratios))
            ties = np.flatnonzero(ratios <= best_ratio + 1e-12)
            best_r = int(ties[np.argmin(basis[ties])])  # Bland: smallest basis var
            obj = obj - (obj[entering] / t[best_r, entering]) * t[best_r]
            obj[entering] = 0.0
            pivot(best_r, entering)
            iterations += 1
            if iterations > _MAX_PIVOTS:
                raise SolverFailure("pivot limit exceeded")

    if na:
        phase1 = np.zeros(width)
        phase1[nv + slack_cols : nv + slack_cols + na] = 1.0
        phase1 = run_phase(phase1, allowed=nv + slack_cols)
        if -phase1[-1] > 1e-7 * scale:
            raise Infeasible(f"phase-1 residual {-phase1[-1]:.3e}")
        # drive surviving artificials out of the basis
        for r in range(m):
            if basis[r] >= nv + slack_cols:
                live = np.flatnonzero(np.abs(t[r, : nv + slack_cols]) > 1e-9)
                if live.size:
                    pivot(r, int(live[0]))

    phase2 = np.zeros(width)
    phase2[:nv] = c
    run_phase(phase2, allowed=nv + slack_cols)

    u = np.zeros(width)
    u[basis] = t[:, -1]
    x = lo + u[:nv]

    resid = float(np.max(a_ub @ u[:nv] - b_ub, initial=0.0))
    if me:
        resid = max(resid, float(np.max(np.abs(a_eq @ u[:nv] - b_eq))))
    resid = max(resid, float(np.max(-u[:nv], initial=0.0)))
    if resid > _RESIDUAL_TOL * scale:
        raise SolverFailure(f"solution residual {resid:.3e}")
    return LPSolution(x=x, objective=float(np.dot(c, x) + 0.0), iterations=iterations)


# ---------------------------------------------------------------------------
# dense formulation builders


def _var_layout(n: int):
    return slice(0, n), slice(n, 2 * n), slice(2 * n, 3 * n)  # w, z, L


def dense_lp(problem: RegSmoothingProblem) -> LinearProgram:
    """Materialize the dense program: 1 + 2n + 2n(n-1) inequality rows."""
    lab = problem.labeled
    n = lab.space.n
    y = lab.labels
    mu = lab.weights
    rho = lab.space.dist_matrix()
    nv = 3 * n
    w_s, z_s, l_s = _var_layout(n)

    rows: list[np.ndarray] = []
    rhs: list[float] = []

    budget = np.zeros(nv)
    budget[l_s] = mu
    rows.append(budget)
    rhs.append(problem.budget_L)

    for i in range(n):
        r = np.zeros(nv)
        r[n + i] = 1.0
        r[i] = -1.0
        rows.append(r)
        rhs.append(float(y[i]))  # z_i - w_i <= y_i
        r = np.zeros(nv)
        r[n + i] = -1.0
        r[i] = -1.0
        rows.append(r)
        rhs.append(float(-y[i]))  # -z_i - w_i <= -y_i

    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            r = np.zeros(nv)
            r[n + i] = 1.0
            r[n + j] = -1.0
            r[2 * n + i] = -rho[i, j]
            rows.append(r)
            rhs.append(0.0)
            r = np.zeros(nv)
            r[n + i] = -1.0
            r[n + j] = 1.0
            r[2 * n + i] = -rho[i, j]
            rows.append(r)
            rhs.append(0.0)

    c = np.zeros(nv)
    c[w_s] = mu
    bnds = [(0.0, 1.0)] * n + [(0.0, 1.0)] * n + [(0.0, None)] * n
    return LinearProgram(c=c, a_ub=np.array(rows), b_ub=np.array(rhs), bounds=tuple(bnds))


# ---------------------------------------------------------------------------
# approximate backend: MW on the packing-covering rewrite, then repair + polish


@dataclass(frozen=True)
class PackingCoveringForm:
    """Nonnegative rewrite of the dense program with dummies zt_i = 1 - z_i.

    Covering rows (all coefficients nonnegative, rhs positive):
        L_i rho_ij + zt_i + z_j >= 1
        L_i rho_ij + z_i + zt_j >= 1
        w_i + z_i  >= y_i        (skipped when y_i = 0)
        w_i + zt_i >= 1 - y_i    (skipped when y_i = 1)
    Packing row: sum_i mu_i L_i <= budget. The z + zt = 1 coupling is not a
    row; iterative solvers enforce it by projection.
    """

    y: np.ndarray
    weights: np.ndarray
    rho: np.ndarray
    budget_L: float

    @property
    def n(self) -> int:
        return self.y.size


def pc_form(problem: RegSmoothingProblem) -> PackingCoveringForm:
    lab = problem.labeled
    return PackingCoveringForm(
        y=np.asarray(lab.labels, dtype=np.float64),
        weights=np.asarray(lab.weights, dtype=np.float64),
        rho=lab.space.dist_matrix(),
        budget_L=float(problem.budget_L),
    )


def _strong_mean(rho_inf: np.ndarray, mu: np.ndarray, z: np.ndarray) -> float:
    lam = np.max(np.abs(z[:, None] - z[None, :]) / rho_inf, axis=1) if z.size > 1 else np.zeros(1)
    return float(np.dot(mu, lam))


def _weighted_median(y: np.ndarray, mu: np.ndarray) -> float:
    order = np.argsort(y, kind="stable")
    cum = np.cumsum(mu[order])
    k = int(np.searchsorted(cum, 0.5 * cum[-1]))
    return float(y[order[min(k, y.size - 1)]])


def _contract_to_budget(z: np.ndarray, form: PackingCoveringForm, rho_inf: np.ndarray) -> np.ndarray:
    """Scale z toward its best constant until the slope budget holds exactly."""
    y, mu, L = form.y, form.weights, form.budget_L
    bar = _strong_mean(rho_inf, mu, z)
    if bar <= L:
        return z.copy()
    if L <= 0.0:
        c = _weighted_median(y, mu)
        return np.full_like(z, c)
    s = (L / bar) * (1.0 - 1e-12)
    # objective of c + s(z - c) is piecewise linear in c; kinks where it meets y_i
    cands = np.clip((y - s * z) / (1.0 - s), 0.0, 1.0)
    cands = np.append(cands, _weighted_median(y, mu))
    zs = cands[:, None] * (1.0 - s) + s * z[None, :]
    objs = np.abs(zs - y[None, :]) @ mu
    return zs[int(np.argmin(objs))]


def _mw_phase(form: PackingCoveringForm, target_w: float, iters: int = 300) -> np.ndarray:
    """Multiplicative weights over the covering and packing rows.

    Variables (w, z, zt, L) live in a box; each iteration plays the
    bang-bang minimizer of the weight-averaged violation, re-projects the
    dummy coupling zt = 1 - z, and reweights rows by their violation.
    Returns the iterate average's z component (seed for the polish phase).
    """
    y, mu, rho, L = form.y, form.weights, form.rho, form.budget_L
    n = form.n
    iu, ju = np.triu_indices(n, k=1)
    # covering blocks: (pair kind 1), (pair kind 2) over unordered pairs both
    # directions, plus the two absolute-value rows per point
    rows_r1 = []  # (i, j, rho_ij): L_i rho + zt_i + z_j >= 1
    for i, j in zip(iu, ju):
        rows_r1.append((i, j, rho[i, j]))
        rows_r1.append((j, i, rho[i, j]))
    r1_i = np.array([r[0] for r in rows_r1], dtype=np.int64)
    r1_j = np.array([r[1] for r in rows_r1], dtype=np.int64)
    r1_d = np.array([r[2] for r in rows_r1])
    lcap = max(1.0, L, float(np.max(np.abs(y[:, None] - y[None, :]) / np.where(rho > 0, rho, np.inf), initial=0.0)))
    eta = 0.5
    u_r1 = np.ones(r1_i.size)
    u_r2 = np.ones(r1_i.size)
    u_r3 = np.ones(n)
    u_r4 = np.ones(n)
    u_pack = 1.0
    u_obj = 1.0
    acc = np.zeros(n)
    for _ in range(iters):
        # gradient of weighted violation wrt each variable block
        g_w = -(u_r3 + u_r4) + u_obj * mu / max(target_w, 1e-9)
        g_z = np.zeros(n)
        np.add.at(g_z, r1_j, -u_r1)  # z_j in kind-1 rows
        np.add.at(g_z, r1_i, -u_r2)  # z_i in kind-2 rows
        g_z -= u_r3
        g_zt = np.zeros(n)
        np.add.at(g_zt, r1_i, -u_r1)
        np.add.at(g_zt, r1_j, -u_r2)
        g_zt -= u_r4
        g_l = np.zeros(n)
        np.add.at(g_l, r1_i, -u_r1 * r1_d)
        np.add.at(g_l, r1_i, -u_r2 * r1_d)
        g_l += u_pack * mu / max(L, 1e-9)
        w = np.where(g_w < 0, 1.0, 0.0)
        z_raw = np.where(g_z < 0, 1.0, 0.0)
        zt_raw = np.where(g_zt < 0, 1.0, 0.0)
        lv = np.where(g_l < 0, lcap, 0.0)
        z = 0.5 * (z_raw + 1.0 - zt_raw)  # project the coupling zt = 1 - z
        zt = 1.0 - z
        v_r1 = 1.0 - (lv[r1_i] * r1_d + zt[r1_i] + z[r1_j])
        v_r2 = 1.0 - (lv[r1_i] * r1_d + z[r1_i] + zt[r1_j])
        v_r3 = y - (w + z)
        v_r4 = (1.0 - y) - (w + zt)
        v_pack = np.dot(mu, lv) / max(L, 1e-9) - 1.0 if L > 0 else np.dot(mu, lv)
        v_obj = np.dot(mu, w) / max(target_w, 1e-9) - 1.0
        u_r1 *= np.exp(eta * np.clip(v_r1, -1.0, 1.0))
        u_r2 *= np.exp(eta * np.clip(v_r2, -1.0, 1.0))
        u_r3 *= np.exp(eta * np.clip(v_r3, -1.0, 1.0))
        u_r4 *= np.exp(eta * np.clip(v_r4, -1.0, 1.0))
        u_pack *= math.exp(eta * min(max(v_pack, -1.0), 1.0))
        u_obj *= math.exp(eta * min(max(v_obj, -1.0), 1.0))
        total = u_r1.sum() + u_r2.sum() + u_r3.sum() + u_r4.sum() + u_pack + u_obj
        u_r1 /= total
        u_r2 /= total
        u_r3 /= total
        u_r4 /= total
        u_pack /= total
        u_obj /= total
        acc += z
    return acc / iters


def _cd_polish(
    z0: np.ndarray,
    form: PackingCoveringForm,
    rho_inf: np.ndarray,
) -> tuple[np.ndarray, int]:
    """Cyclic coordinate descent on the z-only problem.

    Each coordinate moves to the projection of its label onto the interval
    where the budget still holds, found by bisection on the convex usage
    function. Deterministic and monotone in the objective. Stalls at points
    where no single coordinate can move alone; the segment searches in
    _escape_pass handle those.
    """
    y, mu, L = form.y, form.weights, form.budget_L
    n = form.n
    z = z0.copy()
    if n == 1:
        return y.copy(), 0
    max_sweeps = 400
    theta = 1e-13

    quot = np.abs(z[:, None] - z[None, :]) / rho_inf

    def row_stats():
        part = np.partition(quot, n - 2, axis=1)
        m1 = part[:, -1]
        m2 = part[:, -2] if n >= 2 else np.zeros(n)
        arg = np.argmax(quot, axis=1)
        return m1, m2, arg

    sweeps = 0
    obj = float(np.dot(mu, np.abs(z - y)))
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        prev_obj = obj
        for i in range(n):
            m1, m2, arg = row_stats()
            others = np.where(arg == i, m2, m1)  # slope of j ignoring column i
            others[i] = 0.0
            di = rho_inf[i]

            def usage(tv: float) -> float:
                qi = np.abs(tv - z) / di
                qi[i] = 0.0
                lam_i = float(np.max(qi))
                lam_others = np.maximum(others, qi)
                lam_others[i] = lam_i
                return float(np.dot(mu, lam_others))

            if usage(y[i]) <= L:
                new = float(y[i])
            else:
                # bisect toward y_i keeping the budget satisfied
                feas, infeas = float(z[i]), float(y[i])
                for _ in range(60):
                    mid = 0.5 * (feas + infeas)
                    if usage(mid) <= L:
                        feas = mid
                    else:
                        infeas = mid
                new = feas
            if new != z[i]:
                z[i] = new
                quot[i] = np.abs(z[i] - z) / rho_inf[i]
                quot[i, i] = 0.0
                quot[:, i] = quot[i]
        obj = float(np.dot(mu, np.abs(z - y)))
        if prev_obj - obj < theta:
            break
    else:
        if prev_obj - obj > 1e-6:
            raise NonconvergenceAfterMaxIters(
                f"coordinate descent still moving after {max_sweeps} sweeps"
            )
    return z, sweeps


_PAIR_FULL_LIMIT = 24
_TRIPLE_FULL_LIMIT = 12
_RANDOM_DIRS = 24
_ESCAPE_CYCLES = 6
_RECOVER_EVERY = 50
_SWEEP_EVERY = 100
_SUBGRAD_ITERS = 1500


def _line_search(
    z: np.ndarray,
    d: np.ndarray,
    form: PackingCoveringForm,
    rho_inf: np.ndarray,
    obj_now: float,
) -> tuple[float, np.ndarray] | None:
    """Exact objective minimum along z + a d inside the box and the budget.

    The budget is convex along any segment, so its feasible stretch is an
    interval around 0, found by bisection; the restricted objective is
    piecewise linear with kinks only where a coordinate crosses its label,
    so evaluating kinks and endpoints is exact. One-sided derivatives at 0
    prune sides that cannot improve (the restriction is convex).
    """
    y, mu, L = form.y, form.weights, form.budget_L
    nz = d != 0.0
    if not nz.any():
        return None
    sgn = np.sign(z - y)
    off_label = np.where(sgn == 0.0, np.abs(d), d * sgn)
    g_plus = float(np.dot(mu, off_label))
    g_minus = float(np.dot(mu, np.where(sgn == 0.0, np.abs(d), -d * sgn)))
    want_pos = g_plus < -1e-14
    want_neg = g_minus < -1e-14
    if not (want_pos or want_neg):
        return None
    pos, neg = d > 0.0, d < 0.0
    hi_cands = np.concatenate([(1.0 - z[pos]) / d[pos], -z[neg] / d[neg]])
    lo_cands = np.concatenate([-z[pos] / d[pos], (1.0 - z[neg]) / d[neg]])
    box_hi = float(hi_cands.min()) if hi_cands.size else 0.0
    box_lo = float(lo_cands.max()) if lo_cands.size else 0.0

    def feasible_limit(bound: float) -> float:
        if bound == 0.0:
            return 0.0
        if _strong_mean(rho_inf, mu, np.clip(z + bound * d, 0.0, 1.0)) <= L:
            return bound
        good, bad = 0.0, bound
        for _ in range(28):
            mid = 0.5 * (good + bad)
            if _strong_mean(rho_inf, mu, np.clip(z + mid * d, 0.0, 1.0)) <= L:
                good = mid
            else:
                bad = mid
        return good

    a_hi = feasible_limit(box_hi) if want_pos else 0.0
    a_lo = feasible_limit(box_lo) if want_neg else 0.0
    if a_hi == 0.0 and a_lo == 0.0:
        return None
    kinks = (y - z)[nz] / d[nz]
    cands = [a_lo, a_hi] + [float(k) for k in kinks if a_lo < k < a_hi]
    best = None
    for a in cands:
        if a == 0.0:
            continue
        zc = np.clip(z + a * d, 0.0, 1.0)
        oc = float(np.dot(mu, np.abs(zc - y)))
        if oc < obj_now - 1e-15 and (best is None or oc < best[0]):
            best = (oc, zc)
    return best


def _escape_pass(
    z: np.ndarray,
    form: PackingCoveringForm,
    rho_inf: np.ndarray,
    targets: list[np.ndarray],
    rng: np.random.Generator,
    triples: bool = True,
) -> float:
    """One deterministic round of the moves coordinate descent cannot make.

    Segment searches along the pull toward the labels, the pulls toward other
    candidate labelings, two- and three-coordinate exchanges that give up
    accuracy at one point to spend the freed budget at another, and a batch
    of seeded dense directions for descent cones the sparse patterns miss.
    Mutates z in place and returns the total objective gain of the round.
    """
    y, mu = form.y, form.weights
    n = form.n
    obj = float(np.dot(mu, np.abs(z - y)))
    start_obj = obj

    def try_dir(d: np.ndarray) -> None:
        nonlocal obj
        hit = _line_search(z, d, form, rho_inf, obj)
        if hit is not None:
            obj = hit[0]
            z[:] = hit[1]

    for d in [y - z] + [t - z for t in targets]:
        try_dir(d)
    if n <= _PAIR_FULL_LIMIT:
        pairs = [(i, j) for i in range(n - 1) for j in range(i + 1, n)]
    else:
        # only pair each point with its binding partner
        quot = np.abs(z[:, None] - z[None, :]) / rho_inf
        arg = np.argmax(quot, axis=1)
        pairs = sorted({(min(i, int(arg[i])), max(i, int(arg[i]))) for i in range(n)})
    e = np.zeros(n)
    for i, j in pairs:
        for sj in (1.0, -1.0):
            e[:] = 0.0
            e[i] = 1.0
            e[j] = sj
            try_dir(e)
    if triples and 3 <= n <= _TRIPLE_FULL_LIMIT:
        for i in range(n - 2):
            for j in range(i + 1, n - 1):
                for k in range(j + 1, n):
                    for si, sj, sk in ((1, 1, 1), (1, 1, -1), (1, -1, 1), (1, -1, -1)):
                        e[:] = 0.0
                        e[i], e[j], e[k] = si, sj, sk
                        try_dir(e)
    if n <= 96:
        for d in rng.standard_normal((_RANDOM_DIRS, n)):
            try_dir(d)
    return start_obj - obj


def _polish(
    z0: np.ndarray,
    form: PackingCoveringForm,
    rho_inf: np.ndarray,
    targets: list[np.ndarray],
) -> tuple[np.ndarray, int]:
    """Descend to a point no coordinate move or escape segment improves.

    The cubic-cost triple exchanges run only on the first escape cycle; later
    cycles keep the cheap moves, and the certification stage supplies the
    stronger global candidates.
    """
    rng = np.random.default_rng(1729)
    z, iters = _cd_polish(z0, form, rho_inf)
    for cycle in range(_ESCAPE_CYCLES):
        gain = _escape_pass(z, form, rho_inf, targets, rng, triples=cycle == 0)
        if gain < 1e-12:
            break
        z, sweeps = _cd_polish(z, form, rho_inf)
        iters += sweeps + 1
    return z, iters


def _max_flow(num: int, s: int, t: int, edges: list) -> tuple[float, list, list]:
    """Dinic max flow; edges are (u, v, cap, reverse_cap) with float caps.

    Returns the flow value, the residual source side (the minimal min cut),
    and the maximal min cut's source side (everything that can no longer
    reach the sink). Arc pairs sit at consecutive indices so eid ^ 1 is the
    reverse.
    """
    to: list[int] = []
    cap: list[float] = []
    adj: list[list[int]] = [[] for _ in range(num)]
    for u, v, c_fwd, c_rev in edges:
        adj[u].append(len(to))
        to.append(v)
        cap.append(c_fwd)
        adj[v].append(len(to))
        to.append(u)
        cap.append(c_rev)
    eps = 1e-13
    flow = 0.0
    while True:
        level = [-1] * num
        level[s] = 0
        queue = [s]
        for u in queue:
            for eid in adj[u]:
                v = to[eid]
                if cap[eid] > eps and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        if level[t] < 0:
            break
        ptr = [0] * num

        def push(u: int, room: float) -> float:
            if u == t:
                return room
            while ptr[u] < len(adj[u]):
                eid = adj[u][ptr[u]]
                v = to[eid]
                if cap[eid] > eps and level[v] == level[u] + 1:
                    got = push(v, min(room, cap[eid]))
                    if got > eps:
                        cap[eid] -= got
                        cap[eid ^ 1] += got
                        return got
                ptr[u] += 1
            return 0.0

        while True:
            pushed = push(s, math.inf)
            if pushed <= eps:
                break
            flow += pushed
    seen = [False] * num
    seen[s] = True
    queue = [s]
    for u in queue:
        for eid in adj[u]:
            v = to[eid]
            if cap[eid] > eps and not seen[v]:
                seen[v] = True
                queue.append(v)
    # walk backward from t along arcs with forward residual: node v still
    # reaches t iff some arc v->x has cap > 0 and x reaches t
    co = [False] * num
    co[t] = True
    queue = [t]
    for x in queue:
        for eid in adj[x]:
            v = to[eid]
            if cap[eid ^ 1] > eps and not co[v]:
                co[v] = True
                queue.append(v)
    return flow, seen, [not c for c in co]


def _tv_min(
    a: np.ndarray, yv: np.ndarray, omega: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Exact minimum of sum a_i |z_i - y_i| + sum_{i<j} omega_ij |z_i - z_j|.

    Levelwise decomposition: the energy of any z is the integral over
    thresholds t of the binary cut energy of {z > t}, and the unary terms
    change only at label values, so integrating the per-interval minimum cut
    values lower-bounds the minimum exactly (and attains it off ties). The
    minimal and maximal cuts assemble two extreme minimizing labelings that
    bracket the optimal face; both are returned as primal candidates. O(n)
    max-flow calls on n + 2 node graphs.
    """
    n = yv.size
    vs = np.unique(yv)
    if vs.size == 1:
        z = np.full(n, vs[0])
        return 0.0, z, z.copy()
    s, t = n, n + 1
    pair_arcs = [
        (i, j, float(omega[i, j]), float(omega[i, j]))
        for i in range(n - 1)
        for j in range(i + 1, n)
        if omega[i, j] > 1e-15
    ]
    c_lo = np.zeros(n, dtype=np.int64)
    c_hi = np.zeros(n, dtype=np.int64)
    total = 0.0
    for k in range(vs.size - 1):
        tau = 0.5 * (vs[k] + vs[k + 1])
        edges = list(pair_arcs)
        for i in range(n):
            if a[i] <= 0.0:
                continue
            if yv[i] > tau:
                edges.append((s, i, float(a[i]), 0.0))
            else:
                edges.append((i, t, float(a[i]), 0.0))
        value, side_lo, side_hi = _max_flow(n + 2, s, t, edges)
        total += (vs[k + 1] - vs[k]) * value
        for i in range(n):
            if side_lo[i]:
                c_lo[i] += 1
            if side_hi[i]:
                c_hi[i] += 1
    return total, vs[c_lo], vs[c_hi]


def _penalized_median_cd(
    z0: np.ndarray,
    form: PackingCoveringForm,
    lam: float,
    omega: np.ndarray,
    sweeps: int = 60,
) -> np.ndarray:
    """Coordinate descent on sum mu_i|z_i - y_i| + lam sum_{i<j} omega_ij|z_i - z_j|.

    Each coordinate moves to the weighted median of its own label and its
    neighbours' current values, the exact single-coordinate minimizer.
    """
    y, mu = form.y, form.weights
    n = form.n
    z = z0.astype(np.float64).copy()
    for _ in range(sweeps):
        moved = 0.0
        for i in range(n):
            wts = np.concatenate(([mu[i]], lam * omega[i]))
            vals = np.concatenate(([y[i]], z))
            keep = wts > 1e-18
            keep[1 + i] = False
            if not keep.any():
                continue
            new = _weighted_median(vals[keep], wts[keep])
            moved = max(moved, abs(new - z[i]))
            z[i] = new
        if moved < 1e-12:
            break
    return np.clip(z, 0.0, 1.0)


def _budget_subgradient(
    z0: np.ndarray,
    form: PackingCoveringForm,
    rho_inf: np.ndarray,
    lam_hat: float,
    target: float,
    iters: int = _SUBGRAD_ITERS,
) -> np.ndarray | None:
    """Polyak subgradient descent on obj + lam_hat * max(slope(z) - L, 0).

    For lam_hat above the constraint's true multiplier the penalty is exact,
    and with a target that lower-bounds the constrained optimum the best
    feasible iterate lands within (optimum - target) of it. Unlike the
    median moves this produces values between labels, which the optimum
    generically needs. Returns the best feasible iterate, or None.
    """
    y, mu, L = form.y, form.weights, form.budget_L
    n = form.n
    z = z0.astype(np.float64).copy()
    idx = np.arange(n)
    best_obj = math.inf
    best_z = None
    for t in range(iters):
        diff = z[:, None] - z[None, :]
        quot = np.abs(diff) / rho_inf
        bval = float(np.dot(mu, quot.max(axis=1)))
        obj = float(np.dot(mu, np.abs(z - y)))
        if bval <= L + 1e-12 and obj < best_obj:
            best_obj, best_z = obj, z.copy()
        phi = obj + lam_hat * max(bval - L, 0.0)
        g = mu * np.sign(z - y)
        if bval > L:
            arg = np.argmax(quot, axis=1)
            sgn = np.sign(diff[idx, arg])
            pull = lam_hat * mu * sgn / rho_inf[idx, arg]
            np.add.at(g, idx, pull)
            np.add.at(g, arg, -pull)
        gn = float(np.dot(g, g))
        if gn <= 1e-18:
            break
        step = (phi - target) / gn
        if step <= 0.0:
            step = 1e-4 / (1.0 + t) ** 0.5
        z = np.clip(z - step * g, 0.0, 1.0)
    return best_z


def _cut_refine_stage(
    form: PackingCoveringForm,
    rho_inf: np.ndarray,
    z0: np.ndarray,
    ub0: float,
    c: float,
) -> tuple[np.ndarray, float, float, int]:
    """Certify the incumbent to factor (1+c) against an ascending dual bound.

    The budget constraint is relaxed through row-stochastic pair splits
    alpha: sum_i mu_i sum_j alpha_ij |z_i - z_j| / rho_ij never exceeds the
    strong mean, so every multiplier lam >= 0 and every alpha give a valid
    lower bound inner(lam, alpha) - lam L, with the inner minimization
    solved exactly by levelwise cuts. A multiplicative-weights update on
    alpha and a damped supergradient step on lam climb toward the saddle,
    where the bound meets the optimum. Interleaved recovery turns the cut
    minimizers into feasible labelings through penalized median descent and
    exact-penalty subgradient descent wired to the current bound. Every
    piece of work is independent of c; the tolerance only decides when to
    stop, so tightening c continues the same trajectory and cannot worsen
    the result. Raises when the round budget ends uncertified.
    """
    y, mu, L = form.y, form.weights, form.budget_L
    n = form.n
    z_best = z0.copy()
    ub = ub0
    lb_best = 0.0  # the objective is nonnegative
    iters = 0

    def certified() -> bool:
        return ub <= (1.0 + c) * lb_best + 1e-12

    if certified():
        return z_best, ub, lb_best, iters
    inv_rho = np.where(np.isfinite(rho_inf), 1.0 / rho_inf, 0.0)
    np.fill_diagonal(inv_rho, 0.0)
    rounds = max(200, min(1600, 9600 // n))
    alpha = np.full((n, n), 1.0 / max(n - 1, 1))
    np.fill_diagonal(alpha, 0.0)
    lam = 1.0
    eta = 0.6
    const = np.full(n, _weighted_median(y, mu))

    def probe(lam_val: float, omega: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        nonlocal lb_best, iters
        iters += 1
        inner, z_lo, z_hi = _tv_min(mu, y, lam_val * omega)
        lb = inner - lam_val * L
        if lb > lb_best:
            lb_best = lb
        return z_lo, z_hi

    def usage_of(zv: np.ndarray, omega: np.ndarray) -> float:
        return float((omega * np.abs(zv[:, None] - zv[None, :])).sum()) / 2.0

    def take(zc: np.ndarray) -> None:
        nonlocal ub, z_best
        obj = float(np.dot(mu, np.abs(zc - y)))
        if obj < ub - 1e-15:
            ub, z_best = obj, zc.copy()

    def recover(lam_val: float, omega: np.ndarray, z_lo: np.ndarray, z_hi: np.ndarray) -> None:
        lam_hat = 4.0 * max(lam_val, 0.05)
        cands = []
        for z_start in (z_best, _contract_to_budget(z_lo, form, rho_inf), const):
            zf = _budget_subgradient(z_start, form, rho_inf, lam_hat, lb_best)
            if zf is not None:
                cands.append(zf)
                take(zf)
        zp = _penalized_median_cd(0.5 * (z_lo + z_hi), form, lam_val, omega)
        zc = _contract_to_budget(zp, form, rho_inf)
        cands.append(zc)
        take(zc)
        zc, _ = _cd_polish(z_best.copy(), form, rho_inf)
        take(zc)
        for zc in cands:
            hit = _line_search(z_best, zc - z_best, form, rho_inf, ub)
            if hit is not None:
                take(hit[1])

    for t in range(rounds):
        omega_dir = (mu[:, None] * alpha) * inv_rho
        omega = omega_dir + omega_dir.T
        z_lo, z_hi = probe(lam, omega)
        if (t + 1) % _SWEEP_EVERY == 0:
            # 1-d concave refinement over the multiplier at the current split
            lam_lo, lam_hi = 0.0, max(lam, 1e-6)
            for _ in range(40):
                a_lo, _ = probe(lam_hi, omega)
                if certified() or usage_of(a_lo, omega) <= L:
                    break
                lam_lo, lam_hi = lam_hi, 2.0 * lam_hi
            for _ in range(12):
                if certified():
                    break
                mid = 0.5 * (lam_lo + lam_hi)
                a_lo, _ = probe(mid, omega)
                if usage_of(a_lo, omega) > L:
                    lam_lo = mid
                else:
                    lam_hi = mid
        if (t + 1) % _RECOVER_EVERY == 0:
            recover(lam, omega, z_lo, z_hi)
        if certified():
            return z_best, ub, lb_best, iters
        diff = np.abs(z_lo[:, None] - z_lo[None, :])
        quot = diff * inv_rho
        scale = max(float(quot.max()), 1e-12)
        alpha = alpha * np.exp(eta * quot / scale)
        np.fill_diagonal(alpha, 0.0)
        row_sum = alpha.sum(axis=1)
        row_sum[row_sum <= 0.0] = 1.0
        alpha = alpha / row_sum[:, None]
        lam = max(0.0, lam + (0.5 / (1.0 + t) ** 0.5) * (usage_of(z_lo, omega) - L))
    zp, _ = _polish(z_best, form, rho_inf, [z_best])
    take(zp)
    if not certified():
        raise NonconvergenceAfterMaxIters(
            f"approximation gap not certified: incumbent {ub:.6e}, bound {lb_best:.6e}"
        )
    return z_best, ub, lb_best, iters


def approx_pc_solve(form: PackingCoveringForm, c: float) -> SmoothingSolution:
    """Approximate solve of the packing-covering form to factor (1+c).

    Pipeline: a fixed multiplicative-weights phase seeds candidate labelings;
    contraction toward a best constant restores exact budget feasibility;
    coordinate descent interleaved with escape segment searches polishes each
    candidate; the winner then enters the certification stage, which climbs a
    dual lower bound and refines the incumbent until the (1+c) gap provably
    holds. All covering rows hold exactly on output by construction (w_i =
    |z_i - y_i|, L_i = local slope of z at i). The search effort is fixed,
    sized for the tightest supported c, so tightening c never degrades the
    result; only the certification threshold itself depends on c.
    """
    if not 0.0 < c < 1.0:
        raise InvalidParameters("c must lie in (0, 1)")
    y, mu, L = form.y, form.weights, form.budget_L
    n = form.n
    rho_inf = form.rho.copy()
    np.fill_diagonal(rho_inf, np.inf)

    start_repaired = _contract_to_budget(y.copy(), form, rho_inf)
    const = np.full(n, _weighted_median(y, mu))
    starts = [start_repaired, const, _contract_to_budget(0.5 * (y + const), form, rho_inf)]
    mw_rows = 0
    if 2 <= n <= 96:
        target = max(float(np.dot(mu, np.abs(start_repaired - y))), 1e-6)
        z_mw = _mw_phase(form, target_w=target)
        starts.append(_contract_to_budget(z_mw, form, rho_inf))
        mw_rows = 2 * n * (n - 1) + 2 * n + 2
    polished: list[np.ndarray] = []
    objs: list[float] = []
    total_iters = 0
    for k, z0 in enumerate(starts):
        others = [s for t, s in enumerate(starts) if t != k]
        z, iters = _polish(z0, form, rho_inf, others)
        total_iters += iters
        polished.append(z)
        objs.append(float(np.dot(mu, np.abs(z - y))))
    best = int(np.argmin(objs))
    best_z, best_obj = polished[best], objs[best]
    if n == 1 or L <= 0.0:
        # single point returns its label; zero budget forces a constant, and
        # the weighted median constant is the exact optimum
        lower_bound = best_obj
    else:
        best_z, best_obj, lower_bound, iters = _cut_refine_stage(
            form, rho_inf, best_z, best_obj, c
        )
        total_iters += iters
    lam = local_slopes_from_quot(best_z, rho_inf)
    stats = SolverStats(
        backend="mw+cd",
        iterations=total_iters,
        constraint_count=mw_rows,
        extra={"starts": len(starts), "lower_bound": lower_bound},
    )
    return SmoothingSolution(
        z=best_z,
        per_point_budget=lam,
        objective=best_obj,
        stats=stats,
    )


def local_slopes_from_quot(z: np.ndarray, rho_inf: np.ndarray) -> np.ndarray:
    if z.size == 1:
        return np.zeros(1)
    return np.max(np.abs(z[:, None] - z[None, :]) / rho_inf, axis=1)


# ---------------------------------------------------------------------------
# public smoothing entry points


def _verify_dense(problem: RegSmoothingProblem, sol: SmoothingSolution) -> None:
    lab = problem.labeled
    rho = lab.space.dist_matrix()
    z, li = sol.z, sol.per_point_budget
    n = z.size
    resid = float(np.dot(lab.weights, li)) - problem.budget_L
    if n > 1:
        gap = np.abs(z[:, None] - z[None, :]) - li[:, None] * rho
        resid = max(resid, float(np.max(gap)))
    resid = max(resid, float(np.max(-li, initial=0.0)))
    resid = max(resid, float(np.max(z - 1.0, initial=0.0)), float(np.max(-z, initial=0.0)))
    if resid > _RESIDUAL_TOL:
        raise SolverFailure(f"dense solution residual {resid:.3e}")


def smooth_dense(problem: RegSmoothingProblem, backend: str = "auto") -> SmoothingSolution:
    """Solve the dense program; exact simplex for small n, approximate above."""
    lab = problem.labeled
    n = lab.space.n
    if backend == "auto":
        backend = "exact" if n <= 18 else "approx"
    if backend == "exact":
        lp = dense_lp(problem)
        try:
            res = exact_lp_solve(lp)
        except Infeasible as exc:  # constant z is always feasible
            raise SolverFailure(f"dense program reported infeasible: {exc}") from exc
        z = res.x[n : 2 * n]
        li = res.x[2 * n : 3 * n]
        sol = SmoothingSolution(
            z=z,
            per_point_budget=li,
            objective=float(res.objective),
            stats=SolverStats(
                backend="simplex",
                iterations=res.iterations,
                constraint_count=lp.a_ub.shape[0],
            ),
        )
    elif backend == "approx":
        sol = approx_pc_solve(pc_form(problem), problem.approx_c)
    else:
        raise InvalidParameters(f"unknown backend {backend!r}")
    _verify_dense(problem, sol)
    return sol


# ---------------------------------------------------------------------------
# hierarchical formulation


@dataclass(frozen=True)
class _HierStructure:
    """Constraint skeleton: per-level cells, aux variables, and slope pairs.

    aux_members[a] lists the points squeezed by aux a; rep_aux[i] and
    rep_dist[i] give the aux ids and distances of the slope rows of point i.
    Window rule: a level-k center p is a representative for x when
    radius_k <= dist(x, p) < 5 radius_k. Together with cell radius <= radius_k
    this covers every pair (i, j) at the level where dist(i,j) is between 2
    and 4 cell radii, giving true slope at most 1.5 L_i densely.
    """

    aux_members: tuple
    rep_aux: tuple
    rep_dist: tuple
    n_levels: int
    constraint_count: int


def _build_hier_structure(problem: RegSmoothingProblem) -> _HierStructure:
    space = problem.labeled.space
    n = space.n
    hier = build_hierarchy(space)
    dm = space.dist_matrix()
    levels = []
    for k in range(1, hier.depth):
        lv = hier.levels[k]
        levels.append((hier.radius_at(k), np.asarray(lv.center_indices, dtype=np.int64), lv.assignment))
    # one extra identity level below the hierarchy bottom so the smallest
    # interpoint distances also fall into a [2r, 4r) band
    levels.append((hier.radius_at(hier.depth - 1) / 2.0, np.arange(n), np.arange(n)))

    aux_members: list[np.ndarray] = []
    aux_id: dict[tuple[int, int], int] = {}
    rep_aux: list[list[int]] = [[] for _ in range(n)]
    rep_dist: list[list[float]] = [[] for _ in range(n)]
    for lvl, (radius, centers, assign) in enumerate(levels):
        for p in centers:
            near = np.flatnonzero((dm[:, p] >= radius) & (dm[:, p] < 5.0 * radius))
            if near.size == 0:
                continue
            key = (lvl, int(p))
            if key not in aux_id:
                aux_id[key] = len(aux_members)
                aux_members.append(np.flatnonzero(assign == p))
            a = aux_id[key]
            for i in near:
                rep_aux[int(i)].append(a)
                rep_dist[int(i)].append(float(dm[i, p]))
    squeeze_rows = 2 * sum(m.size for m in aux_members)
    slope_rows = 4 * sum(len(r) for r in rep_aux)
    count = 1 + 2 * n + squeeze_rows + slope_rows
    return _HierStructure(
        aux_members=tuple(aux_members),
        rep_aux=tuple(np.array(r, dtype=np.int64) for r in rep_aux),
        rep_dist=tuple(np.array(r) for r in rep_dist),
        n_levels=len(levels),
        constraint_count=count,
    )


def _hier_lp(problem: RegSmoothingProblem, hs: _HierStructure) -> LinearProgram:
    lab = problem.labeled
    n = lab.space.n
    y, mu = lab.labels, lab.weights
    na = len(hs.aux_members)
    nv = 3 * n + 2 * na  # w, z, L, z_hi, z_lo
    off_hi, off_lo = 3 * n, 3 * n + na

    rows, rhs = [], []
    budget = np.zeros(nv)
    budget[2 * n : 3 * n] = mu
    rows.append(budget)
    rhs.append(problem.budget_L)
    for i in range(n):
        r = np.zeros(nv)
        r[n + i] = 1.0
        r[i] = -1.0
        rows.append(r)
        rhs.append(float(y[i]))
        r = np.zeros(nv)
        r[n + i] = -1.0
        r[i] = -1.0
        rows.append(r)
        rhs.append(float(-y[i]))
    for a, members in enumerate(hs.aux_members):
        for mpt in members:
            r = np.zeros(nv)
            r[n + mpt] = 1.0
            r[off_hi + a] = -1.0
            rows.append(r)
            rhs.append(0.0)  # z_m <= z_hi
            r = np.zeros(nv)
            r[off_lo + a] = 1.0
            r[n + mpt] = -1.0
            rows.append(r)
            rhs.append(0.0)  # z_lo <= z_m
    for i in range(n):
        for a, d in zip(hs.rep_aux[i], hs.rep_dist[i]):
            for sign, off in ((1.0, off_hi), (-1.0, off_hi), (1.0, off_lo), (-1.0, off_lo)):
                r = np.zeros(nv)
                r[n + i] = sign
                r[off + a] = -sign
                r[2 * n + i] = -d
                rows.append(r)
                rhs.append(0.0)
    c = np.zeros(nv)
    c[:n] = mu
    bnds = (
        [(0.0, 1.0)] * n
        + [(0.0, 1.0)] * n
        + [(0.0, None)] * n
        + [(0.0, 1.0)] * na
        + [(0.0, 1.0)] * na
    )
    return LinearProgram(c=c, a_ub=np.array(rows), b_ub=np.array(rhs), bounds=tuple(bnds))


def _hier_cd(problem: RegSmoothingProblem, hs: _HierStructure) -> tuple[np.ndarray, np.ndarray, int]:
    """Coordinate descent over (z, aux) with the budget tracked through implied L_i."""
    lab = problem.labeled
    n = lab.space.n
    y = np.asarray(lab.labels, dtype=np.float64)
    mu = lab.weights
    L = problem.budget_L
    c = problem.approx_c
    na = len(hs.aux_members)
    pull: list[list[tuple[int, float]]] = [[] for _ in range(na)]  # aux -> [(i, dist)]
    squeeze_of: list[list[int]] = [[] for _ in range(n)]
    for a, members in enumerate(hs.aux_members):
        for mpt in members:
            squeeze_of[int(mpt)].append(a)
    for i in range(n):
        for a, d in zip(hs.rep_aux[i], hs.rep_dist[i]):
            pull[int(a)].append((i, float(d)))
    pull_ids = [np.array([p[0] for p in rows], dtype=np.int64) for rows in pull]
    pull_d = [np.array([p[1] for p in rows]) for rows in pull]

    def implied_l(i: int, zi: float, hi_v: np.ndarray, lo_v: np.ndarray) -> float:
        aux = hs.rep_aux[i]
        if aux.size == 0:
            return 0.0
        d = hs.rep_dist[i]
        return float(
            np.max(np.maximum(np.abs(zi - hi_v[aux]), np.abs(zi - lo_v[aux])) / d)
        )

    def run_from(z: np.ndarray, hi_v: np.ndarray, lo_v: np.ndarray) -> tuple[np.ndarray, float, int]:
        li = np.array([implied_l(i, z[i], hi_v, lo_v) for i in range(n)])
        max_sweeps = min(1500, int(math.ceil(30.0 / c)) + 150)
        theta = 1e-11 * c
        obj = float(np.dot(mu, np.abs(z - y)))
        sweeps = 0
        for sweep in range(max_sweeps):
            sweeps = sweep + 1
            prev = obj
            budget_used = float(np.dot(mu, li))
            for i in range(n):
                sq = squeeze_of[i]
                lo_b = max((lo_v[a] for a in sq), default=0.0)
                hi_b = min((hi_v[a] for a in sq), default=1.0)
                cap = (L - (budget_used - mu[i] * li[i])) / mu[i] if mu[i] > 0 else np.inf
                aux = hs.rep_aux[i]
                lo_t, hi_t = max(0.0, lo_b), min(1.0, hi_b)
                if aux.size and np.isfinite(cap):
                    d = hs.rep_dist[i]
                    lo_t = max(lo_t, float(np.max(np.maximum(hi_v[aux], lo_v[aux]) - cap * d)))
                    hi_t = min(hi_t, float(np.min(np.minimum(hi_v[aux], lo_v[aux]) + cap * d)))
                if lo_t > hi_t:
                    continue
                new = min(max(float(y[i]), lo_t), hi_t)
                if new != z[i]:
                    z[i] = new
                li_new = implied_l(i, z[i], hi_v, lo_v)
                budget_used += mu[i] * (li_new - li[i])
                li[i] = li_new
            for a in range(na):
                ids, dists = pull_ids[a], pull_d[a]
                if ids.size == 0:
                    continue
                members = hs.aux_members[a]
                zi = z[ids]
                wi = mu[ids]
                # slope contribution of each puller through its other aux rows
                others = np.empty(ids.size)
                for idx, i in enumerate(ids):
                    aux2, d2 = hs.rep_aux[i], hs.rep_dist[i]
                    keep = aux2 != a
                    if np.any(keep):
                        a2 = aux2[keep]
                        others[idx] = float(
                            np.max(
                                np.maximum(np.abs(z[i] - hi_v[a2]), np.abs(z[i] - lo_v[a2]))
                                / d2[keep]
                            )
                        )
                    else:
                        others[idx] = 0.0

                def aux_cost(hv: float, lv: float) -> float:
                    own = np.maximum(np.abs(zi - hv), np.abs(zi - lv)) / dists
                    return float(np.dot(wi, np.maximum(others, own)))

                zmax = float(np.max(z[members]))
                zmin = float(np.min(z[members]))
                best_h, best_l = float(hi_v[a]), float(lo_v[a])
                base = aux_cost(best_h, best_l)
                lo_s, hi_s = zmax, 1.0
                for _ in range(40):
                    m1 = lo_s + (hi_s - lo_s) / 3.0
                    m2 = hi_s - (hi_s - lo_s) / 3.0
                    if aux_cost(m1, best_l) <= aux_cost(m2, best_l):
                        hi_s = m2
                    else:
                        lo_s = m1
                cand = 0.5 * (lo_s + hi_s)
                if aux_cost(cand, best_l) < base:
                    best_h = cand
                    base = aux_cost(best_h, best_l)
                lo_s, hi_s = 0.0, zmin
                for _ in range(40):
                    m1 = lo_s + (hi_s - lo_s) / 3.0
                    m2 = hi_s - (hi_s - lo_s) / 3.0
                    if aux_cost(best_h, m1) <= aux_cost(best_h, m2):
                        hi_s = m2
                    else:
                        lo_s = m1
                cand = 0.5 * (lo_s + hi_s)
                if aux_cost(best_h, cand) < base:
                    best_l = cand
                hi_v[a], lo_v[a] = best_h, best_l
                for i in ids:
                    li[i] = implied_l(i, z[i], hi_v, lo_v)
            obj = float(np.dot(mu, np.abs(z - y)))
            if prev - obj < theta:
                break
        return z, obj, sweeps

    med = _weighted_median(y, mu)
    z1 = np.full(n, med)
    h1 = np.full(na, med)
    l1 = np.full(na, med)
    # squeeze-tight start from the labels, contracted into the budget
    z2 = y.copy()
    h2 = np.array([float(np.max(y[m])) for m in hs.aux_members]) if na else np.zeros(0)
    l2 = np.array([float(np.min(y[m])) for m in hs.aux_members]) if na else np.zeros(0)
    li2 = np.array([implied_l(i, z2[i], h2, l2) for i in range(n)])
    used = float(np.dot(mu, li2))
    if used > L:
        s = (L / used) * (1.0 - 1e-12) if used > 0 else 0.0
        z2 = med + s * (z2 - med)
        h2 = med + s * (h2 - med)
        l2 = med + s * (l2 - med)
    best = None
    total_sweeps = 0
    for z0, h0, l0 in ((z1, h1, l1), (z2, h2, l2)):
        z, obj, sweeps = run_from(z0.copy(), h0.copy(), l0.copy())
        total_sweeps += sweeps
        if best is None or obj < best[1] - 1e-15:
            best = (z, obj)
    z = best[0]
    li = local_slopes(problem.labeled.space, z)
    return z, li, total_sweeps


def smooth_hierarchical(problem: RegSmoothingProblem, backend: str = "auto") -> SmoothingSolution:
    """Solve the reduced hierarchical program; audits the true slope densely.

    The returned per-point budgets are the actual local slopes of z, which
    satisfy every encoded constraint with the distortion constant absorbed;
    the dense strong mean is asserted to stay within 6x the budget.
    """
    lab = problem.labeled
    n = lab.space.n
    if n == 1:
        z = np.asarray(lab.labels, dtype=np.float64).copy()
        return SmoothingSolution(
            z=z,
            per_point_budget=np.zeros(1),
            objective=0.0,
            stats=SolverStats(backend="trivial", iterations=0, constraint_count=0),
        )
    hs = _build_hier_structure(problem)
    if backend == "auto":
        backend = "exact" if n <= 12 else "cd"
    if backend == "exact":
        lp = _hier_lp(problem, hs)
        res = exact_lp_solve(lp)
        z = res.x[n : 2 * n]
        iters = res.iterations
        tag = "simplex-hier"
    elif backend == "cd":
        z, _, iters = _hier_cd(problem, hs)
        tag = "cd-hier"
    else:
        raise InvalidParameters(f"unknown backend {backend!r}")
    lam = local_slopes(lab.space, z)
    audit = float(np.dot(lab.weights, lam))
    if audit > 6.0 * problem.budget_L + 1e-9:
        raise SolverFailure(
            f"dense audit {audit:.6f} exceeds 6x budget {problem.budget_L:.6f}"
        )
    obj = float(np.dot(lab.weights, np.abs(z - np.asarray(lab.labels))))
    return SmoothingSolution(
        z=z,
        per_point_budget=lam,
        objective=obj,
        stats=SolverStats(
            backend=tag,
            iterations=iters,
            constraint_count=hs.constraint_count,
            extra={"levels": hs.n_levels, "audit_strong_mean": audit},
        ),
    )
