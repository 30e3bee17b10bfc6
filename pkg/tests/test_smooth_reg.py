import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avgsmooth import (
    LabeledSample,
    LinearProgram,
    RegSmoothingProblem,
    WeightedSample,
    approx_pc_solve,
    build_space,
    dense_lp,
    exact_lp_solve,
    local_slopes,
    pc_form,
    profile,
    smooth_dense,
    smooth_hierarchical,
)
from avgsmooth.errors import Infeasible, InvalidParameters, Unbounded
from avgsmooth.metric_core import aspect_ratio
from avgsmooth.smooth_reg import _build_hier_structure
from avgsmooth.oracle import oracle_constant_fit, oracle_lp_vertices, oracle_slopes, oracle_weak_mean
from avgsmooth.synthetic import noisy_step

from conftest import random_labeled


def _uniform_labeled(coords, y):
    space = build_space(coords=np.asarray(coords, dtype=float).reshape(len(y), -1))
    return LabeledSample(WeightedSample(space), np.asarray(y, dtype=float))


def _check_solution(problem, sol, tol=1e-7):
    labeled = problem.labeled
    n = labeled.space.n
    assert np.all(sol.z >= -tol) and np.all(sol.z <= 1.0 + tol)
    assert np.all(sol.per_point_budget >= -tol)
    assert float(np.dot(labeled.weights, sol.per_point_budget)) <= problem.budget_L + tol
    assert sol.objective == pytest.approx(
        float(np.dot(labeled.weights, np.abs(sol.z - labeled.labels))), abs=1e-9
    )
    dm = labeled.space.dist_matrix()
    for i in range(n):
        for j in range(n):
            if i != j:
                assert abs(sol.z[i] - sol.z[j]) <= sol.per_point_budget[i] * dm[i, j] + tol


# ---------------------------------------------------------------------------
# reference simplex


def test_lp_one_var():
    lp = LinearProgram(c=np.array([1.0]), a_ub=np.array([[-1.0]]), b_ub=np.array([-1.0]))
    sol = exact_lp_solve(lp)
    assert sol.x[0] == pytest.approx(1.0)
    assert sol.objective == pytest.approx(1.0)


def test_lp_two_var_known_vertex():
    # min -x - 2y over x + y <= 3, x <= 2, y <= 2, x,y >= 0: vertex (1, 2)
    lp = LinearProgram(
        c=np.array([-1.0, -2.0]),
        a_ub=np.array([[1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]),
        b_ub=np.array([3.0, 2.0, 2.0]),
    )
    sol = exact_lp_solve(lp)
    assert np.allclose(sol.x, [1.0, 2.0], atol=1e-9)
    assert sol.objective == pytest.approx(-5.0)


def test_lp_infeasible_and_unbounded():
    with pytest.raises(Infeasible):
        exact_lp_solve(
            LinearProgram(c=np.array([1.0]), a_ub=np.array([[1.0]]), b_ub=np.array([-1.0]))
        )
    with pytest.raises(Unbounded):
        exact_lp_solve(
            LinearProgram(c=np.array([-1.0]), a_ub=np.array([[0.0]]), b_ub=np.array([1.0]))
        )


def test_lp_equality_rows():
    # min x + y with x + y = 2, x <= 0.5
    lp = LinearProgram(
        c=np.array([1.0, 1.0]),
        a_ub=np.array([[1.0, 0.0]]),
        b_ub=np.array([0.5]),
        a_eq=np.array([[1.0, 1.0]]),
        b_eq=np.array([2.0]),
    )
    sol = exact_lp_solve(lp)
    assert sol.objective == pytest.approx(2.0)
    assert sol.x[0] + sol.x[1] == pytest.approx(2.0)


def test_lp_matches_vertex_oracle_random(rng):
    for trial in range(25):
        d = int(rng.integers(2, 4))
        m = int(rng.integers(2, 6))
        a = rng.normal(size=(m, d))
        x0 = rng.uniform(0.2, 0.8, size=d)
        b = a @ x0 + rng.uniform(0.05, 1.0, size=m)  # strictly feasible at x0
        c = rng.normal(size=d)
        # box the polytope so both solvers see the same bounded feasible set
        a_full = np.vstack([a, np.eye(d), -np.eye(d)])
        b_full = np.concatenate([b, np.full(d, 2.0), np.zeros(d)])
        ref_obj, _ = oracle_lp_vertices(list(c), [list(r) for r in a_full], list(b_full))
        lp = LinearProgram(c=c, a_ub=a, b_ub=b, bounds=[(0.0, 2.0)] * d)
        sol = exact_lp_solve(lp)
        assert sol.objective == pytest.approx(ref_obj, abs=1e-7)


def test_lp_degenerate_terminates():
    # duplicated rows force degenerate pivots; Bland's rule must still halt
    lp = LinearProgram(
        c=np.array([1.0, 1.0]),
        a_ub=np.array([[-1.0, -1.0], [-1.0, -1.0], [-1.0, -1.0], [-1.0, 0.0]]),
        b_ub=np.array([-1.0, -1.0, -1.0, 0.0]),
    )
    sol = exact_lp_solve(lp)
    assert sol.objective == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# dense smoothing


def test_budget_zero_forces_constant():
    labeled = _uniform_labeled([0.0, 0.5, 1.0], [0.0, 1.0, 0.0])
    problem = RegSmoothingProblem(labeled, budget_L=0.0)
    sol = smooth_dense(problem)
    assert np.max(sol.z) - np.min(sol.z) <= 1e-9
    assert sol.objective == pytest.approx(1.0 / 3.0, abs=1e-9)
    _, ref_obj = oracle_constant_fit(labeled.labels, labeled.weights)
    assert sol.objective <= ref_obj + 1e-9
    _check_solution(problem, sol)


def test_huge_budget_copies_labels(rng):
    labeled = random_labeled(rng, 7)
    lip = float(np.max(oracle_slopes(labeled.space, labeled.labels)))
    problem = RegSmoothingProblem(labeled, budget_L=lip + 1.0)
    sol = smooth_dense(problem)
    assert sol.objective <= 1e-12
    assert np.allclose(sol.z, labeled.labels, atol=1e-9)


def test_single_point():
    labeled = _uniform_labeled([0.3], [0.4])
    sol = smooth_dense(RegSmoothingProblem(labeled, budget_L=1.0))
    assert sol.z[0] == pytest.approx(0.4)
    assert sol.objective == 0.0
    hol = smooth_hierarchical(RegSmoothingProblem(labeled, budget_L=1.0, formulation="hierarchical"))
    assert hol.z[0] == pytest.approx(0.4)


def test_problem_validation(rng):
    labeled = random_labeled(rng, 3)
    with pytest.raises(InvalidParameters):
        RegSmoothingProblem(labeled, budget_L=-1.0)
    with pytest.raises(InvalidParameters):
        RegSmoothingProblem(labeled, budget_L=1.0, approx_c=0.0)
    with pytest.raises(InvalidParameters):
        RegSmoothingProblem(labeled, budget_L=1.0, formulation="sparse")
    with pytest.raises(InvalidParameters):
        smooth_dense(RegSmoothingProblem(labeled, budget_L=1.0), backend="cplex")


def test_dense_lp_shape(rng):
    labeled = random_labeled(rng, 5)
    problem = RegSmoothingProblem(labeled, budget_L=0.7)
    lp = dense_lp(problem)
    n = 5
    assert lp.c.shape == (3 * n,)
    assert lp.a_ub.shape[0] == 1 + 2 * n + 2 * n * (n - 1)


def test_exact_solution_feasible_and_certified(rng):
    for trial in range(8):
        labeled = random_labeled(rng, int(rng.integers(2, 9)))
        budget = float(rng.uniform(0.05, 2.0))
        problem = RegSmoothingProblem(labeled, budget_L=budget)
        sol = smooth_dense(problem, backend="exact")
        assert sol.stats.backend == "simplex"
        _check_solution(problem, sol)


def test_approx_within_factor_of_exact(rng):
    for trial in range(6):
        labeled = random_labeled(rng, 6)
        budget = float(rng.uniform(0.1, 1.5))
        for c in (0.05, 0.2):
            problem = RegSmoothingProblem(labeled, budget_L=budget, approx_c=c)
            exact = smooth_dense(problem, backend="exact")
            approx = smooth_dense(problem, backend="approx")
            assert approx.stats.backend == "mw+cd"
            _check_solution(problem, approx)
            assert approx.objective <= (1.0 + c) * exact.objective + 1e-9


def test_approx_trivial_already_feasible(rng):
    labeled = random_labeled(rng, 8)
    lip = float(np.max(oracle_slopes(labeled.space, labeled.labels)))
    problem = RegSmoothingProblem(labeled, budget_L=lip + 0.5, approx_c=0.05)
    sol = smooth_dense(problem, backend="approx")
    assert sol.objective <= 0.05


def test_objective_monotone_in_budget(rng):
    labeled = random_labeled(rng, 7)
    objs = []
    for budget in (0.0, 0.2, 0.5, 1.0, 3.0):
        sol = smooth_dense(RegSmoothingProblem(labeled, budget_L=budget), backend="exact")
        objs.append(sol.objective)
    assert all(objs[i] >= objs[i + 1] - 1e-9 for i in range(len(objs) - 1))


def test_smaller_c_never_worse(rng):
    labeled = random_labeled(rng, 9)
    budget = 0.4
    loose = smooth_dense(
        RegSmoothingProblem(labeled, budget_L=budget, approx_c=0.5), backend="approx"
    )
    tight = smooth_dense(
        RegSmoothingProblem(labeled, budget_L=budget, approx_c=0.05), backend="approx"
    )
    assert tight.objective <= loose.objective + 1e-9


def test_approx_deterministic(rng):
    labeled = random_labeled(rng, 10)
    problem = RegSmoothingProblem(labeled, budget_L=0.3, approx_c=0.1)
    a = smooth_dense(problem, backend="approx")
    b = smooth_dense(problem, backend="approx")
    assert np.array_equal(a.z, b.z)
    assert a.objective == b.objective


def test_pc_form_mirrors_problem(rng):
    labeled = random_labeled(rng, 6)
    problem = RegSmoothingProblem(labeled, budget_L=0.8)
    form = pc_form(problem)
    assert form.n == 6
    assert np.array_equal(form.y, labeled.labels)
    assert np.array_equal(form.weights, labeled.weights)
    assert form.budget_L == 0.8
    sol = approx_pc_solve(form, 0.2)
    _check_solution(problem, sol)


def test_weak_route_via_log_budget(rng):
    # smoothing under the strong mean at budget 2 L ln n is at least as good
    # as the best weak-mean-constrained labeling, found here by grid search
    grid = np.linspace(0.0, 1.0, 5)
    for n in (3, 4):
        labeled = random_labeled(rng, n)
        uniform = LabeledSample(WeightedSample(labeled.space), labeled.labels)
        L = 0.6
        best = math.inf
        w = [1.0 / n] * n
        for combo in np.ndindex(*([grid.size] * n)):
            z = grid[list(combo)]
            slopes = oracle_slopes(uniform.space, z)
            if oracle_weak_mean(slopes, w) <= L + 1e-12:
                best = min(best, float(np.mean(np.abs(z - uniform.labels))))
        problem = RegSmoothingProblem(uniform, budget_L=2.0 * L * math.log(n))
        sol = smooth_dense(problem, backend="exact")
        assert sol.objective <= best + 1e-9


# ---------------------------------------------------------------------------
# hierarchical formulation


def test_hier_matches_dense_small(rng):
    for trial in range(5):
        labeled = random_labeled(rng, int(rng.integers(2, 9)))
        budget = float(rng.uniform(0.1, 1.0))
        dense = smooth_dense(RegSmoothingProblem(labeled, budget_L=budget), backend="exact")
        hier = smooth_hierarchical(
            RegSmoothingProblem(labeled, budget_L=budget, formulation="hierarchical"),
            backend="exact",
        )
        # fewer slope rows make the reduced program a relaxation, so it can
        # undershoot dense slightly; the audited window keeps it within 3x
        assert hier.objective <= 3.0 * dense.objective + 1e-7
        prof = profile(labeled.sample, hier.z)
        assert prof.strong_mean <= 6.0 * budget + 1e-7


def test_hier_huge_budget(rng):
    labeled = random_labeled(rng, 6)
    lip = float(np.max(oracle_slopes(labeled.space, labeled.labels)))
    sol = smooth_hierarchical(
        RegSmoothingProblem(labeled, budget_L=lip + 1.0, formulation="hierarchical")
    )
    assert sol.objective <= 1e-9
    assert np.allclose(sol.z, labeled.labels, atol=1e-6)


def test_hier_medium_instance():
    space, y = noisy_step(n=32)
    labeled = LabeledSample(WeightedSample(space), y)
    budget = 0.8
    problem = RegSmoothingProblem(labeled, budget_L=budget, formulation="hierarchical")
    hier = smooth_hierarchical(problem)
    dense = smooth_dense(RegSmoothingProblem(labeled, budget_L=budget, approx_c=0.05))
    prof = profile(labeled.sample, hier.z)
    assert prof.strong_mean <= 6.0 * budget + 1e-7
    assert hier.objective <= 3.0 * dense.objective + 1e-7
    # constraint count scales like n log(aspect), nowhere near the dense n^2
    cap = hier.stats.constraint_count / (32 * math.log2(aspect_ratio(space)))
    assert cap <= 40.0


def test_hier_row_count_beats_dense_at_scale():
    # the n log(aspect) growth crosses below the dense 2n(n-1) around n=100;
    # structure construction alone shows it, no solve needed
    space, y = noisy_step(n=256)
    labeled = LabeledSample(WeightedSample(space), y)
    problem = RegSmoothingProblem(labeled, budget_L=0.8, formulation="hierarchical")
    hs = _build_hier_structure(problem)
    assert hs.constraint_count < 0.5 * 2 * 256 * 255


def test_hier_deterministic():
    space, y = noisy_step(n=24)
    labeled = LabeledSample(WeightedSample(space), y)
    problem = RegSmoothingProblem(labeled, budget_L=0.5, formulation="hierarchical")
    a = smooth_hierarchical(problem)
    b = smooth_hierarchical(problem)
    assert np.array_equal(a.z, b.z)


@settings(max_examples=15, deadline=None)
@given(
    ys=st.lists(st.floats(0, 1, allow_nan=False), min_size=2, max_size=6),
    budget=st.floats(0.0, 3.0, allow_nan=False),
)
def test_dense_always_solvable(ys, budget):
    n = len(ys)
    labeled = _uniform_labeled(np.linspace(0, 1, n), ys)
    sol = smooth_dense(RegSmoothingProblem(labeled, budget_L=budget), backend="exact")
    _check_solution(RegSmoothingProblem(labeled, budget_L=budget), sol)
