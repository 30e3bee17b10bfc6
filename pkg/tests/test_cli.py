import json
import math

import numpy as np
import pytest

from avgsmooth import cli
from avgsmooth.errors import SolverFailure
from avgsmooth.oracle import oracle_slopes
from avgsmooth.slope import profile
from avgsmooth.smooth_reg import RegSmoothingProblem, dense_lp, exact_lp_solve
from avgsmooth.synthetic import two_clusters
from avgsmooth.metric_core import LabeledSample, WeightedSample, build_space


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(str(c) for c in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def step_csv(tmp_path):
    xs = np.linspace(0.0, 1.0, 10)
    rows = [(f"{x:.17g}", "1" if x > 0.5 else "0") for x in xs]
    return _write_csv(tmp_path / "step.csv", ("x1", "label"), rows)


@pytest.fixture
def noisy_csv(tmp_path):
    rng = np.random.default_rng(41)
    xs = np.linspace(0.0, 1.0, 9)
    ys = np.clip((xs > 0.5) + rng.uniform(-0.2, 0.2, size=9), 0.0, 1.0)
    rows = [(f"{x:.17g}", f"{y:.17g}") for x, y in zip(xs, ys)]
    return _write_csv(tmp_path / "noisy.csv", ("x1", "label"), rows)


def test_stats_json_payload(step_csv, capsys):
    assert cli.main(["stats", "--input", step_csv]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["n"] == 10
    space = build_space(coords=np.linspace(0, 1, 10)[:, None])
    y = (np.linspace(0, 1, 10) > 0.5).astype(float)
    slopes = oracle_slopes(space, y)
    assert payload["local_slopes"] == pytest.approx(slopes, abs=1e-12)
    assert payload["lip"] == pytest.approx(max(slopes))
    prof = profile(WeightedSample(space), y)
    assert payload["strong_mean"] == pytest.approx(prof.strong_mean)
    assert payload["weak_mean"] == pytest.approx(prof.weak_mean)
    assert all(set(pt) == {"t", "mass"} for pt in payload["level_curve"])


def test_stats_csv_format(step_csv, capsys):
    assert cli.main(["stats", "--input", step_csv, "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "index,local_slope"
    assert len(lines) == 11
    space = build_space(coords=np.linspace(0, 1, 10)[:, None])
    y = (np.linspace(0, 1, 10) > 0.5).astype(float)
    slopes = oracle_slopes(space, y)
    for line, want in zip(lines[1:], slopes):
        idx, val = line.split(",")
        assert float(val) == pytest.approx(want, abs=1e-15)


def test_stats_byte_determinism_and_out_file(step_csv, tmp_path, capsys):
    assert cli.main(["stats", "--input", step_csv]) == 0
    first = capsys.readouterr().out
    assert cli.main(["stats", "--input", step_csv]) == 0
    assert capsys.readouterr().out == first
    out = tmp_path / "stats.json"
    assert cli.main(["stats", "--input", step_csv, "--out", str(out)]) == 0
    assert out.read_text(encoding="utf-8") == first


def test_stats_matrix_metric_matches_coords(step_csv, tmp_path, capsys):
    xs = np.linspace(0.0, 1.0, 10)
    dm = np.abs(xs[:, None] - xs[None, :])
    header = tuple(f"d{j}" for j in range(1, 11)) + ("label",)
    rows = [
        tuple(f"{v:.17g}" for v in dm[i]) + ("1" if xs[i] > 0.5 else "0",)
        for i in range(10)
    ]
    mat_csv = _write_csv(tmp_path / "mat.csv", header, rows)
    assert cli.main(["stats", "--input", step_csv]) == 0
    from_coords = capsys.readouterr().out
    assert cli.main(["stats", "--input", mat_csv, "--metric", "matrix"]) == 0
    from_matrix = capsys.readouterr().out
    assert json.loads(from_matrix)["local_slopes"] == pytest.approx(
        json.loads(from_coords)["local_slopes"], abs=1e-12
    )


def test_smooth_loose_budget_objective_zero(noisy_csv, capsys):
    assert (
        cli.main(["smooth", "--input", noisy_csv, "--mode", "reg-dense", "--budget-L", "50"])
        == 0
    )
    payload = json.loads(capsys.readouterr().out)
    assert payload["objective"] <= 1e-9
    assert payload["backend"] == "simplex"
    assert len(payload["z"]) == 9


def test_smooth_dense_matches_exact_solver(noisy_csv, capsys):
    assert (
        cli.main(["smooth", "--input", noisy_csv, "--mode", "reg-dense", "--budget-L", "0.8"])
        == 0
    )
    payload = json.loads(capsys.readouterr().out)
    rng = np.random.default_rng(41)
    xs = np.linspace(0.0, 1.0, 9)
    ys = np.clip((xs > 0.5) + rng.uniform(-0.2, 0.2, size=9), 0.0, 1.0)
    ys = np.array([float(f"{y:.17g}") for y in ys])
    labeled = LabeledSample(WeightedSample(build_space(coords=xs[:, None])), ys)
    problem = RegSmoothingProblem(labeled, budget_L=0.8)
    exact = exact_lp_solve(dense_lp(problem))
    assert payload["objective"] == pytest.approx(exact.objective, abs=1e-9)
    assert payload["strong_mean_z"] <= 0.8 + 1e-7


def test_smooth_hier_payload(noisy_csv, capsys):
    assert (
        cli.main(["smooth", "--input", noisy_csv, "--mode", "reg-hier", "--budget-L", "0.8"])
        == 0
    )
    payload = json.loads(capsys.readouterr().out)
    assert payload["constraint_count"] > 0
    assert len(payload["z"]) == 9
    assert np.all(np.asarray(payload["z"]) >= 0.0)
    assert np.all(np.asarray(payload["z"]) <= 1.0)


def test_smooth_class_two_clusters_empty_plan(tmp_path, capsys):
    space, y = two_clusters(n=30, sep=4.0, seed=11)
    rows = [
        (f"{c[0]:.17g}", f"{c[1]:.17g}", f"{v:g}") for c, v in zip(space.coords, y)
    ]
    path = _write_csv(tmp_path / "clusters.csv", ("x1", "x2", "label"), rows)
    assert cli.main(["smooth", "--input", path, "--mode", "class", "--budget-L", "1.0"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["relabeled_count"] == 0
    assert payload["relabeled_indices"] == []
    assert payload["audit_value"] <= 1.0
    assert payload["audit_b"] == 6.0
    assert [lev["t"] for lev in payload["per_level"]] == [2.0**i for i in range(6)]


def test_extend_on_train_points_reproduces_labels(step_csv, tmp_path, capsys):
    xs = np.linspace(0.0, 1.0, 10)
    test_csv = _write_csv(
        tmp_path / "test.csv", ("x1",), [(f"{x:.17g}",) for x in xs]
    )
    code = cli.main(
        ["extend", "--input", step_csv, "--test", test_csv,
         "--task", "classification"]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    want = [0.0] * 5 + [1.0] * 5
    assert payload["predictions"] == want
    assert payload["scores"] == want
    assert payload["n_train"] == 10 and payload["n_test"] == 10
    assert payload["removed_count"] == 0


def test_extend_regression_midpoints_follow_sawtooth(step_csv, tmp_path, capsys):
    mids = (np.linspace(0, 1, 10)[:-1] + np.linspace(0, 1, 10)[1:]) / 2.0
    test_csv = _write_csv(
        tmp_path / "mids.csv", ("x1",), [(f"{x:.17g}",) for x in mids]
    )
    code = cli.main(
        ["extend", "--input", step_csv, "--test", test_csv, "--epsilon", "0.1"]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    preds = np.asarray(payload["predictions"])
    assert preds.shape == (9,)
    assert np.all(preds >= 0.0) and np.all(preds <= 1.0)
    g = payload["guarantees"]
    assert g["lip_actual"] <= g["lip_bound"] + 1e-9
    assert g["sample_distortion"] <= 3 * 0.1 * max(1.0, g["sample_strong_mean"]) + 1e-9


def test_extend_schema_mismatch_exit_2(step_csv, tmp_path, capsys):
    bad = _write_csv(tmp_path / "bad.csv", ("x1", "x2"), [("0.1", "0.2")])
    assert cli.main(["extend", "--input", step_csv, "--test", bad]) == 2
    assert "invalid input" in capsys.readouterr().err


def test_bounds_table_matches_library(capsys):
    assert cli.main(["bounds", "--t", "0.5", "--n", "256"]) == 0
    payload = json.loads(capsys.readouterr().out)
    names = [b["name"] for b in payload["bounds"]]
    assert names == [
        "lip_cover",
        "ambient_cover",
        "empirical_cover",
        "distance_additive",
        "generalization",
        "generalization",
        "tv",
    ]
    by_name = {}
    for b in payload["bounds"]:
        by_name.setdefault(b["name"], b)
    assert by_name["lip_cover"]["value"] == pytest.approx(32.0 * math.log(16.0))
    assert by_name["ambient_cover"]["value"] == pytest.approx(1024.0 * math.log(32.0))
    kinds = [b["inputs"]["kind"] for b in payload["bounds"] if b["name"] == "generalization"]
    assert kinds == ["regression", "classification"]


def test_bounds_csv_rows(capsys):
    assert cli.main(["bounds", "--t", "0.5", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "name,params,value"
    assert len(lines) == 8


def test_demo_step_fidelity(capsys):
    assert cli.main(["demo-step"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["anchor_labels"] == [0.0] * 5 + [1.0] * 5
    assert payload["max_gap_central_rise"] <= 1e-9
    assert payload["nonmonotone_on_flat"] is True
    assert payload["grid_size"] == 1001
    assert len(payload["pmse"]) == 1001 and len(payload["amle"]) == 1001


def test_exit_code_2_on_invalid_parameters(noisy_csv, capsys):
    code = cli.main(
        ["smooth", "--input", noisy_csv, "--mode", "reg-dense", "--budget-L", "-1"]
    )
    assert code == 2
    assert "invalid input" in capsys.readouterr().err


def test_exit_code_2_on_bad_schema(tmp_path, capsys):
    bad = _write_csv(tmp_path / "bad.csv", ("x1", "value"), [("0.0", "0.5"), ("1.0", "0.5")])
    assert cli.main(["stats", "--input", bad]) == 2
    assert "unknown column" in capsys.readouterr().err


def test_exit_code_3_on_solver_failure(noisy_csv, monkeypatch, capsys):
    def boom(args):
        raise SolverFailure("synthetic failure")

    monkeypatch.setattr(cli, "cmd_stats", boom)
    assert cli.main(["stats", "--input", noisy_csv]) == 3
    assert "solver error" in capsys.readouterr().err


def test_exit_code_4_on_unreadable_or_malformed(tmp_path, capsys):
    assert cli.main(["stats", "--input", str(tmp_path / "missing.csv")]) == 4
    capsys.readouterr()
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("x1,label\n0.0,1,9\n", encoding="utf-8")
    assert cli.main(["stats", "--input", str(ragged)]) == 4
    capsys.readouterr()
    nonnum = tmp_path / "nonnum.csv"
    nonnum.write_text("x1,label\nzero,1\n", encoding="utf-8")
    assert cli.main(["stats", "--input", str(nonnum)]) == 4
    capsys.readouterr()
    empty = tmp_path / "empty.csv"
    empty.write_text("x1,label\n", encoding="utf-8")
    assert cli.main(["stats", "--input", str(empty)]) == 4


def test_weight_column_and_validation(tmp_path, capsys):
    rows = [("0.0", "0.1", "2"), ("0.5", "0.2", "1"), ("1.0", "0.9", "1")]
    path = _write_csv(tmp_path / "w.csv", ("x1", "label", "weight"), rows)
    assert cli.main(["stats", "--input", path]) == 0
    payload = json.loads(capsys.readouterr().out)
    space = build_space(coords=np.array([0.0, 0.5, 1.0])[:, None])
    prof = profile(
        WeightedSample(space, np.array([0.5, 0.25, 0.25])), np.array([0.1, 0.2, 0.9])
    )
    assert payload["strong_mean"] == pytest.approx(prof.strong_mean)
    bad = _write_csv(
        tmp_path / "wneg.csv", ("x1", "label", "weight"), [("0.0", "0.1", "-1"), ("1.0", "0.2", "2")]
    )
    assert cli.main(["stats", "--input", bad]) == 2
