"""Command line front end.

Subcommands:

* ``stats`` -- slope profile of a labeled sample.
* ``smooth`` -- budgeted smoothing: dense or hierarchical regression, or
  the bicriteria classification relabeling.
* ``extend`` -- fit a training CSV, predict a test CSV.
* ``bounds`` -- evaluate the closed-form cover/sample bounds on a grid.
* ``demo-step`` -- ten step-function anchors on [0, 1], extension values
  against linear interpolation on a dense grid.

Input CSVs are UTF-8 with a header row, comma separated, ``.`` decimal.
Coordinate columns are named ``x1..xd``; a full distance matrix uses
``d1..dn`` instead (with ``--metric matrix``).  ``weight`` and ``label``
columns are optional except where a command needs labels.  Weights are
normalized to sum to 1 by the loader.

Output goes to stdout or ``--out``, as JSON (default) or CSV.  Floats are
written with 17 significant digits, so equal results are byte-identical.

Exit codes: 0 success, 2 invalid input or parameters, 3 solver failure,
4 unreadable or malformed file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .bounds import (
    BoundReport,
    ambient_cover_bound,
    distance_additive_term,
    empirical_cover_bound,
    eps0_from,
    generalization_bound,
    lip_cover_bound,
    tv_bound,
)
from .errors import (
    AvgsmoothError,
    Infeasible,
    InfeasibleDemand,
    NonconvergenceAfterMaxIters,
    ParseError,
    SchemaMismatch,
    SolverFailure,
    TooLarge,
    Unbounded,
    ValidationError,
)
from .extend import extend_classification, extend_regression, round_to_label
from .metric_core import (
    METRIC_TAGS,
    FiniteMetricSpace,
    LabeledSample,
    WeightedSample,
    build_space,
)
from .pmse import build_extender
from .slope import local_slopes, profile
from .smooth_class import AUDIT_B, clsrp_bicriteria, slope_audit
from .smooth_reg import RegSmoothingProblem, smooth_dense, smooth_hierarchical

__all__ = ["main"]

_SOLVER_ERRORS = (
    Infeasible,
    Unbounded,
    SolverFailure,
    NonconvergenceAfterMaxIters,
    InfeasibleDemand,
    TooLarge,
)


# ---------------------------------------------------------------------------
# serialization


def _fmt(v: float) -> str:
    """17 significant digits; enough to round-trip a float64 exactly."""
    v = float(v)
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    return format(v, ".17g")


def _json_text(obj, parts: list) -> None:
    # insertion order of dicts is the emitted key order
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(_fmt(float(obj)))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        parts.append("{")
        for k, (key, val) in enumerate(obj.items()):
            if k:
                parts.append(", ")
            parts.append(json.dumps(str(key), ensure_ascii=False))
            parts.append(": ")
            _json_text(val, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        parts.append("[")
        for k, val in enumerate(obj):
            if k:
                parts.append(", ")
            _json_text(val, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _dump_json(obj) -> str:
    parts: list = []
    _json_text(obj, parts)
    parts.append("\n")
    return "".join(parts)


def _dump_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(c) if isinstance(c, (float, np.floating)) else c for c in row])
    return buf.getvalue()


def _emit(args, payload, header, rows) -> None:
    text = _dump_csv(header, rows) if args.format == "csv" else _dump_json(payload)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ParseError(f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# CSV ingestion


def _read_rows(path: str) -> list:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} is not valid UTF-8: {exc}") from exc
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if len(rows) < 2:
        raise ParseError(f"{path}: need a header row and at least one data row")
    return rows


def _split_header(header, path):
    coord_cols: dict = {}
    dist_cols: dict = {}
    weight_col = None
    label_col = None
    for idx, raw in enumerate(header):
        name = raw.strip().lower()
        if name == "weight":
            if weight_col is not None:
                raise SchemaMismatch(f"{path}: duplicate weight column")
            weight_col = idx
        elif name == "label":
            if label_col is not None:
                raise SchemaMismatch(f"{path}: duplicate label column")
            label_col = idx
        elif len(name) > 1 and name[0] in "xd" and name[1:].isdigit():
            target = coord_cols if name[0] == "x" else dist_cols
            j = int(name[1:])
            if j < 1 or j in target:
                raise SchemaMismatch(f"{path}: bad column name {raw!r}")
            target[j] = idx
        else:
            raise SchemaMismatch(f"{path}: unknown column {raw!r}")
    for cols, tag in ((coord_cols, "x"), (dist_cols, "d")):
        if cols and sorted(cols) != list(range(1, len(cols) + 1)):
            raise SchemaMismatch(f"{path}: {tag}-columns must be numbered 1..k without gaps")
    if bool(coord_cols) == bool(dist_cols):
        raise SchemaMismatch(f"{path}: give either x1..xd or d1..dn columns")
    return coord_cols, dist_cols, weight_col, label_col


def _cell_float(cell: str, path: str, row: int) -> float:
    try:
        return float(cell.strip())
    except ValueError as exc:
        raise ParseError(f"{path} row {row}: not a number: {cell!r}") from exc


class _Table:
    """Parsed CSV: coords or a distance matrix, plus optional extras."""

    def __init__(self, path: str):
        rows = _read_rows(path)
        coord_cols, dist_cols, weight_col, label_col = _split_header(rows[0], path)
        width = len(rows[0])
        data = rows[1:]
        for r, row in enumerate(data, start=2):
            if len(row) != width:
                raise ParseError(f"{path} row {r}: expected {width} cells, got {len(row)}")
        main = coord_cols or dist_cols
        order = [main[j] for j in sorted(main)]
        block = np.array(
            [[_cell_float(row[c], path, r) for c in order] for r, row in enumerate(data, start=2)]
        )
        self.path = path
        self.coords = block if coord_cols else None
        self.matrix = block if dist_cols else None
        self.weights = None
        self.labels = None
        if weight_col is not None:
            self.weights = np.array(
                [_cell_float(row[weight_col], path, r) for r, row in enumerate(data, start=2)]
            )
        if label_col is not None:
            self.labels = np.array(
                [_cell_float(row[label_col], path, r) for r, row in enumerate(data, start=2)]
            )

    def space(self, metric: str) -> FiniteMetricSpace:
        if metric == "matrix":
            if self.matrix is None:
                raise SchemaMismatch(f"{self.path}: --metric matrix needs d1..dn columns")
            if self.matrix.shape[0] != self.matrix.shape[1]:
                raise SchemaMismatch(
                    f"{self.path}: distance matrix must be square, got "
                    f"{self.matrix.shape[0]} rows and {self.matrix.shape[1]} d-columns"
                )
            return build_space(matrix=self.matrix)
        if self.coords is None:
            raise SchemaMismatch(f"{self.path}: --metric {metric} needs x1..xd columns")
        return build_space(coords=self.coords, metric_tag=metric)

    def weighted(self, metric: str) -> WeightedSample:
        space = self.space(metric)
        if self.weights is None:
            return WeightedSample(space)
        total = float(self.weights.sum())
        if not np.all(self.weights >= 0.0) or not math.isfinite(total) or total <= 0.0:
            raise ValidationError(f"{self.path}: weights must be nonnegative with positive sum")
        return WeightedSample(space, self.weights / total)

    def labeled(self, metric: str, kind: str) -> LabeledSample:
        if self.labels is None:
            raise SchemaMismatch(f"{self.path}: this command needs a label column")
        return LabeledSample(self.weighted(metric), self.labels, kind=kind)


# ---------------------------------------------------------------------------
# subcommands


def cmd_stats(args) -> int:
    labeled = _Table(args.input).labeled(args.metric, "real01")
    prof = profile(labeled.sample, labeled.labels)
    payload = {
        "n": labeled.space.n,
        "strong_mean": prof.strong_mean,
        "weak_mean": prof.weak_mean,
        "lip": prof.lip,
        "local_slopes": prof.local,
        "level_curve": [{"t": t, "mass": m} for t, m in prof.level_curve],
    }
    rows = [(i, s) for i, s in enumerate(prof.local)]
    _emit(args, payload, ("index", "local_slope"), rows)
    return 0


def _smooth_regression(args, formulation: str):
    labeled = _Table(args.input).labeled(args.metric, "real01")
    problem = RegSmoothingProblem(
        labeled, budget_L=args.budget_L, approx_c=args.approx_c, formulation=formulation
    )
    if formulation == "dense":
        sol = smooth_dense(problem)
    else:
        sol = smooth_hierarchical(problem)
    payload = {
        "mode": args.mode,
        "n": labeled.space.n,
        "budget_L": args.budget_L,
        "approx_c": args.approx_c,
        "backend": sol.stats.backend,
        "iterations": sol.stats.iterations,
        "constraint_count": sol.stats.constraint_count,
        "objective": sol.objective,
        "strong_mean_z": float(np.dot(labeled.weights, sol.per_point_budget)),
        "z": sol.z,
        "per_point_budget": sol.per_point_budget,
    }
    for key, val in sorted(sol.stats.extra.items()):
        payload[key] = val
    rows = list(zip(range(labeled.space.n), sol.z, sol.per_point_budget))
    return payload, rows


def _smooth_classification(args):
    labeled = _Table(args.input).labeled(args.metric, "binary")
    plan = clsrp_bicriteria(labeled, args.budget_L)
    final = plan.apply(labeled.labels)
    audit = slope_audit(labeled.space, final, args.budget_L, AUDIT_B)
    slopes = local_slopes(labeled.space, final)
    payload = {
        "mode": "class",
        "n": labeled.space.n,
        "budget_L": args.budget_L,
        "relabeled_count": len(plan.relabeled_indices),
        "relabeled_indices": list(plan.relabeled_indices),
        "levels_used": list(plan.levels_used),
        "audit_b": AUDIT_B,
        "audit_value": audit,
        "per_level": [
            {
                "t": lev.t,
                "net_size": len(lev.net),
                "suspect_entries": len(lev.suspect),
                "chosen_entries": len(lev.chosen),
                "relabeled": len(lev.relabeled),
            }
            for lev in plan.per_level
        ],
        "z": final,
        "per_point_budget": slopes,
    }
    rows = list(zip(range(labeled.space.n), final, slopes))
    return payload, rows


def cmd_smooth(args) -> int:
    if args.mode == "class":
        payload, rows = _smooth_classification(args)
    else:
        payload, rows = _smooth_regression(args, "dense" if args.mode == "reg-dense" else "hierarchical")
    _emit(args, payload, ("index", "z", "per_point_budget"), rows)
    return 0


def cmd_extend(args) -> int:
    train = _Table(args.input)
    test = _Table(args.test)
    if args.metric == "matrix" or train.coords is None:
        raise SchemaMismatch("extension prediction needs coordinate-backed inputs")
    if test.coords is None:
        raise SchemaMismatch(f"{args.test}: test points need x1..xd columns")
    if test.coords.shape[1] != train.coords.shape[1]:
        raise SchemaMismatch(
            f"dimension mismatch: train has {train.coords.shape[1]} coordinates, "
            f"test has {test.coords.shape[1]}"
        )
    kind = "binary" if args.task == "classification" else "real01"
    labeled = train.labeled(args.metric, kind)
    if args.task == "classification":
        res = extend_classification(labeled)
        scores = res.extender.eval_coords(test.coords)
        preds = round_to_label(scores)
    else:
        res = extend_regression(labeled, args.epsilon)
        scores = res.extender.eval_coords(test.coords)
        preds = scores
    g = res.guarantees
    payload = {
        "task": args.task,
        "epsilon": res.epsilon,
        "n_train": labeled.space.n,
        "n_test": test.coords.shape[0],
        "removed_count": len(res.removed_indices),
        "net_size": len(res.net_indices),
        "guarantees": {
            "sample_distortion": g.sample_distortion,
            "lip_bound": g.lip_bound,
            "lip_actual": g.lip_actual,
            "sample_strong_mean": g.sample_strong_mean,
            "sample_weak_mean": g.sample_weak_mean,
        },
        "predictions": preds,
    }
    if args.task == "classification":
        payload["scores"] = scores
    rows = [(i, p) for i, p in enumerate(preds)]
    _emit(args, payload, ("index", "prediction"), rows)
    return 0


def _bound_rows(args) -> list:
    reports: list[BoundReport] = []
    for t in args.t:
        reports.append(lip_cover_bound(t, args.budget_L, args.dim))
        reports.append(ambient_cover_bound(t, args.budget_L, args.dim))
    eps0 = eps0_from(args.n, args.budget_L, args.dim, args.c_delta)
    reports.append(empirical_cover_bound(1.0, eps0, args.budget_L, args.dim))
    reports.append(distance_additive_term(args.n, args.budget_L, args.dim, args.delta))
    for kind in ("regression", "classification"):
        reports.append(
            generalization_bound(args.n, args.budget_L, args.dim, args.delta, args.c_delta, kind)
        )
    reports.append(tv_bound(args.m_cells, args.n, args.delta))
    return reports


def cmd_bounds(args) -> int:
    reports = _bound_rows(args)
    payload = {
        "bounds": [
            {
                "name": r.name,
                "inputs": dict(r.inputs),
                "value": r.value,
                "clamped": r.clamped,
                "notes": r.notes,
            }
            for r in reports
        ]
    }
    def one(v):
        return _fmt(v) if isinstance(v, (float, np.floating)) else str(v)

    rows = [
        (r.name, ";".join(f"{k}={one(v)}" for k, v in r.inputs.items()), r.value)
        for r in reports
    ]
    _emit(args, payload, ("name", "params", "value"), rows)
    return 0


def cmd_demo_step(args) -> int:
    anchors_x = np.arange(10) / 9.0
    anchor_labels = (anchors_x > 0.5).astype(np.float64)
    anchor_space = build_space(coords=anchors_x[:, None])
    ext = build_extender(anchor_space, np.arange(10), anchor_labels)
    grid = np.linspace(0.0, 1.0, 1001)
    pmse = ext.eval_coords(grid[:, None])
    amle = np.interp(grid, anchors_x, anchor_labels)

    rise = (grid >= 4.0 / 9.0 - 1e-12) & (grid <= 5.0 / 9.0 + 1e-12)
    max_gap_rise = float(np.max(np.abs(pmse[rise] - amle[rise])))
    flat = (grid >= 0.0) & (grid <= 1.0 / 9.0 + 1e-12)
    steps = np.diff(pmse[flat])
    nonmonotone = bool(np.any(steps > 0.0) and np.any(steps < 0.0))

    payload = {
        "anchor_x": anchors_x,
        "anchor_labels": anchor_labels,
        "grid_size": grid.size,
        "max_gap_central_rise": max_gap_rise,
        "nonmonotone_on_flat": nonmonotone,
        "x": grid,
        "pmse": pmse,
        "amle": amle,
    }
    rows = list(zip(grid, pmse, amle))
    _emit(args, payload, ("x", "pmse", "amle"), rows)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avgsmooth",
        description="regression and classification on finite metric spaces "
        "under average-smoothness budgets",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized helpers")
    reader = argparse.ArgumentParser(add_help=False)
    reader.add_argument("--input", required=True, help="input CSV")
    reader.add_argument("--metric", choices=METRIC_TAGS + ("matrix",), default="euclidean")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", parents=[common, reader], help="slope profile of a labeled CSV")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("smooth", parents=[common, reader], help="smooth labels under a slope budget")
    p.add_argument("--mode", choices=("reg-dense", "reg-hier", "class"), default="reg-dense")
    p.add_argument("--budget-L", type=float, required=True, dest="budget_L")
    p.add_argument("--approx-c", type=float, default=0.1, dest="approx_c")
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("extend", parents=[common, reader], help="fit a train CSV, predict a test CSV")
    p.add_argument("--test", required=True, help="test CSV with x1..xd columns")
    p.add_argument("--task", choices=("regression", "classification"), default="regression")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("bounds", parents=[common], help="closed-form bound table")
    p.add_argument("--budget-L", type=float, default=1.0, dest="budget_L")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--c-delta", type=float, default=1.0, dest="c_delta")
    p.add_argument("--t", type=float, action="append", default=None, help="cover scale, repeatable")
    p.add_argument("--n", type=int, default=256, help="sample size entering the bounds")
    p.add_argument("--dim", type=float, default=1.0, help="doubling dimension")
    p.add_argument("--m-cells", type=int, default=4, dest="m_cells")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("demo-step", parents=[common], help="step-anchor extension demo")
    p.set_defaults(func=cmd_demo_step)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "t", None) is None and args.command == "bounds":
        args.t = [0.2, 0.3, 0.5]
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except _SOLVER_ERRORS as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except AvgsmoothError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
