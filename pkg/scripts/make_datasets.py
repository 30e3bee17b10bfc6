#!/usr/bin/env python3
"""Regenerate the shipped datasets under data/.

Every generator is seeded, so rerunning this script reproduces the committed
CSVs byte for byte; diff the output against the repo to catch drift. Files
use the CLI's CSV schema: x1..xd coordinate columns plus a label column,
floats at 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import os

from avgsmooth import synthetic


def write_dataset(path: str, coords, labels) -> int:
    d = coords.shape[1]
    header = [f"x{j + 1}" for j in range(d)] + ["label"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row, y in zip(coords, labels):
            writer.writerow([format(float(v), ".17g") for v in row] + [format(float(y), ".17g")])
    return len(labels)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    default_out = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")
    ap.add_argument("--outdir", default=default_out, help="directory for the CSV files")
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)

    # (filename, generator): the 2000-point grids back the closed-form slope
    # checks, the n=1000 pair backs the CLI walkthrough, and the two small
    # sets keep the exact-LP and relabeling examples cheap
    jobs = [
        ("gapped_step_g05_n2000.csv", lambda: synthetic.gapped_step(gamma=0.05, n=2000)),
        ("gapped_step_g10_n2000.csv", lambda: synthetic.gapped_step(gamma=0.10, n=2000)),
        ("gapped_step_g20_n2000.csv", lambda: synthetic.gapped_step(gamma=0.20, n=2000)),
        ("gapped_step_g10_n1000.csv", lambda: synthetic.gapped_step(gamma=0.10, n=1000)),
        ("margin_loss_g10_n2000.csv", lambda: synthetic.margin_loss(gamma=0.10, n=2000)),
        ("margin_loss_g10_n1000.csv", lambda: synthetic.margin_loss(gamma=0.10, n=1000)),
        ("power_law_p25_n2000.csv", lambda: synthetic.power_law(p=0.25, n=2000)),
        ("power_law_p50_n2000.csv", lambda: synthetic.power_law(p=0.50, n=2000)),
        ("noisy_step_n32.csv", lambda: synthetic.noisy_step(n=32, noise=0.15, seed=7)),
        ("two_clusters_n60.csv", lambda: synthetic.two_clusters(n=60, sep=4.0, seed=11)),
    ]
    for name, gen in jobs:
        space, labels = gen()
        path = os.path.join(args.outdir, name)
        rows = write_dataset(path, space.coords, labels)
        print(f"{path}: {rows} rows")


if __name__ == "__main__":
    main()
