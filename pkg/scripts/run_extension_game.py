#!/usr/bin/env python3
"""Run the adversarial extension game and report slope-inflation ratios.

A dense uniform grid on [0, 1] stands in for the ambient space. Each trial
samples n points with replacement, labels them with the chosen adversary,
extends from the surviving anchors, and measures the ratio of ambient to
sample average slope. Ratios are reported, not asserted: the guarantee is
probabilistic, so read the quantiles.
"""

from __future__ import annotations

import argparse

import numpy as np

from avgsmooth.extend import GameConfig, validate_extension_game


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ambient-size", type=int, default=2000)
    ap.add_argument("--n", type=int, default=200, help="sample size per trial")
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument(
        "--adversary",
        choices=("sawtooth", "lipschitz", "classification"),
        default="sawtooth",
    )
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--bound", type=float, default=5.0, help="ratio threshold to tally")
    args = ap.parse_args()

    config = GameConfig(
        ambient_size=args.ambient_size,
        n=args.n,
        epsilon=args.epsilon,
        adversary=args.adversary,
        seed=args.seed,
    )
    stats = validate_extension_game(config, trials=args.trials)

    print(f"adversary={stats.adversary} trials={args.trials} n={args.n} eps={args.epsilon}")
    for q in (0.5, 0.9, 1.0):
        print(f"  ratio q{int(q * 100):3d}: {stats.quantile(q):.4f}")
    frac = stats.fraction_at_most(args.bound)
    print(f"  ratio <= {args.bound:g}: {frac:.0%} of trials")
    if args.adversary == "classification":
        print(f"  max ratio / log^2(n): {stats.log_sq_factor:.4f}")
    else:
        print(f"  weak-mean ratio of f, q90: {float(np.quantile(stats.weak_ratio_f, 0.9)):.4f}")
        print(f"  weak-mean ratio of y, q90: {float(np.quantile(stats.weak_ratio_y, 0.9)):.4f}")


if __name__ == "__main__":
    main()
