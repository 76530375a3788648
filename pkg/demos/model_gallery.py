#!/usr/bin/env python3
"""Print the two simulation models and sketch one noiseless curve each.

Every curve starts at 0, rises through its cluster's knots, and is
observed on the fixed grid 0, 10, ..., 500. Per curve the generator
jitters the knots by a common offset, shifts all node values by a
common level, and adds Gaussian noise on top.
"""

import argparse

import numpy as np

from plfc import JITTER_VERBATIM, get_model, interpolant
from plfc.simulate import X_GRID


def sketch(y: np.ndarray, height: int = 12, width: int = 51) -> list:
    lo, hi = float(np.min(y)), float(np.max(y))
    span = hi - lo if hi > lo else 1.0
    rows = [[" "] * width for _ in range(height)]
    for col in range(width):
        level = int(round((y[col] - lo) / span * (height - 1)))
        rows[height - 1 - level][col] = "*"
    return ["".join(r) for r in rows]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--height", type=int, default=10, help="sketch height in rows")
    args = parser.parse_args()

    print(f"observation grid: {len(X_GRID)} points, x = 0, 10, ..., 500")
    print(f"knot jitter offsets (uniform draw): {[int(v) for v in JITTER_VERBATIM]}")
    print("level shift: one uniform draw on [-200, 200] added to every node value")
    print()
    for model in (1, 2):
        spec = get_model(model)
        print(f"=== {spec.name} ===")
        for cluster in spec.clusters:
            knots = [int(t) for t in cluster.knots]
            theta = [int(v) for v in cluster.theta]
            print(f"\ncluster {cluster.z}: knots {knots}, node values {theta}")
            y = interpolant(cluster.knots, cluster.theta, X_GRID)
            for line in sketch(y, height=args.height):
                print("   |" + line)
            print("   +" + "-" * len(X_GRID))
            print("    x=0" + " " * (len(X_GRID) - 9) + "x=500")
        print()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
