#!/usr/bin/env python3
"""Run scaled-down versions of the two replicate studies and print tables.

The full studies (100 replicates for knot recovery, 20 for clustering
quality at 100 curves) take minutes; this keeps the structure at a size
that finishes in well under a minute. Seeds fix every draw, so a second
run prints identical numbers.
"""

import argparse

from plfc import BenchConfig, run_ari_benchmark, run_cp_study


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cp-replicates", type=int, default=20,
                        help="replicates for the knot recovery study")
    parser.add_argument("--ari-replicates", type=int, default=5,
                        help="replicates for the clustering study")
    parser.add_argument("--n-curves", type=int, default=40,
                        help="curves per clustering replicate")
    parser.add_argument("--seed", type=int, default=2026, help="random seed")
    args = parser.parse_args()

    print("=== knot recovery, model 1 cluster 3 ===")
    cp = run_cp_study(BenchConfig(
        model=1, sigmas=(1.0, 5.0), replicates=args.cp_replicates,
        k_max=10, seed=args.seed,
    ))
    summary = cp["summary"]
    print(f"{args.cp_replicates} replicates per noise level, hit radius "
          f"{summary['hit_radius']} around each jittered truth")
    print("sigma   per-truth recovery        spurious reps  worst spurious freq")
    for sigma, stats in summary["sigmas"].items():
        rates = ", ".join(f"{r:.2f}" for r in stats["per_truth_recovery"])
        print(f"{sigma:>5}   [{rates}]    {stats['spurious_replicate_fraction']:.2f}"
              f"           {stats['max_spurious_position_frequency']:.2f}")
    print()

    print("=== clustering quality, summarized features vs raw trajectories ===")
    print(f"{args.ari_replicates} replicates, {args.n_curves} curves each")
    print("model  sigma   median ARI pipeline   median ARI raw")
    for model in (1, 2):
        ari_out = run_ari_benchmark(BenchConfig(
            model=model, sigmas=(1.0,), replicates=args.ari_replicates,
            n_curves=args.n_curves, k_max=10, seed=args.seed,
        ))
        stats = ari_out["summary"]["sigmas"]["1.0"]
        print(f"{model:>5}    1.0   {stats['pipeline']['median']:>19.4f}"
              f"   {stats['raw']['median']:>14.4f}")
        if ari_out["failures"]:
            print(f"  failures: {ari_out['failures']}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
