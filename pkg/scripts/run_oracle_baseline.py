#!/usr/bin/env python3
"""Run the ground-truth oracle pilot over a batch of seeded scenarios.

This is the closed-loop sanity experiment: with a perfect controller and
noiseless perception the success rate should be near 100% and the mean
path optimality close to 1. Useful as a smoke check after touching the
dynamics, the planner, or the episode loop.
"""

from __future__ import annotations

import argparse
import sys
import time

from aeroagent.harness import RunConfig, report_csv_text, run_batch


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=100)
    parser.add_argument("--base-seed", type=int, default=0)
    parser.add_argument("--obstacles", type=int, default=5)
    parser.add_argument("--out", default="runs")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    config = RunConfig(episodes=args.episodes, base_seed=args.base_seed,
                       obstacle_count=args.obstacles, workers=args.workers)
    started = time.perf_counter()
    report, paths = run_batch(config, args.out)
    elapsed = time.perf_counter() - started

    sys.stdout.write(report_csv_text(report, config))
    print(f"# {args.episodes} episodes in {elapsed:.1f} s "
          f"-> {paths[0].parent}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
