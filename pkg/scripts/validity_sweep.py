#!/usr/bin/env python3
"""Sweep the emulated LLM validity rate and measure mission success.

Reproduces the qualitative finding that command validity gates mission
success: a backend that emits an in-range primitive only a fraction of
the time wastes its step budget, and success collapses well before
validity does.
"""

from __future__ import annotations

import argparse
import sys

from aeroagent.harness import RunConfig, run_batch


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=50)
    parser.add_argument("--base-seed", type=int, default=0)
    parser.add_argument("--rates", default="0.1,0.38,0.7,0.9,1.0",
                        help="comma-separated valid-rate values")
    parser.add_argument("--out", default="runs/sweep")
    args = parser.parse_args()

    print("valid_rate,measured_valid_pct,success_pct,mean_steps")
    for rate in (float(r) for r in args.rates.split(",")):
        config = RunConfig(episodes=args.episodes, base_seed=args.base_seed,
                           llm=f"noisy:{rate}")
        report, _ = run_batch(config, args.out)
        mean_steps = ("" if report.mean_steps_on_success is None
                      else f"{report.mean_steps_on_success:.2f}")
        print(f"{rate},{report.llm_valid_pct:.2f},"
              f"{report.success_pct:.2f},{mean_steps}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
