"""Run the full benchmark protocol: every problem x method at paper scale.

Each campaign is 15 seeded runs of 65 iterations from 5 Sobol initial
points, written to its own subdirectory. Expect this to take many hours;
pass --smoke for a minutes-scale sanity pass with tiny budgets.

Usage:
    python scripts/run_paper_protocol.py --out runs/ [--jobs 2] [--smoke]
"""

import argparse
import sys
import time
from pathlib import Path

from molbo.cli import CampaignSpec, run_campaign
from molbo.engine import RunConfig

PROTOCOL = [
    ("ehvi", 1),
    ("binom", 4),
    ("nmmo_joint", 4),
    ("nmmo_joint", 8),
    ("nmmo_nested", 2),
]

PROBLEMS = [
    "zdt3",
    "four_bar_truss",
    "reinforced_concrete_beam",
    "gear_train",
    "welded_beam",
    "disc_brake",
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("runs"))
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--seeds", type=int, default=15)
    parser.add_argument("--smoke", action="store_true", help="tiny budgets, 2 seeds, 5 iterations")
    args = parser.parse_args()

    for problem in PROBLEMS:
        for method, horizon in PROTOCOL:
            label = f"{problem}_{method}_h{horizon}"
            out_dir = args.out / label
            if args.smoke:
                base = RunConfig(
                    problem=problem, method=method, horizon=horizon, iterations=5,
                    init_points=5, mc_samples=32, fit_restarts=2, pointwise_raw=32,
                    joint_raw=48, opt_restarts=2, refine_evals=20, grid_size=32,
                )
                seeds = tuple(range(2))
            else:
                base = RunConfig(problem=problem, method=method, horizon=horizon)
                seeds = tuple(range(args.seeds))
            spec = CampaignSpec(base=base, seeds=seeds, out_dir=out_dir, jobs=args.jobs)
            started = time.perf_counter()
            code = run_campaign(spec)
            print(f"{label}: exit {code} in {time.perf_counter() - started:.0f}s -> {out_dir}")
            if code != 0:
                return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
