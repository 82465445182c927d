"""Full-scale sweep: every test function x noise level x incumbent rule.

Takes hours on one core; use --parallel and --functions to split the work.

Usage: python3 scripts/run_paper_grid.py [--parallel N] [--trials R] [--functions f1 f2 ...]
"""

import argparse
from pathlib import Path

from eiregret.bench.cli import resolve_out_dir, write_outputs
from eiregret.bench.config import ExperimentConfig
from eiregret.bench.experiment import run_experiment
from eiregret.objectives import FUNCTIONS

NOISE_LEVELS = (0.001, 0.01, 0.1)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--parallel", type=int, default=1)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--functions", nargs="+", default=sorted(FUNCTIONS), choices=sorted(FUNCTIONS))
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()
    out = resolve_out_dir(args.out, "out/paper")
    for fn in args.functions:
        for sigma in NOISE_LEVELS:
            cfg = ExperimentConfig(function=fn, incumbents=("bpmi", "bspmi", "boi"), noise_sigma=sigma,
                                   trials=args.trials)
            print(f"{fn} sigma={sigma:g}: {cfg.trials} trials x {cfg.iterations} iterations", flush=True)
            results = run_experiment(cfg, parallel=args.parallel)
            for path in write_outputs(cfg, results, out):
                print(f"  wrote {path}")


if __name__ == "__main__":
    main()
