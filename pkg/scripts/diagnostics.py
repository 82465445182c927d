"""Theory diagnostics on generated traces.

For each rule, reports the E^f coverage at the queried points, the
variance-sum bound slack, and a least-squares fit of the empirical
information gain against log^{d+1}(T) (SE kernel recommended).  Also prints
the trade-off crossover T0 for the run's theory parameters.

Usage: python3 scripts/diagnostics.py --config configs/desk_branin.toml [--trials R]
"""

import argparse

import numpy as np

from eiregret import theory
from eiregret.bench.config import load_config
from eiregret.bench.driver import theory_params
from eiregret.bench.experiment import run_trials


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", required=True)
    ap.add_argument("--trials", type=int, default=None)
    args = ap.parse_args()
    cfg = load_config(args.config)
    if args.trials:
        cfg = cfg.with_(trials=args.trials)
    params = theory_params(cfg)
    print(f"L (unit box) = {params.L:.4g}; T0 (mu-based) = {theory.tradeoff_crossover(params)}; "
          f"T0 (BOI) = {theory.tradeoff_crossover(params, boi=True)}")
    for rule in cfg.incumbents:
        traces = [tr for tr in run_trials(cfg, rule) if not tr.failed]
        cover = np.mean([theory.confidence_coverage(tr) for tr in traces])
        slack = [np.subtract(*theory.variance_sum_bound(tr.column("sigma_xt"), tr.model_sigma)[::-1])
                 for tr in traces]
        T = np.arange(1, cfg.iterations + 1)
        info = np.mean([tr.column("info_gain") for tr in traces], axis=0)
        basis = np.log(T + cfg.n0) ** (cfg.dim + 1)
        c = float(basis @ info / (basis @ basis))
        print(f"{rule.value:<6} coverage={cover:.3f}  min bound slack={min(slack):.3g}  "
              f"I_T ~ {c:.3g} log^{cfg.dim + 1}(T)  (final I_T={info[-1]:.3g})")


if __name__ == "__main__":
    main()
