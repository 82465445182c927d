"""Multi-trial runner and cross-trial aggregation."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from eiregret.acquisition import IncumbentRule
from eiregret.bench.config import ExperimentConfig
from eiregret.bench.driver import run_trial
from eiregret.theory import RegretTrace

log = logging.getLogger(__name__)

Z95 = 1.96


class ExperimentError(RuntimeError):
    pass


def mean_ci(curves: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and normal-approximation 95% half-widths (zero for a single row)."""
    mean = curves.mean(axis=0)
    if curves.shape[0] < 2:
        return mean, np.zeros_like(mean)
    return mean, Z95 * curves.std(axis=0, ddof=1) / np.sqrt(curves.shape[0])


@dataclass
class ExperimentSummary:
    function: str
    rule: str
    noise_sigma: float
    t: np.ndarray
    mean: np.ndarray  # mean of R_t / t
    half_width: np.ndarray
    final_regret: np.ndarray  # per successful trial
    trials: list[int]
    failed: list[int] = field(default_factory=list)
    n_y: Optional[np.ndarray] = None  # BOI only, per successful trial
    simple_regret_mean: Optional[np.ndarray] = None
    simple_regret_half_width: Optional[np.ndarray] = None

    @property
    def label(self) -> str:
        return self.rule.upper()

    @property
    def ci_low(self) -> np.ndarray:
        return self.mean - self.half_width

    @property
    def ci_high(self) -> np.ndarray:
        return self.mean + self.half_width

    @property
    def stem(self) -> str:
        return f"{self.function}_{self.rule}_sigma{self.noise_sigma:g}"


def summarize(cfg: ExperimentConfig, rule: IncumbentRule, traces: list[RegretTrace]) -> ExperimentSummary:
    ok = [tr for tr in traces if not tr.failed]
    if not ok:
        raise ExperimentError(f"all {len(traces)} trials failed for {cfg.function}/{rule.value}")
    t = np.arange(1, cfg.iterations + 1)
    curves = np.array([tr.column("R_t") / t for tr in ok])
    mean, hw = mean_ci(curves)
    summary = ExperimentSummary(
        function=cfg.function,
        rule=rule.value,
        noise_sigma=cfg.noise_sigma,
        t=t,
        mean=mean,
        half_width=hw,
        final_regret=np.array([tr.records[-1].R_t for tr in ok]),
        trials=[tr.trial for tr in ok],
        failed=[tr.trial for tr in traces if tr.failed],
    )
    if rule is IncumbentRule.BOI:
        summary.n_y = np.array([tr.n_y()[-1] for tr in ok])
        sr = np.array([tr.column("simple_regret") for tr in ok])
        summary.simple_regret_mean, summary.simple_regret_half_width = mean_ci(sr)
    return summary


def _job(args):
    cfg, trial, rule = args
    return run_trial(cfg, trial, rule)


def run_trials(cfg: ExperimentConfig, rule: IncumbentRule, parallel: int = 1) -> list[RegretTrace]:
    """All trials for one rule, ordered by trial index regardless of ``parallel``."""
    jobs = [(cfg, i, rule) for i in range(cfg.trials)]
    if parallel <= 1:
        traces = [_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            traces = list(pool.map(_job, jobs))
    for tr in traces:
        if tr.failed:
            log.warning("trial %d (%s/%s) failed: %s", tr.trial, cfg.function, rule.value, tr.error)
    return traces


def run_experiment(
    cfg: ExperimentConfig, parallel: int = 1
) -> list[tuple[ExperimentSummary, list[RegretTrace]]]:
    """Run every configured incumbent rule; one ``(summary, traces)`` pair per rule."""
    out = []
    for rule in cfg.incumbents:
        traces = run_trials(cfg, rule, parallel)
        out.append((summarize(cfg, rule, traces), traces))
    return out
