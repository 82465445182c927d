import time

import pytest
from hypothesis import settings

from eiregret.bench.config import ExperimentConfig
from eiregret.bench.experiment import run_experiment

settings.register_profile("default", deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> str:
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


DESK = dict(kernel="matern32", noise_sigma=0.01, trials=20, seed=0)


@pytest.fixture(scope="session")
def no_regret_runs():
    """Branin and Styblinski-Tang, BPMI and BSPMI, 20 trials x 150 iterations."""
    t0 = time.perf_counter()
    runs = {}
    for fn in ("branin2", "styblinski2"):
        cfg = ExperimentConfig(function=fn, incumbents=("bpmi", "bspmi"), **DESK)
        cfg = cfg.with_(n_total=cfg.n0 + 150)
        for summary, traces in run_experiment(cfg):
            runs[(fn, summary.rule)] = (summary, traces)
    return runs, time.perf_counter() - t0


@pytest.fixture(scope="session")
def boi_runs():
    """Rosenbrock 4D with the best-observation incumbent, noise 0.1, 20 trials x 150 iterations."""
    cfg = ExperimentConfig(function="rosenbrock4", incumbents=("boi",), kernel="matern32", noise_sigma=0.1,
                           trials=20, seed=0)
    cfg = cfg.with_(n_total=cfg.n0 + 150)
    t0 = time.perf_counter()
    (summary, traces), = run_experiment(cfg)
    return cfg, summary, traces, time.perf_counter() - t0
