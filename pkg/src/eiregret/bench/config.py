"""Experiment configuration: flat ``key = value`` files (a TOML subset)."""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import tomli

from eiregret.acquisition import IncumbentRule
from eiregret.gp import LengthscaleGrid
from eiregret.kernels import KernelFamily
from eiregret.objectives import get_function
from eiregret.theory import TheoryParams

OUT_ENV = "EIREGRET_OUT"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    function: str
    incumbents: tuple[IncumbentRule, ...] = (IncumbentRule.BPMI,)
    kernel: KernelFamily = KernelFamily.MATERN32
    lengthscale: Optional[float] = None
    mle: bool = True
    lengthscale_grid: LengthscaleGrid = LengthscaleGrid()
    mle_every: int = 1
    noise_sigma: float = 0.01
    # GP noise std; defaults to max(noise_sigma, 1e-3) so the model stays well posed at sigma = 0
    model_noise_sigma: Optional[float] = None
    n0: Optional[int] = None
    n_total: Optional[int] = None
    trials: int = 20
    seed: int = 0
    acq_pool: Optional[int] = None
    mean_pool: Optional[int] = None
    polish_starts: int = 5
    delta: float = 0.1
    alpha: float = 1.0
    lipschitz_samples: int = 20000
    out_dir: str = "out"

    def __post_init__(self):
        fn = get_function(self.function)
        object.__setattr__(self, "kernel", KernelFamily(self.kernel))
        object.__setattr__(self, "incumbents", tuple(IncumbentRule(r) for r in self.incumbents))
        if self.lengthscale is None and not self.mle:
            raise ConfigError("either give a lengthscale or enable mle")
        if self.lengthscale is not None and not self.lengthscale > 0:
            raise ConfigError("lengthscale must be positive")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be non-negative")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.mle_every < 1:
            raise ConfigError("mle_every must be at least 1")
        n0 = self.n0 if self.n0 is not None else 10 * fn.dim
        n_total = self.n_total if self.n_total is not None else 500 + n0
        if n0 < 1 or n_total <= n0:
            raise ConfigError(f"need n_total > n0 >= 1 (got n0={n0}, n_total={n_total})")
        object.__setattr__(self, "n0", n0)
        object.__setattr__(self, "n_total", n_total)
        if self.acq_pool is None:
            object.__setattr__(self, "acq_pool", 2048 * fn.dim)
        if self.mean_pool is None:
            object.__setattr__(self, "mean_pool", self.acq_pool)
        if self.acq_pool < 1:
            raise ConfigError("acq_pool must be at least 1")
        TheoryParams(delta=self.delta, alpha=self.alpha)  # range checks

    @property
    def dim(self) -> int:
        return get_function(self.function).dim

    @property
    def iterations(self) -> int:
        return self.n_total - self.n0

    @property
    def gp_sigma(self) -> float:
        if self.model_noise_sigma is not None:
            return self.model_noise_sigma
        return max(self.noise_sigma, 1e-3)

    def with_(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


_SIMPLE_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)} - {"incumbents", "lengthscale_grid"}


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    kwargs = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            raise ConfigError(f"config must be flat; found table [{key}]")
        if key == "incumbent":
            kwargs["incumbents"] = tuple(value) if isinstance(value, list) else (value,)
        elif key == "lengthscale_grid":
            if not (isinstance(value, list) and len(value) == 3):
                raise ConfigError("lengthscale_grid must be [lo, hi, n]")
            kwargs["lengthscale_grid"] = LengthscaleGrid(float(value[0]), float(value[1]), int(value[2]))
        elif key == "iterations":
            kwargs["_iterations"] = int(value)
        elif key in _SIMPLE_KEYS:
            kwargs[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    if "function" not in kwargs:
        raise ConfigError("config needs a 'function' key")
    iterations = kwargs.pop("_iterations", None)
    if "lengthscale" in kwargs and "mle" not in kwargs:
        kwargs["mle"] = False
    try:
        cfg = ExperimentConfig(**kwargs)
        if iterations is not None:
            if "n_total" in kwargs:
                raise ConfigError("give either iterations or n_total, not both")
            cfg = cfg.with_(n_total=cfg.n0 + iterations)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text())
