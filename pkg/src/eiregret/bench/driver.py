"""Single GP-EI run: initial design, then the acquire / observe / refit loop."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from eiregret import theory
from eiregret.acquisition import (
    IncumbentRule,
    compute_incumbent,
    expected_improvement,
    maximize_ei,
)
from eiregret.bench.config import ExperimentConfig
from eiregret.gp import Dataset, NumericalError, fit, mle_fit_lengthscale, posterior, sampled_mean_min
from eiregret.kernels import KernelSpec
from eiregret.objectives import NoiseModel, estimate_lipschitz, eval_objective, get_function
from eiregret.theory import RegretRecord, RegretTrace, TheoryParams

# Stream layout: every trial owns SeedSequence([seed, trial]) and spawns these
# children in this order.  The Lipschitz stream is keyed by seed alone.
_STREAMS = ("design", "noise", "acquisition")
_LIPSCHITZ_KEY = 2**64 - 1


def trial_streams(seed: int, trial: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence([seed, trial]).spawn(len(_STREAMS))
    return {name: np.random.default_rng(ss) for name, ss in zip(_STREAMS, children)}


@lru_cache(maxsize=64)
def lipschitz_for(function: str, samples: int, seed: int) -> float:
    rng = np.random.default_rng(np.random.SeedSequence([seed, _LIPSCHITZ_KEY]))
    return estimate_lipschitz(get_function(function), samples, rng, unit=True)


def theory_params(cfg: ExperimentConfig) -> TheoryParams:
    return TheoryParams(
        delta=cfg.delta,
        alpha=cfg.alpha,
        L=lipschitz_for(cfg.function, cfg.lipschitz_samples, cfg.seed),
        r=1.0,
        d=cfg.dim,
        sigma=cfg.gp_sigma,
    )


def run_trial(cfg: ExperimentConfig, trial_index: int, rule: IncumbentRule | str | None = None) -> RegretTrace:
    """Run one trial; deterministic in ``(cfg.seed, trial_index)``.

    A GP factorization failure stops the trial and marks the trace failed
    instead of raising.
    """
    rule = IncumbentRule(rule if rule is not None else cfg.incumbents[0])
    fn = get_function(cfg.function)
    f_star = fn.f_star
    params = theory_params(cfg)
    streams = trial_streams(cfg.seed, trial_index)
    noise = NoiseModel(cfg.noise_sigma, streams["noise"])
    acq_rng = streams["acquisition"]
    sigma_m = cfg.gp_sigma
    noise_var = sigma_m**2

    trace = RegretTrace(trial_index, cfg.function, rule.value, cfg.n0, f_star, sigma_m, params)

    U = streams["design"].random((cfg.n0, fn.dim))
    y0 = [eval_objective(fn, fn.from_unit(u)) + noise.draw() for u in U]
    data = Dataset(U, y0)
    kernel = KernelSpec(cfg.kernel, cfg.lengthscale if cfg.lengthscale is not None else 0.2)

    R = 0.0
    info = 0.0
    try:
        for t in range(1, cfg.iterations + 1):
            if cfg.mle and (t - 1) % cfg.mle_every == 0:
                kernel = mle_fit_lengthscale(data, cfg.kernel, noise_var, cfg.lengthscale_grid).kernel
            model = fit(data, kernel, noise_var)

            inc = compute_incumbent(model, rule, cfg.mean_pool, acq_rng)
            mu_sampled = sampled_mean_min(model)[1]
            u = maximize_ei(model, inc, cfg.acq_pool, acq_rng, n_starts=cfg.polish_starts)
            moment = posterior(model, u)
            ei = expected_improvement(inc.xi_plus, moment)

            x = np.clip(fn.from_unit(u), fn.bounds[:, 0], fn.bounds[:, 1])
            f = eval_objective(fn, x)
            y = f + noise.draw()

            r = theory.instantaneous_regret(f, f_star)
            R += r
            info += 0.5 * math.log1p(moment.var / noise_var)
            beta = theory.beta_t(params, cfg.n0 + t)
            ef = abs(f - moment.mean) <= math.sqrt(beta) * moment.std
            rs = ey = None
            if rule is IncumbentRule.BOI:
                rs = theory.noisy_simple_regret(inc.xi_plus, f_star)
                ey = theory.event_ey(rs, beta, moment.std)

            trace.records.append(RegretRecord(
                t=t, x=x, y=y, f=f, r_t=r, R_t=R, xi_plus=inc.xi_plus, sigma_xt=moment.std,
                mu_xt=moment.mean, ei_xt=ei, info_gain=info, mu_min_sampled=mu_sampled,
                lengthscale=kernel.lengthscale, ef_flag=bool(ef), simple_regret=rs, ey_flag=ey,
            ))
            data = data.append(u, y)
    except NumericalError as exc:
        trace.failed = True
        trace.error = f"iteration {len(trace.records) + 1}: {exc}"
    return trace
