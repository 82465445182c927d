"""Expected improvement, incumbents, and acquisition maximization (minimization convention)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import ndtr

from eiregret.gp import (
    GpModel,
    PosteriorMoment,
    candidate_pool,
    minimize_posterior_mean,
    polish,
    posterior_with_grad,
    predict,
    sampled_mean_min,
)

SIGMA_EI_FLOOR = 1e-12
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
PHI0 = _INV_SQRT_2PI


def std_normal_pdf(z):
    z = np.asarray(z, dtype=float)
    out = _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    return float(out) if out.ndim == 0 else out


def std_normal_cdf(z):
    """Standard normal CDF via ``erfc``; accurate in relative terms deep into the lower tail."""
    out = ndtr(np.asarray(z, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def tau(z):
    """``tau(z) = z Phi(z) + phi(z)``, the EI of a unit-variance posterior."""
    z = np.asarray(z, dtype=float)
    out = z * ndtr(z) + _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    return float(out) if out.ndim == 0 else out


def _ei_ab(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    small = b <= SIGMA_EI_FLOOR
    safe_b = np.where(small, 1.0, b)
    z = a / safe_b
    ei = a * ndtr(z) + safe_b * (_INV_SQRT_2PI * np.exp(-0.5 * z * z))
    ei = np.where(small, np.maximum(a, 0.0), ei)
    return float(ei) if ei.ndim == 0 else ei


def ei_values(xi_plus: float, mean, std):
    """Vectorized EI for posterior means/stds against the incumbent ``xi_plus``."""
    return _ei_ab(xi_plus - np.asarray(mean, dtype=float), std)


def expected_improvement(xi_plus: float, moment: PosteriorMoment) -> float:
    if moment.std < 0:
        raise ValueError("posterior std must be non-negative")
    return float(_ei_ab(xi_plus - moment.mean, moment.std))


def ei_tradeoff(a, b):
    """EI written in exploitation ``a`` and exploration ``b`` (``b`` in ``(0, 1]``)."""
    if np.any(np.asarray(b) <= 0):
        raise ValueError("exploration part b must be positive")
    return _ei_ab(a, b)


@dataclass(frozen=True)
class EiQuery:
    a: float
    b: float

    @property
    def z(self) -> float:
        return self.a / self.b


class IncumbentRule(str, Enum):
    BPMI = "bpmi"
    BSPMI = "bspmi"
    BOI = "boi"


@dataclass(frozen=True)
class IncumbentValue:
    xi_plus: float
    arg_point: np.ndarray
    rule: IncumbentRule


def compute_incumbent(
    model: GpModel,
    rule: IncumbentRule | str,
    budget: int = 0,
    rng: np.random.Generator | None = None,
) -> IncumbentValue:
    rule = IncumbentRule(rule)
    data = model.data
    if rule is IncumbentRule.BOI:
        i = int(np.argmin(data.y))
        return IncumbentValue(float(data.y[i]), np.array(data.X[i]), rule)
    if rule is IncumbentRule.BSPMI:
        i, mu = sampled_mean_min(model)
        return IncumbentValue(mu, np.array(data.X[i]), rule)
    if rng is None:
        raise ValueError("BPMI needs an rng stream for its candidate pool")
    x, mu = minimize_posterior_mean(model, budget, rng)
    return IncumbentValue(mu, x, rule)


def maximize_ei(
    model: GpModel,
    incumbent: IncumbentValue,
    budget: int,
    rng: np.random.Generator,
    n_starts: int = 5,
) -> np.ndarray:
    """Argmax of EI over the unit box.

    Candidates: ``budget`` quasi-random points, then the sampled points, then
    the incumbent's point; ties go to the lowest index.  The top ``n_starts``
    candidates are polished with L-BFGS-B and replace the pool winner only on
    strict improvement.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    xi = incumbent.xi_plus
    pool = np.vstack([candidate_pool(model.d, budget, rng), model.data.X, incumbent.arg_point[None, :]])
    mu, var = predict(model, pool)
    ei = ei_values(xi, mu, np.sqrt(var))
    i = int(np.argmax(ei))
    x_best, ei_best = pool[i], float(ei[i])
    if n_starts > 0 and ei_best > 0:
        starts = pool[np.argsort(-ei, kind="stable")[:n_starts]]

        def neg_ei(x):
            m, s, dm, ds = posterior_with_grad(model, x)
            z = (xi - m) / s
            val = (xi - m) * ndtr(z) + s * _INV_SQRT_2PI * math.exp(-0.5 * z * z)
            grad = -ndtr(z) * dm + _INV_SQRT_2PI * math.exp(-0.5 * z * z) * ds
            return -val, -grad

        for x, _ in polish(neg_ei, starts):
            m, v = predict(model, x[None, :])
            val = float(ei_values(xi, m, np.sqrt(v))[0])
            if val > ei_best:
                x_best, ei_best = x, val
    return np.array(x_best)
