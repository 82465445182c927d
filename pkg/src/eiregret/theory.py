"""Closed-form analysis quantities and regret bookkeeping.

None of these feed back into the optimizer; they are computed alongside a
run to diagnose it.  Functions of ``t`` accept scalars or integer arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy.special import ndtr

C_ALPHA = 1.328
PHI0 = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class TheoryParams:
    delta: float = 0.1
    alpha: float = 1.0
    L: float = 1.0
    r: float = 1.0
    d: int = 1
    sigma: float = 0.01

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if min(self.L, self.r, self.d, self.sigma) <= 0:
            raise ValueError("L, r, d and sigma must be positive")


def _t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 1):
        raise ValueError("t must be at least 1")
    return t


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def log_discretization_size(params: TheoryParams, t):
    """``log |C_t|`` with ``|C_t| = (L r d t^2)^d``."""
    lrd = params.L * params.r * params.d
    if lrd < 1:
        raise ValueError(f"L*r*d = {lrd:g} < 1 violates the Lipschitz floor L >= 1/(r d)")
    return _out(params.d * np.log(lrd * _t(t) ** 2))


def discretization_size(params: TheoryParams, t):
    return _out(np.exp(log_discretization_size(params, t)))


def mesh_width(L: float, t):
    """``h_t = 1 / (L t^2)``, the per-coordinate spacing of ``C_t``."""
    return _out(1.0 / (L * _t(t) ** 2))


def beta_t(params: TheoryParams, t):
    """``2 log(8 |C_t| pi_t / delta)`` with ``pi_t = pi^2 t^2 / 6``."""
    t = _t(t)
    log_pi_t = np.log(math.pi**2 * t**2 / 6.0)
    return _out(2.0 * (math.log(8.0) + log_discretization_size(params, t) + log_pi_t - math.log(params.delta)))


@dataclass(frozen=True)
class Ladder:
    alpha_t: object
    zeta_sqrt: object
    eta_sqrt: object
    c1: object
    c2: object


def ladder(params: TheoryParams, t) -> Ladder:
    """Parameter ladder ``alpha_t, zeta_t^{1/2}, eta_t^{1/2}`` and the coefficients ``c_1, c_2``.

    Raises ``ArithmeticError`` if ``eta_t^{1/2} Phi(-alpha_t^{1/2}) > phi(0)``
    fails for any requested ``t``.
    """
    t = _t(t)
    a = params.alpha
    alpha_t = a * np.log(t)
    zeta_sqrt = math.sqrt(2 * math.pi) * PHI0 / math.sqrt(a) * t ** (a / 2)
    b_sqrt = np.sqrt(beta_t(params, t))
    eta_sqrt = zeta_sqrt * b_sqrt
    lhs = eta_sqrt * ndtr(-np.sqrt(alpha_t))
    if not np.all(lhs > PHI0):
        bad = np.atleast_1d(t)[np.atleast_1d(lhs <= PHI0)][0]
        raise ArithmeticError(f"eta_t^(1/2) Phi(-alpha_t^(1/2)) <= phi(0) at t={bad:g}")
    return Ladder(
        _out(alpha_t), _out(zeta_sqrt), _out(eta_sqrt), _out(eta_sqrt / PHI0), _out((4 + zeta_sqrt) * b_sqrt)
    )


def c_mu(t, sigma: float):
    """``log^{1/2}((t-1+s^2) / (2 pi phi(0)^2 s^2))``; 0 where the log argument is below 1."""
    t = _t(t)
    arg = (t - 1 + sigma**2) / (2 * math.pi * PHI0**2 * sigma**2)
    return _out(np.sqrt(np.log(np.maximum(arg, 1.0))))


def c_y(t, sigma: float):
    return _out(np.maximum(c_mu(t, sigma), 3.0))


def sigma_lower_bound(t, sigma: float):
    """Global floor ``sigma / sqrt(t + sigma^2)`` on the posterior std after ``t`` samples."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or sigma <= 0:
        raise ValueError("need t >= 0 and sigma > 0")
    return _out(sigma / np.sqrt(t + sigma**2))


def tradeoff_assumption_holds(params: TheoryParams, t, boi: bool = False):
    """``c_xi(t) + phi(0) + (c_alpha + 2) beta^{1/2} <= (4 + zeta^{1/2}) beta^{1/2}``."""
    lad = ladder(params, t)
    b_sqrt = np.sqrt(beta_t(params, t))
    c_xi = c_y(t, params.sigma) if boi else c_mu(t, params.sigma)
    return _out(c_xi + PHI0 + (C_ALPHA + 2) * b_sqrt <= (4 + np.asarray(lad.zeta_sqrt)) * b_sqrt)


def tradeoff_crossover(params: TheoryParams, t_max: int = 10_000, boi: bool = False) -> Optional[int]:
    """Smallest ``T0`` such that the trade-off assumption holds for every ``t`` in ``[T0, t_max]``."""
    ok = np.asarray(tradeoff_assumption_holds(params, np.arange(1, t_max + 1), boi))
    if not ok[-1]:
        return None
    bad = np.flatnonzero(~ok)
    return 1 if bad.size == 0 else int(bad[-1]) + 2


def instantaneous_regret(f_xt: float, f_star: float) -> float:
    return f_xt - f_star


def noisy_simple_regret(y_plus: float, f_star: float) -> float:
    return y_plus - f_star


def event_ey(r_s: float, beta: float, sigma_xt: float) -> bool:
    """``r^s_t >= beta_t^{1/2} sigma_{t-1}(x_t)`` (inclusive)."""
    if sigma_xt <= 0 or beta <= 0:
        raise ValueError("beta and sigma_xt must be positive")
    return bool(r_s >= math.sqrt(beta) * sigma_xt)


def info_gain_selected(variances: Iterable[float], sigma: float) -> float:
    """Information gain ``1/2 sum log(1 + s^-2 sigma_{t-1}^2(x_t))`` of the selected points."""
    v = np.asarray(list(variances), dtype=float)
    if v.size == 0:
        return 0.0
    return float(0.5 * np.sum(np.log1p(v / sigma**2)))


def variance_sum_bound(stds: Iterable[float], sigma: float) -> tuple[float, float]:
    """Return ``(sum sigma_{t-1}(x_t), sqrt(C_gamma T I_T))`` with ``C_gamma = 2/log(1+s^-2)``."""
    s = np.asarray(list(stds), dtype=float)
    c_gamma = 2.0 / math.log1p(sigma**-2)
    return float(np.sum(s)), math.sqrt(c_gamma * s.size * info_gain_selected(s**2, sigma))


@dataclass
class RegretRecord:
    t: int
    x: np.ndarray
    y: float
    f: float
    r_t: float
    R_t: float
    xi_plus: float
    sigma_xt: float
    mu_xt: float
    ei_xt: float
    info_gain: float
    mu_min_sampled: float
    lengthscale: float
    ef_flag: bool
    simple_regret: Optional[float] = None
    ey_flag: Optional[bool] = None


@dataclass
class RegretTrace:
    trial: int
    function: str
    rule: str
    n0: int
    f_star: float
    model_sigma: float
    theory: TheoryParams
    records: list[RegretRecord] = field(default_factory=list)
    failed: bool = False
    error: str = ""

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def t_abs(self, t: int) -> int:
        """Total sample count when BO iteration ``t`` is evaluated."""
        return self.n0 + t

    def n_y(self) -> np.ndarray:
        """Running count of iterations where ``E^y(t)`` failed (BOI traces)."""
        flags = [r.ey_flag for r in self.records]
        return np.cumsum([f is False for f in flags])


def variance_sum_bound_check(trace: RegretTrace) -> bool:
    lhs, rhs = variance_sum_bound(trace.column("sigma_xt"), trace.model_sigma)
    return lhs <= rhs + 1e-9


def confidence_coverage(trace: RegretTrace, params: Optional[TheoryParams] = None, beta_scale: float = 1.0) -> float:
    """Fraction of iterations with ``|f(x_t) - mu_{t-1}(x_t)| <= beta_t^{1/2} sigma_{t-1}(x_t)``."""
    params = params or trace.theory
    if not trace.records:
        return math.nan
    t_abs = np.array([trace.t_abs(r.t) for r in trace.records])
    width = np.sqrt(beta_scale * np.asarray(beta_t(params, t_abs))) * trace.column("sigma_xt")
    hits = np.abs(trace.column("f") - trace.column("mu_xt")) <= width
    return float(np.mean(hits))
