"""Exact zero-mean GP regression on the unit box.

The posterior follows the usual Bayes-rule expressions

    mu_t(x)      = k_t(x)^T (K_t + s^2 I)^{-1} y
    sigma_t^2(x) = 1 - k_t(x)^T (K_t + s^2 I)^{-1} k_t(x)

evaluated through a Cholesky factor ``L L^T = K_t + s^2 I``.  Models are
immutable: adding data means calling :func:`fit` again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize
from scipy.stats import qmc

from eiregret.kernels import (
    KernelFamily,
    KernelSpec,
    cross_covariance,
    kernel_from_distance,
    kernel_and_gradient,
    pairwise_distances,
)

VAR_FLOOR = 1e-12
JITTER_START = 1e-10
JITTER_MAX = 1e-4


class NumericalError(RuntimeError):
    """Raised when the covariance cannot be factorized even with jitter."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Sample history ``x_{1:t}`` (rows of ``X``, unit-box coordinates) and ``y_{1:t}``."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite values")
        if X.size and (X.min() < -1e-9 or X.max() > 1 + 1e-9):
            raise ValueError("sample points must lie in the unit box")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))

    @property
    def t(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def append(self, x, y: float) -> "Dataset":
        x = np.asarray(x, dtype=float).reshape(1, -1)
        return Dataset(np.vstack([self.X, x]), np.append(self.y, y))


@dataclass(frozen=True)
class PosteriorMoment:
    mean: float
    std: float

    @property
    def var(self) -> float:
        return self.std * self.std


@dataclass(frozen=True)
class GpModel:
    kernel: KernelSpec
    noise_var: float
    data: Dataset
    chol: np.ndarray
    weights: np.ndarray
    jitter: float = 0.0

    @property
    def t(self) -> int:
        return self.data.t

    @property
    def d(self) -> int:
        return self.data.d


def cholesky_with_jitter(A: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``A``, escalating diagonal jitter 1e-10 -> 1e-4 on failure."""
    jitter = 0.0
    n = A.shape[0]
    while True:
        try:
            L = linalg.cholesky(A + jitter * np.eye(n) if jitter else A, lower=True, check_finite=False)
            if np.all(np.diag(L) > 0):
                return L, jitter
        except linalg.LinAlgError:
            pass
        jitter = JITTER_START if jitter == 0.0 else jitter * 10.0
        if jitter > JITTER_MAX * (1 + 1e-9):
            eig_min = float(np.linalg.eigvalsh(A)[0])
            raise NumericalError(
                f"Cholesky failed with jitter up to {JITTER_MAX:g}; smallest eigenvalue ~ {eig_min:.3e}"
            )


def _fit_from_cov(kernel, noise_var, data, K) -> GpModel:
    A = K + noise_var * np.eye(data.t)
    L, jitter = cholesky_with_jitter(A)
    weights = linalg.cho_solve((L, True), data.y, check_finite=False)
    return GpModel(kernel, float(noise_var), data, _frozen(L), _frozen(weights), jitter)


def fit(data: Dataset, kernel: KernelSpec, noise_var: float) -> GpModel:
    if data.t < 1:
        raise ValueError("need at least one observation")
    if not noise_var > 0:
        raise ValueError(f"noise_var must be positive, got {noise_var}")
    D = pairwise_distances(data.X, data.X)
    K = kernel_from_distance(kernel.family, kernel.lengthscale, D)
    np.fill_diagonal(K, 1.0)
    return _fit_from_cov(kernel, noise_var, data, K)


def predict(model: GpModel, Xs) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance at the rows of ``Xs`` (variance floored at ``VAR_FLOOR``)."""
    Xs = np.atleast_2d(np.asarray(Xs, dtype=float))
    if Xs.shape[1] != model.d:
        raise ValueError(f"expected points of dimension {model.d}, got {Xs.shape[1]}")
    Ks = cross_covariance(model.kernel, model.data.X, Xs)
    mean = Ks.T @ model.weights
    V = linalg.solve_triangular(model.chol, Ks, lower=True, check_finite=False)
    var = 1.0 - np.einsum("ij,ij->j", V, V)
    return mean, np.maximum(var, VAR_FLOOR)


def predict_mean(model: GpModel, Xs) -> np.ndarray:
    Xs = np.atleast_2d(np.asarray(Xs, dtype=float))
    return cross_covariance(model.kernel, model.data.X, Xs).T @ model.weights


def posterior(model: GpModel, x) -> PosteriorMoment:
    x = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise ValueError("query point has non-finite coordinates")
    mean, var = predict(model, x[None, :])
    return PosteriorMoment(float(mean[0]), math.sqrt(float(var[0])))


def posterior_with_grad(model: GpModel, x: np.ndarray):
    """Return ``(mean, std, dmean/dx, dstd/dx)`` at a single point."""
    X = model.data.X
    k, dk = kernel_and_gradient(model.kernel, x, X)
    mean = float(k @ model.weights)
    dmean = dk.T @ model.weights
    v = linalg.solve_triangular(model.chol, k, lower=True, check_finite=False)
    var = 1.0 - float(v @ v)
    if var <= VAR_FLOOR:
        return mean, math.sqrt(VAR_FLOOR), dmean, np.zeros_like(x)
    w = linalg.solve_triangular(model.chol, v, lower=True, trans="T", check_finite=False)
    std = math.sqrt(var)
    dstd = -(dk.T @ w) / std
    return mean, std, dmean, dstd


def log_marginal_likelihood(model: GpModel) -> float:
    y = model.data.y
    return float(
        -0.5 * y @ model.weights
        - np.sum(np.log(np.diag(model.chol)))
        - 0.5 * model.t * math.log(2.0 * math.pi)
    )


@dataclass(frozen=True)
class LengthscaleGrid:
    lo: float = 0.05
    hi: float = 2.0
    n: int = 25

    def values(self) -> np.ndarray:
        if self.n == 1:
            return np.array([self.lo])
        v = np.exp(np.linspace(math.log(self.lo), math.log(self.hi), self.n))
        v[0], v[-1] = self.lo, self.hi  # exp(log(.)) is not exact
        return v


@dataclass(frozen=True)
class MleFit:
    kernel: KernelSpec
    log_likelihood: float
    degenerate: bool = False


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def mle_fit_lengthscale(
    data: Dataset,
    family: KernelFamily | str,
    noise_var: float,
    grid: LengthscaleGrid = LengthscaleGrid(),
    golden_iters: int = 20,
) -> MleFit:
    """Maximize the log evidence over a log-spaced grid, then one golden-section pass.

    Ties go to the smaller lengthscale.  Constant observations carry no
    lengthscale information; the grid midpoint is returned with
    ``degenerate=True``.
    """
    family = KernelFamily(family)
    values = grid.values()
    if data.t >= 1 and np.ptp(data.y) == 0.0:
        ell = float(values[(len(values) - 1) // 2])
        return MleFit(KernelSpec(family, ell), math.nan, degenerate=True)

    D = pairwise_distances(data.X, data.X)

    def lml(ell: float) -> float:
        K = kernel_from_distance(family, ell, D)
        np.fill_diagonal(K, 1.0)
        try:
            return log_marginal_likelihood(_fit_from_cov(KernelSpec(family, ell), noise_var, data, K))
        except NumericalError:
            return -math.inf

    scores = np.array([lml(float(v)) for v in values])
    best = int(np.argmax(scores))  # first maximum -> smallest lengthscale
    best_ell, best_score = float(values[best]), float(scores[best])
    if len(values) > 1 and golden_iters > 0:
        a = math.log(values[max(best - 1, 0)])
        b = math.log(values[min(best + 1, len(values) - 1)])
        c = b - _INV_PHI * (b - a)
        e = a + _INV_PHI * (b - a)
        fc, fe = lml(math.exp(c)), lml(math.exp(e))
        for _ in range(golden_iters):
            if fc >= fe:
                b, e, fe = e, c, fc
                c = b - _INV_PHI * (b - a)
                fc = lml(math.exp(c))
            else:
                a, c, fc = c, e, fe
                e = a + _INV_PHI * (b - a)
                fe = lml(math.exp(e))
        for cand, score in ((c, fc), (e, fe)):
            if score > best_score:
                best_ell, best_score = math.exp(cand), score
    return MleFit(KernelSpec(family, best_ell), best_score)


def candidate_pool(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` scrambled-Halton points in ``[0, 1]^d`` drawn from ``rng``."""
    if n < 1:
        return np.empty((0, d))
    return qmc.Halton(d, scramble=True, seed=rng).random(n)


def polish(fun, starts: np.ndarray, maxiter: int = 50) -> list[tuple[np.ndarray, float]]:
    """Bounded L-BFGS-B descent of ``fun`` (returning value and gradient) from each start."""
    d = starts.shape[1]
    out = []
    for x0 in starts:
        res = optimize.minimize(
            fun, x0, jac=True, method="L-BFGS-B", bounds=[(0.0, 1.0)] * d,
            options={"maxiter": maxiter},
        )
        x = np.clip(res.x, 0.0, 1.0)
        out.append((x, float(res.fun)))
    return out


def sampled_mean_min(model: GpModel) -> tuple[int, float]:
    """Index and value of the smallest posterior mean over the sampled points."""
    mu = predict_mean(model, model.data.X)
    i = int(np.argmin(mu))
    return i, float(mu[i])


def minimize_posterior_mean(
    model: GpModel,
    budget: int,
    rng: np.random.Generator,
    n_starts: int = 5,
) -> tuple[np.ndarray, float]:
    """Approximate ``min_x mu_t(x)`` over the unit box.

    Candidates are ``budget`` quasi-random points followed by the sampled
    points, so the result never exceeds the sampled-point minimum.  The best
    ``n_starts`` quasi-random candidates are polished with L-BFGS-B and win
    only on strict improvement.
    """
    pool = candidate_pool(model.d, budget, rng)
    i_s, mu_s = sampled_mean_min(model)
    x_best, mu_best = model.data.X[i_s], mu_s
    if budget > 0:
        mu = predict_mean(model, pool)
        i = int(np.argmin(mu))
        if mu[i] <= mu_best:  # pool precedes sampled points in index order
            x_best, mu_best = pool[i], float(mu[i])
        if n_starts > 0:
            starts = np.vstack([pool, model.data.X])[
                np.argsort(np.concatenate([mu, predict_mean(model, model.data.X)]), kind="stable")[:n_starts]
            ]

            def f(x):
                m, _, dm, _ = posterior_with_grad(model, x)
                return m, dm

            for x, _ in polish(f, starts):
                m = float(predict_mean(model, x[None, :])[0])
                if m < mu_best:
                    x_best, mu_best = x, m
    return np.array(x_best), mu_best
