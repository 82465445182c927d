"""Stationary covariance functions with unit signal variance.

Inputs are expected on the unit box; the lengthscale is isotropic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

_SQRT3 = math.sqrt(3.0)
_SQRT5 = math.sqrt(5.0)


class KernelFamily(str, Enum):
    SE = "se"
    MATERN32 = "matern32"
    MATERN52 = "matern52"

    @property
    def nu(self) -> float | None:
        return {"se": None, "matern32": 1.5, "matern52": 2.5}[self.value]


@dataclass(frozen=True)
class KernelSpec:
    family: KernelFamily
    lengthscale: float

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if not (self.lengthscale > 0 and math.isfinite(self.lengthscale)):
            raise ValueError(f"lengthscale must be positive and finite, got {self.lengthscale}")

    def with_lengthscale(self, lengthscale: float) -> "KernelSpec":
        return KernelSpec(self.family, lengthscale)


def _as_points(X, name="X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"{name} must be a point or a 2-D array of points")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} has non-finite coordinates")
    return X


def pairwise_distances(X, Y) -> np.ndarray:
    """Euclidean distance matrix between the rows of ``X`` and ``Y``."""
    X = _as_points(X, "X")
    Y = _as_points(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    return cdist(X, Y)


def kernel_from_distance(family: KernelFamily, lengthscale: float, dist: np.ndarray) -> np.ndarray:
    """Evaluate the covariance as a function of Euclidean distance."""
    r = np.asarray(dist, dtype=float) / lengthscale
    if family is KernelFamily.SE:
        return np.exp(-0.5 * r * r)
    if family is KernelFamily.MATERN32:
        s = _SQRT3 * r
        return (1.0 + s) * np.exp(-s)
    if family is KernelFamily.MATERN52:
        s = _SQRT5 * r
        return (1.0 + s + s * s / 3.0) * np.exp(-s)
    raise ValueError(f"unknown kernel family {family!r}")


def eval_kernel(spec: KernelSpec, x, x_prime) -> float:
    """Covariance between two points; exactly 1 when ``x == x_prime``."""
    x = _as_points(x, "x")
    x_prime = _as_points(x_prime, "x'")
    if x.shape != x_prime.shape or x.shape[0] != 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {x_prime.shape}")
    return float(cross_covariance(spec, x, x_prime)[0, 0])


def cross_covariance(spec: KernelSpec, X, Y) -> np.ndarray:
    return kernel_from_distance(spec.family, spec.lengthscale, pairwise_distances(X, Y))


def gram_matrix(spec: KernelSpec, X) -> np.ndarray:
    """Prior covariance matrix of a point set (symmetric, unit diagonal)."""
    X = _as_points(X)
    if X.shape[0] == 0:
        raise ValueError("gram_matrix needs at least one point")
    K = cross_covariance(spec, X, X)
    # identical pairwise differences on both triangles already, but pin it
    K = 0.5 * (K + K.T)
    np.fill_diagonal(K, 1.0)
    return K


def kernel_and_gradient(spec: KernelSpec, x: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``k(x, X_i)`` and its gradient in ``x`` (shape ``(n, d)``).

    The gradient is written without a ``1/r`` factor so it is finite at ``x == X_i``.
    """
    diff = x[None, :] - X
    ell2 = spec.lengthscale**2
    r = np.sqrt(np.sum(diff * diff, axis=1)) / spec.lengthscale
    if spec.family is KernelFamily.SE:
        k = np.exp(-0.5 * r * r)
        coef = -k / ell2
    elif spec.family is KernelFamily.MATERN32:
        e = np.exp(-_SQRT3 * r)
        k = (1.0 + _SQRT3 * r) * e
        coef = -3.0 * e / ell2
    else:
        s = _SQRT5 * r
        e = np.exp(-s)
        k = (1.0 + s + s * s / 3.0) * e
        coef = -(5.0 / 3.0) * (1.0 + s) * e / ell2
    return k, coef[:, None] * diff
