"""Sigma-point machinery: generation, weighting, and moment reconstruction.

The unscented transform represents an N-dimensional Gaussian by ``2N + 1``
deterministically chosen, weighted points.  Pushing the points through a
nonlinear map and re-estimating mean and covariance from the weighted images
is exact for affine maps and second-order accurate in general.

Weights use the standard normalization ``w0 = lam / (N + lam)`` and
``wi = 1 / (2 (N + lam))`` for the off-center points, which sums to one for
every admissible ``lam``.  Heading-like state components are periodic, so
callers flag them as *angular*: their means are computed as the atan2 of
weighted sines and cosines and their residuals are wrapped before forming
covariances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import CholeskyFailure
from .geometry import wrap_angle, wrap_angle_array

# Jitter escalation bounds, relative to trace(cov): start at 1e-12 * trace / N
# per diagonal entry, multiply by 10 until the total reaches 1e-6 * trace.
_JITTER_REL_START = 1e-12
_JITTER_REL_LIMIT = 1e-6


@dataclass(slots=True)
class GaussianState:
    """Mean vector and covariance matrix of a Gaussian belief."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=float).reshape(-1)
        self.cov = np.asarray(self.cov, dtype=float)
        n = self.mean.shape[0]
        if self.cov.shape != (n, n):
            raise ValueError(f"covariance shape {self.cov.shape} does not match dimension {n}")

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(slots=True)
class SigmaSet:
    """Weighted sigma-point ensemble: ``points[:, i]`` is the i-th point.

    Column 0 is the generating mean; columns ``i`` and ``i + N`` are the
    mean plus/minus the i-th column of the scaled Cholesky factor.
    """

    points: np.ndarray  # (N, 2N+1)
    weights: np.ndarray  # (2N+1,)
    lam: float

    @property
    def dim(self) -> int:
        return self.points.shape[0]


def lambda_default(n: int) -> float:
    """Classical spread heuristic ``lam = 3 - N`` (so ``N + lam = 3``)."""
    return 3.0 - float(n)


_weight_cache: dict[tuple[int, float], np.ndarray] = {}


def ut_weights(n: int, lam: float) -> np.ndarray:
    """Weight vector for ``2n + 1`` sigma points; always sums to one."""
    if n + lam <= 0.0:
        raise ValueError(f"need N + lambda > 0, got N={n}, lambda={lam}")
    cached = _weight_cache.get((n, lam))
    if cached is None:
        cached = np.full(2 * n + 1, 1.0 / (2.0 * (n + lam)))
        cached[0] = lam / (n + lam)
        cached.setflags(write=False)
        _weight_cache[(n, lam)] = cached
    return cached


def _stabilized_cholesky(cov: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of a symmetrized covariance, with jitter.

    Round-off routinely leaves covariances indefinite by a hair, so on
    failure a small multiple of ``trace / N`` is added to the diagonal and
    escalated tenfold up to ``1e-6 * trace`` before giving up.  An exactly
    zero matrix factors to zero (zero spread is legitimate).
    """
    sym = 0.5 * (cov + cov.T)
    try:
        return np.linalg.cholesky(sym)
    except np.linalg.LinAlgError:
        pass
    n = sym.shape[0]
    trace = float(np.trace(sym))
    if trace <= 0.0:
        if np.all(sym == 0.0):
            return np.zeros_like(sym)
        raise CholeskyFailure("covariance has non-positive trace and is not zero")
    jitter = _JITTER_REL_START * trace / n
    limit = _JITTER_REL_LIMIT * trace
    while jitter * n <= limit:
        try:
            return np.linalg.cholesky(sym + jitter * np.eye(n))
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise CholeskyFailure(f"covariance not positive definite after jitter up to {limit:g}")


def _sigma_points_raw(mean: np.ndarray, cov: np.ndarray, lam: float | None) -> SigmaSet:
    n = mean.shape[0]
    if lam is None:
        lam = lambda_default(n)
    if n + lam <= 0.0:
        raise ValueError(f"need N + lambda > 0, got N={n}, lambda={lam}")
    factor = _stabilized_cholesky((n + lam) * cov)
    pts = np.empty((n, 2 * n + 1))
    pts[:, 0] = mean
    pts[:, 1 : n + 1] = mean[:, None] + factor
    pts[:, n + 1 :] = mean[:, None] - factor
    return SigmaSet(points=pts, weights=ut_weights(n, lam), lam=lam)


def sigma_points(state: GaussianState, lam: float | None = None) -> SigmaSet:
    """Generate the ``2N + 1`` sigma points of a Gaussian.

    Raises
    ------
    CholeskyFailure
        If the covariance is not positive definite after jitter escalation.
    """
    return _sigma_points_raw(state.mean, state.cov, lam)


def weighted_mean(points: np.ndarray, weights: np.ndarray, angular: Sequence[int] = ()) -> np.ndarray:
    """Weighted mean of point columns; angular slots use the circular mean."""
    mean = points @ weights
    for idx in angular:
        row = points[idx]
        mean[idx] = wrap_angle(
            float(np.arctan2(np.sin(row) @ weights, np.cos(row) @ weights))
        )
    return mean


def residuals(points: np.ndarray, center: np.ndarray, angular: Sequence[int] = ()) -> np.ndarray:
    """Column-wise deviations from ``center``, wrapped in angular slots."""
    dev = points - center[:, None]
    for idx in angular:
        dev[idx] = wrap_angle_array(dev[idx])
    return dev


def reconstruct(sigma: SigmaSet, angular: Sequence[int] = ()) -> GaussianState:
    """Recover mean and covariance from a weighted sigma-point ensemble."""
    mean = weighted_mean(sigma.points, sigma.weights, angular)
    dev = residuals(sigma.points, mean, angular)
    cov = (dev * sigma.weights) @ dev.T
    cov = 0.5 * (cov + cov.T)
    return GaussianState(mean=mean, cov=cov)


def transform_moments(
    sigma: SigmaSet,
    transformed: np.ndarray,
    center_in: np.ndarray,
    angular_in: Sequence[int] = (),
    angular_out: Sequence[int] = (),
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Joint moments of a sigma set and its images under some map.

    Given output columns ``transformed[:, i] = g(sigma.points[:, i])``,
    returns ``(out_mean, out_cov, cross_cov)`` where ``out_cov`` carries no
    additive noise term and ``cross_cov`` is the input-output covariance
    about ``center_in``.
    """
    w = sigma.weights
    out_mean = weighted_mean(transformed, w, angular_out)
    dev_out = residuals(transformed, out_mean, angular_out)
    dev_in = residuals(sigma.points, center_in, angular_in)
    out_cov = (dev_out * w) @ dev_out.T
    out_cov = 0.5 * (out_cov + out_cov.T)
    cross = (dev_in * w) @ dev_out.T
    return out_mean, out_cov, cross


def propagate(
    state: GaussianState,
    func: Callable[[np.ndarray], np.ndarray],
    lam: float | None = None,
    angular: Sequence[int] = (),
) -> GaussianState:
    """Push a Gaussian through ``func`` (applied to point columns) and refit."""
    sigma = sigma_points(state, lam)
    images = np.asarray(func(sigma.points), dtype=float)
    mean = weighted_mean(images, sigma.weights, angular)
    dev = residuals(images, mean, angular)
    cov = (dev * sigma.weights) @ dev.T
    return GaussianState(mean=mean, cov=0.5 * (cov + cov.T))
