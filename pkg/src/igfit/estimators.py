"""
Scale-equivariant estimators of (mu, lambda) and the scaled sample.

Both estimators use the sample mean for ``mu``; they differ in ``lambda``:

- ML: ``lam = 1 / mean(1/x - 1/xbar)``
- MO: ``lam = xbar**3 / (mean(x**2) - xbar**2)``

Sums are compensated (``math.fsum``) so that ``estimate(beta * x)`` equals
``beta * estimate(x)`` to a few ulps even for long samples.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from igfit.errors import DegenerateSampleError, DomainError
from igfit.ig_core import IGParams

__all__ = [
    "EstimatorKind",
    "ScaledSample",
    "as_sample",
    "estimate",
    "estimate_ml",
    "estimate_mo",
    "scale_sample",
]


class EstimatorKind(str, enum.Enum):
    ML = "ml"
    MO = "mo"


def as_sample(x: ArrayLike, min_size: int = 2) -> np.ndarray:
    """Validate raw observations and return them as a float array."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DomainError("sample must be one-dimensional")
    if x.size < min_size:
        raise DomainError(f"need at least {min_size} observations, got {x.size}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("observations must be positive and finite")
    return x


def estimate_ml(x: ArrayLike, unbiased: bool = False) -> IGParams:
    """Maximum likelihood estimates.

    With ``unbiased=True`` the shape estimate is multiplied by ``(n - 1) / n``,
    which gives the UMVU estimator of lambda.
    """
    x = as_sample(x)
    n = x.size
    mu = math.fsum(x) / n
    # mean(1/x) - 1/mu rewritten as a sum of nonnegative terms, which avoids
    # cancellation for nearly constant samples
    denom = math.fsum((x - mu) ** 2 / x) / (n * mu * mu)
    # zero (or rounding noise) means constant data
    if not denom > 4 * np.finfo(float).eps / mu:
        raise DegenerateSampleError("sample is (numerically) constant; ML shape undefined")
    lam = 1.0 / denom
    if unbiased:
        lam *= (n - 1) / n
    return IGParams(mu, lam)


def estimate_mo(x: ArrayLike) -> IGParams:
    x = as_sample(x)
    n = x.size
    mu = math.fsum(x) / n
    # central second moment; mean(x**2) - mu**2 cancels badly for small spread
    var = math.fsum((x - mu) ** 2) / n
    if not var > (4 * np.finfo(float).eps * mu) ** 2:
        raise DegenerateSampleError("sample variance is zero; MO shape undefined")
    return IGParams(mu, mu**3 / var)


def estimate(x: ArrayLike, kind: EstimatorKind | str) -> IGParams:
    kind = EstimatorKind(kind)
    return estimate_ml(x) if kind is EstimatorKind.ML else estimate_mo(x)


@dataclass(frozen=True)
class ScaledSample:
    """Observations divided by the estimated mean, with the fitted shape.

    Attributes
    ----------
    y : ndarray
        ``x / mu_hat``; has mean one.
    phi_hat : float
        ``lam_hat / mu_hat``.
    source_estimates : IGParams
        The fitted ``(mu_hat, lam_hat)`` on the original scale.
    """

    y: np.ndarray
    phi_hat: float
    source_estimates: IGParams

    @property
    def n(self) -> int:
        return self.y.size


def scale_sample(x: ArrayLike, kind: EstimatorKind | str = EstimatorKind.ML) -> ScaledSample:
    x = as_sample(x)
    p = estimate(x, kind)
    y = x / p.mu
    y.setflags(write=False)
    return ScaledSample(y=y, phi_hat=p.phi, source_estimates=p)
