"""
Competitor statistics and the uniform ``StatKind`` dispatch.

Every statistic here is a function of the scaled sample ``y = x / mu_hat``
and the fitted shape ``phi_hat`` only, because the IG family is a scale
family: ``F(x; mu, lam) == F(x / mu; 1, lam / mu)``. The batched ``*_batch``
functions take ``y`` of shape (m, n) and ``phi`` of shape (m,) and reduce
each row independently.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from igfit.errors import DomainError, NumericalError
from igfit.estimators import EstimatorKind, ScaledSample, as_sample, estimate_ml, scale_sample
from igfit.ig_core import IGParams, ig_cdf, ig_laplace
from igfit.stein import WeightKind, WeightSpec, _quad, stein_statistic_batch

__all__ = [
    "StatTag",
    "StatKind",
    "ks_stat",
    "cm_stat",
    "ad_stat",
    "hk1_stat",
    "hk2_stat",
    "vg_stat",
    "compute_statistic",
    "scaled_statistic",
    "statistic_batch",
    "TABLE_STATS",
]

# F-hat is clamped here before taking logs in the AD statistic
AD_CLAMP = (1e-300, 1.0 - 1e-16)


class StatTag(str, enum.Enum):
    STEIN = "stein"
    STEIN_SQ = "stein-sq"
    KS = "ks"
    CM = "cm"
    AD = "ad"
    HK1 = "hk1"
    HK2 = "hk2"
    VG = "vg"


_ML_ONLY = {StatTag.HK1, StatTag.HK2, StatTag.VG}
_NEEDS_A = {StatTag.STEIN, StatTag.STEIN_SQ}


@dataclass(frozen=True)
class StatKind:
    """A test statistic together with its estimator and tuning parameter.

    ``a`` is required (and positive) for the Stein statistics, optional for
    HK1 (default 0), and must be 0 or absent for HK2.
    """

    tag: StatTag
    estimator: EstimatorKind = EstimatorKind.ML
    a: float | None = None

    def __post_init__(self):
        tag = StatTag(self.tag)
        est = EstimatorKind(self.estimator)
        object.__setattr__(self, "tag", tag)
        object.__setattr__(self, "estimator", est)
        a = self.a
        if tag in _ML_ONLY and est is not EstimatorKind.ML:
            raise DomainError(f"{tag.value} is defined with maximum likelihood estimates only")
        if tag in _NEEDS_A:
            if a is None or not a > 0:
                raise DomainError(f"{tag.value} needs a tuning parameter a > 0")
        elif tag is StatTag.HK1:
            a = 0.0 if a is None else float(a)
            if a < 0:
                raise DomainError("hk1 needs a >= 0")
        elif tag is StatTag.HK2:
            if a not in (None, 0, 0.0):
                raise DomainError("hk2 is implemented for a = 0 only")
            a = 0.0
        elif a is not None:
            raise DomainError(f"{tag.value} takes no tuning parameter")
        object.__setattr__(self, "a", None if a is None else float(a))

    @classmethod
    def parse(cls, text: str) -> "StatKind":
        """Parse ``stat[:estimator[:a]]``, e.g. ``stein:mo:10`` or ``ad``."""
        parts = text.strip().split(":")
        if not 1 <= len(parts) <= 3:
            raise DomainError(f"cannot parse statistic {text!r}")
        tag = parts[0].lower()
        est = parts[1].lower() if len(parts) > 1 and parts[1] else "ml"
        a = float(parts[2]) if len(parts) > 2 else None
        try:
            return cls(StatTag(tag), EstimatorKind(est), a)
        except ValueError as exc:
            raise DomainError(str(exc)) from exc

    @property
    def label(self) -> str:
        """Short display label, e.g. ``T~^MO_a=10``."""
        a = "" if self.a is None else f"{self.a:g}"
        est = self.estimator.value.upper()
        return {
            StatTag.STEIN: f"T^{est}_a={a}",
            StatTag.STEIN_SQ: f"T~^{est}_a={a}",
            StatTag.KS: "KS",
            StatTag.CM: "CM",
            StatTag.AD: "AD",
            StatTag.HK1: f"HK1_a={a}",
            StatTag.HK2: "HK2_a=0",
            StatTag.VG: "VG",
        }[self.tag]

    def __str__(self):
        a = "" if self.a is None else f":{self.a:g}"
        return f"{self.tag.value}:{self.estimator.value}{a}"


def _ordered_cdf(y, phi):
    """``F(y_(j); 1, phi)`` at the order statistics of each row."""
    y = np.sort(np.atleast_2d(y), axis=-1)
    phi = np.asarray(phi, dtype=float).reshape(-1, 1)
    r = np.sqrt(phi / y)
    first = special.ndtr(r * (y - 1.0))
    second = np.exp(2.0 * phi + special.log_ndtr(-r * (y + 1.0)))
    return np.clip(first + second, 0.0, 1.0)


def ks_batch(y, phi):
    F = _ordered_cdf(y, phi)
    n = F.shape[-1]
    j = np.arange(1, n + 1)
    d_plus = (j / n - F).max(axis=-1)
    d_minus = (F - (j - 1) / n).max(axis=-1)
    return np.maximum(d_plus, d_minus)


def cm_batch(y, phi):
    F = _ordered_cdf(y, phi)
    n = F.shape[-1]
    j = np.arange(1, n + 1)
    return 1.0 / (12 * n) + ((F - (2 * j - 1) / (2 * n)) ** 2).sum(axis=-1)


def ad_batch(y, phi):
    F = np.clip(_ordered_cdf(y, phi), *AD_CLAMP)
    n = F.shape[-1]
    j = np.arange(1, n + 1)
    s = ((2 * j - 1) * np.log(F) + (2 * (n - j) + 1) * np.log1p(-F)).sum(axis=-1)
    return -n - s / n


def hk1_batch(y, phi, a=0.0):
    y = np.atleast_2d(y)
    n = y.shape[-1]
    phi = np.asarray(phi, dtype=float).reshape(-1, 1, 1)
    yj, yk = y[:, :, None], y[:, None, :]
    ysum = yj + yk
    z = phi * (ysum + a)
    inner = (
        1.0
        - ysum * (1.0 + np.sqrt(np.pi / (2.0 * z)) * special.erfcx(np.sqrt(z / 2.0)))
        + (1.0 + 2.0 / z) * yj * yk
    )
    return phi[:, 0, 0] / n * (inner / z).sum(axis=-1).sum(axis=-1)


def hk2_batch(y, phi):
    y = np.atleast_2d(y)
    n = y.shape[-1]
    phi2 = np.asarray(phi, dtype=float).reshape(-1, 1)
    pair = (1.0 / (y[:, :, None] + y[:, None, :])).sum(axis=-1).sum(axis=-1) / n
    arg = np.sqrt(phi2) * (y + 1.0) / np.sqrt(2.0 * y)
    single = (1.0 - np.sqrt(np.pi * phi2 / (2.0 * y)) * special.erfcx(arg)) / y
    phi1 = phi2[:, 0]
    return pair - 2.0 * single.sum(axis=-1) + n * (1.0 + 2.0 * phi1) / (4.0 * phi1)


def vg_batch(y, phi):
    """Signed statistic; ``S^2`` uses the ``n - 1`` denominator."""
    y = np.atleast_2d(y)
    n = y.shape[-1]
    phi = np.asarray(phi, dtype=float)
    # y has unit mean, so S_y^2 = S_x^2 / mu_hat^2
    s2 = ((y - y.mean(axis=-1, keepdims=True)) ** 2).sum(axis=-1) / (n - 1)
    return np.sqrt(n * phi / 6.0) * (phi * s2 - 1.0)


# --- single-sample API ------------------------------------------------------


def _fhat_at_order_stats(x, p: IGParams):
    x = np.sort(as_sample(x, min_size=1))
    return np.asarray(ig_cdf(x, p), dtype=float).reshape(-1)


def ks_stat(x: ArrayLike, p: IGParams) -> float:
    """Kolmogorov-Smirnov distance between the EDF of ``x`` and IG(p)."""
    F = _fhat_at_order_stats(x, p)
    n = F.size
    j = np.arange(1, n + 1)
    return float(max((j / n - F).max(), (F - (j - 1) / n).max()))


def cm_stat(x: ArrayLike, p: IGParams) -> float:
    F = _fhat_at_order_stats(x, p)
    n = F.size
    j = np.arange(1, n + 1)
    return float(1.0 / (12 * n) + ((F - (2 * j - 1) / (2 * n)) ** 2).sum())


def ad_stat(x: ArrayLike, p: IGParams) -> float:
    F = np.clip(_fhat_at_order_stats(x, p), *AD_CLAMP)
    n = F.size
    j = np.arange(1, n + 1)
    return float(-n - ((2 * j - 1) * np.log(F) + (2 * (n - j) + 1) * np.log1p(-F)).sum() / n)


def hk1_stat(z: ScaledSample, a: float = 0.0) -> float:
    """Henze-Klar statistic from the Laplace-transform differential equation."""
    if a < 0:
        raise DomainError("hk1 needs a >= 0")
    return float(hk1_batch(z.y, z.phi_hat, a)[0])


def hk2_stat(z: ScaledSample) -> float:
    """Henze-Klar L2 distance between empirical and fitted Laplace transforms (a = 0).

    The closed form used by ``hk2_batch`` subtracts terms of size O(n) to
    produce values that can be as small as 1e-5, which costs about five
    digits. Here the squared difference is integrated directly instead,
    after mapping (0, inf) onto (0, 1); that keeps close to full precision.
    Falls back to the closed form if the quadrature does not converge.
    """
    y = np.asarray(z.y, dtype=float)
    fitted = IGParams(1.0, z.phi_hat)

    def integrand(u):
        if u >= 1.0:
            return 0.0
        s = u / (1.0 - u)
        d = np.mean(np.exp(-s * y)) - ig_laplace(s, fitted)
        return d * d / (1.0 - u) ** 2

    try:
        return z.n * _quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-13)
    except NumericalError:
        return float(hk2_batch(y, z.phi_hat)[0])


def vg_stat(x: ArrayLike) -> float:
    """Variance-ratio statistic; asymptotically N(0, 1), two-sided in use."""
    x = as_sample(x)
    p = estimate_ml(x)
    return float(vg_batch(x / p.mu, p.phi)[0])


# --- dispatch ---------------------------------------------------------------


def statistic_batch(kind: StatKind, y: ArrayLike, phi: ArrayLike) -> np.ndarray:
    """Raw statistic values for each row of ``y`` (signed for VG)."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    phi = np.broadcast_to(np.asarray(phi, dtype=float), (y.shape[0],))
    tag = kind.tag
    if tag is StatTag.STEIN:
        return np.atleast_1d(stein_statistic_batch(y, phi, WeightSpec(WeightKind.EXP, kind.a)))
    if tag is StatTag.STEIN_SQ:
        return np.atleast_1d(stein_statistic_batch(y, phi, WeightSpec(WeightKind.EXP_SQ, kind.a)))
    if tag is StatTag.KS:
        return ks_batch(y, phi)
    if tag is StatTag.CM:
        return cm_batch(y, phi)
    if tag is StatTag.AD:
        return ad_batch(y, phi)
    if tag is StatTag.HK1:
        return hk1_batch(y, phi, kind.a)
    if tag is StatTag.HK2:
        return hk2_batch(y, phi)
    return vg_batch(y, phi)


def rejection_score(kind: StatKind, values: np.ndarray) -> np.ndarray:
    """Map raw values to the scale on which large values reject (``|VG|`` for VG)."""
    return np.abs(values) if kind.tag is StatTag.VG else values


def scaled_statistic(kind: StatKind, z: ScaledSample) -> float:
    """Raw statistic for one scaled sample; uses the more accurate single-sample HK2."""
    if kind.tag is StatTag.HK2:
        return hk2_stat(z)
    return float(statistic_batch(kind, z.y, z.phi_hat)[0])


def compute_statistic(x: ArrayLike, kind: StatKind) -> float:
    """Raw statistic of ``kind`` for the unscaled sample ``x``."""
    return scaled_statistic(kind, scale_sample(x, kind.estimator))


def _table_stats():
    out = [
        StatKind(StatTag.KS),
        StatKind(StatTag.CM),
        StatKind(StatTag.AD),
        StatKind(StatTag.HK1, a=0.0),
        StatKind(StatTag.HK2),
        StatKind(StatTag.VG),
    ]
    for tag in (StatTag.STEIN, StatTag.STEIN_SQ):
        for est in (EstimatorKind.ML, EstimatorKind.MO):
            for a in (0.1, 1.0, 10.0):
                out.append(StatKind(tag, est, a))
    return tuple(out)


# the 18 statistics of the standard comparison grid, in column order
TABLE_STATS = _table_stats()
