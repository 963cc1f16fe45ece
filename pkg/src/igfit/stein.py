"""
Weighted L2 goodness-of-fit statistics built on the Stein-type identity

    E[ (phi + 3/X - phi/X**2) / 2 * min(X, t) ] = F(t),   t > 0,

which holds for every t exactly when X ~ IG(1, phi).

For scaled data ``Y_j = X_j / mu_hat`` and fitted ``phi_hat`` the statistic is

    T_n = n * int_0^inf | (1/2n) sum_j c_j min(Y_j, t) - F_n(t) |^2 w(t) dt,
    c_j = phi_hat + 3/Y_j - phi_hat/Y_j**2,

with ``w(t) = exp(-a t)`` (``statistic_T``) or ``w(t) = exp(-a t**2)``
(``statistic_T_tilde``). Expanding the square gives a double sum over pairs
``(j, k)`` of three kernels:

    h1(s, t) = int min(s, u) min(t, u) w(u) du
    h2(s, t) = int min(s, u) 1{t <= u} w(u) du
    tail(m)  = int 1{m <= u} w(u) du

which have closed forms for both weights.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate, special

from igfit.errors import DomainError, NumericalError
from igfit.estimators import ScaledSample
from igfit.ig_core import IGParams, ig_cdf, ig_pdf

__all__ = [
    "WeightKind",
    "WeightSpec",
    "stein_coefficients",
    "kernel_h1",
    "kernel_h2",
    "kernel_h1_tilde",
    "kernel_h2_tilde",
    "statistic_T",
    "statistic_T_tilde",
    "stein_statistic_batch",
    "stein_statistic_reference",
    "statistic_T_quadrature",
    "characterization_residual",
    "delta_limit",
]

SQRT_PI = math.sqrt(math.pi)


class WeightKind(str, enum.Enum):
    EXP = "exp"  # exp(-a t)
    EXP_SQ = "expsq"  # exp(-a t^2)


@dataclass(frozen=True)
class WeightSpec:
    kind: WeightKind
    a: float

    def __post_init__(self):
        object.__setattr__(self, "kind", WeightKind(self.kind))
        if not (math.isfinite(self.a) and self.a > 0):
            raise DomainError(f"tuning parameter a must be positive, got {self.a!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is WeightKind.EXP:
            return np.exp(-self.a * t)
        return np.exp(-self.a * t * t)

    def tail_mass(self, m):
        """``int_m^inf w(u) du`` for ``m >= 0``."""
        m = np.asarray(m, dtype=float)
        if self.kind is WeightKind.EXP:
            return np.exp(-self.a * m) / self.a
        return math.sqrt(math.pi / self.a) * special.ndtr(-math.sqrt(2 * self.a) * m)


def stein_coefficients(y: ArrayLike, phi) -> np.ndarray:
    """``c_j = phi + 3/y_j - phi/y_j**2``; ``phi`` broadcasts against all but the last axis."""
    y = np.asarray(y, dtype=float)
    phi = np.asarray(phi, dtype=float)[..., None]
    return phi + 3.0 / y - phi / (y * y)


# --- kernels for w(t) = exp(-a t) -------------------------------------------


def kernel_h1(s, t, a):
    """``int_0^inf min(s,u) min(t,u) exp(-a u) du``; symmetric in (s, t)."""
    s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    lo, hi = np.minimum(s, t), np.maximum(s, t)
    elo, ehi = np.exp(-a * lo), np.exp(-a * hi)
    alo, ahi = a * lo, a * hi
    out = (
        (2.0 - elo * ((alo + 1.0) ** 2 + 1.0)) / a**3
        + lo / a**2 * (elo * (alo + 1.0) - ehi * (ahi + 1.0))
        + lo * hi / a * ehi
    )
    return out[()] if out.ndim == 0 else out


def kernel_h2(s, t, a):
    """``int_0^inf min(s,u) 1{t <= u} exp(-a u) du``; not symmetric."""
    s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    es, et = np.exp(-a * s), np.exp(-a * t)
    le = s / a * et
    gt = (et * (a * t + 1.0) - es * (a * s + 1.0)) / a**2 + s / a * es
    out = np.where(s <= t, le, gt)
    return out[()] if out.ndim == 0 else out


# --- kernels for w(t) = exp(-a t^2) -----------------------------------------


def kernel_h1_tilde(s, t, a):
    """``int_0^inf min(s,u) min(t,u) exp(-a u^2) du``; symmetric in (s, t)."""
    s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    lo, hi = np.minimum(s, t), np.maximum(s, t)
    r = math.sqrt(2 * a)
    spa = math.sqrt(math.pi / a)
    out = (
        math.sqrt(math.pi / a**3) / 4.0
        - a / 2.0 * math.sqrt(math.pi / a**5) * special.ndtr(-r * lo)
        - lo / (2 * a) * np.exp(-a * hi * hi)
        + lo * hi * spa * special.ndtr(-r * hi)
    )
    return out[()] if out.ndim == 0 else out


def kernel_h2_tilde(s, t, a):
    """``int_0^inf min(s,u) 1{t <= u} exp(-a u^2) du``; not symmetric."""
    s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    r = math.sqrt(2 * a)
    spa = math.sqrt(math.pi / a)
    le = s * spa * special.ndtr(-r * t)
    gt = (np.exp(-a * t * t) - np.exp(-a * s * s)) / (2 * a) + s * spa * special.ndtr(-r * s)
    out = np.where(s <= t, le, gt)
    return out[()] if out.ndim == 0 else out


_KERNELS = {
    WeightKind.EXP: (kernel_h1, kernel_h2),
    WeightKind.EXP_SQ: (kernel_h1_tilde, kernel_h2_tilde),
}

# elements per temporary (m, block, n) array
_BLOCK_ELEMS = 1 << 21


def _pair_terms(yj, yk, cj, ck, w: WeightSpec):
    """Summand of the double sum for the (j, k) block.

    Every transcendental factor depends on one observation only, so it is
    evaluated per element and routed to ``min(Y_j, Y_k)`` or
    ``max(Y_j, Y_k)`` by selection. Agrees with the ``kernel_*`` functions.
    """
    a = w.a
    le = yj <= yk
    lo = np.where(le, yj, yk)
    hi = np.where(le, yk, yj)
    if w.kind is WeightKind.EXP:
        ej, ek = np.exp(-a * yj), np.exp(-a * yk)
        aj, ak = ej * (a * yj + 1.0), ek * (a * yk + 1.0)
        gj = (2.0 - ej * ((a * yj + 1.0) ** 2 + 1.0)) / a**3
        gk = (2.0 - ek * ((a * yk + 1.0) ** 2 + 1.0)) / a**3
        e_hi = np.where(le, ek, ej)
        a_lo, a_hi = np.where(le, aj, ak), np.where(le, ak, aj)
        h1 = np.where(le, gj, gk) + lo / a**2 * (a_lo - a_hi) + lo * hi / a * e_hi
        # h2(Y_j, Y_k) and h2(Y_k, Y_j)
        h2_jk = np.where(le, yj / a * ek, (ak - aj) / a**2 + yj / a * ej)
        h2_kj = np.where(le, (aj - ak) / a**2 + yk / a * ek, yk / a * ej)
        tail = e_hi / a
    else:
        r = math.sqrt(2 * a)
        spa = math.sqrt(math.pi / a)
        pj, pk = special.ndtr(-r * yj), special.ndtr(-r * yk)
        qj, qk = np.exp(-a * yj * yj), np.exp(-a * yk * yk)
        p_lo, p_hi = np.where(le, pj, pk), np.where(le, pk, pj)
        q_hi = np.where(le, qk, qj)
        h1 = (
            math.sqrt(math.pi / a**3) / 4.0
            - a / 2.0 * math.sqrt(math.pi / a**5) * p_lo
            - lo / (2 * a) * q_hi
            + lo * hi * spa * p_hi
        )
        h2_jk = np.where(le, yj * spa * pk, (qk - qj) / (2 * a) + yj * spa * pj)
        h2_kj = np.where(le, (qj - qk) / (2 * a) + yk * spa * pk, yk * spa * pj)
        tail = spa * p_hi
    return cj * ck * h1 - 2.0 * cj * h2_jk - 2.0 * ck * h2_kj + 4.0 * tail


def stein_statistic_batch(y: ArrayLike, phi: ArrayLike, w: WeightSpec) -> np.ndarray:
    """Closed-form statistic for a batch of scaled samples.

    Parameters
    ----------
    y : array_like, shape (m, n) or (n,)
        Scaled observations, one sample per row.
    phi : array_like, shape (m,) or scalar
        Fitted shape for each row.
    w : WeightSpec

    Returns
    -------
    ndarray, shape (m,) or scalar
        The double sum over all ordered pairs (j, k), divided by ``4n``.
        Rows are reduced independently, so a row's value does not depend on
        the other rows in the batch.
    """
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    y2 = np.atleast_2d(y)
    m, n = y2.shape
    phi = np.broadcast_to(np.asarray(phi, dtype=float), (m,))
    c = stein_coefficients(y2, phi)

    block = max(1, min(n, _BLOCK_ELEMS // max(1, m * n)))
    row_sums = np.empty((m, n))
    yk = y2[:, None, :]
    ck = c[:, None, :]
    for j0 in range(0, n, block):
        j1 = min(n, j0 + block)
        terms = _pair_terms(y2[:, j0:j1, None], yk, c[:, j0:j1, None], ck, w)
        row_sums[:, j0:j1] = terms.sum(axis=-1)
    # the statistic is a squared norm; only rounding can push it below zero
    out = np.maximum(row_sums.sum(axis=-1) / (4.0 * n), 0.0)
    return out[0] if single else out


def stein_statistic_reference(y: ArrayLike, phi: float, w: WeightSpec) -> float:
    """Unvectorized double sum straight from the ``kernel_*`` functions."""
    y = np.asarray(y, dtype=float)
    n = y.size
    c = stein_coefficients(y, phi)
    h1, h2 = _KERNELS[w.kind]
    yj, yk = y[:, None], y[None, :]
    cj, ck = c[:, None], c[None, :]
    terms = (
        cj * ck * h1(yj, yk, w.a)
        - 2.0 * cj * h2(yj, yk, w.a)
        - 2.0 * ck * h2(yk, yj, w.a)
        + 4.0 * w.tail_mass(np.maximum(yj, yk))
    )
    return max(float(terms.sum()) / (4.0 * n), 0.0)


def statistic_T(z: ScaledSample, a: float) -> float:
    """Statistic with weight ``exp(-a t)``."""
    return float(stein_statistic_batch(z.y, z.phi_hat, WeightSpec(WeightKind.EXP, a)))


def statistic_T_tilde(z: ScaledSample, a: float) -> float:
    """Statistic with weight ``exp(-a t**2)``."""
    return float(stein_statistic_batch(z.y, z.phi_hat, WeightSpec(WeightKind.EXP_SQ, a)))


# --- quadrature references ---------------------------------------------------


def _quad(f, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=500, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _err = integrate.quad(
                f, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit, points=points
            )
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"quadrature on [{lo}, {hi}] did not converge: {exc}") from exc
    if not math.isfinite(val):
        raise NumericalError(f"quadrature on [{lo}, {hi}] returned {val}")
    return val


def statistic_T_quadrature(z: ScaledSample, w: WeightSpec, tail_tol: float = 1e-15) -> float:
    """Direct numerical integration of the defining integral.

    The integrand has kinks at the data points, so the range is split there.
    Past the largest observation the bracket is constant; the upper limit is
    set where its product with the weight's tail mass drops below ``tail_tol``.
    """
    y = np.sort(np.asarray(z.y, dtype=float))
    n = y.size
    c = stein_coefficients(y, z.phi_hat)
    cy = c * y

    def bracket(t):
        inside = y <= t
        return 0.5 * (cy[inside].sum() + t * c[~inside].sum()) / n - inside.sum() / n

    def integrand(t):
        return n * bracket(t) ** 2 * w(t)

    edges = [0.0, *np.unique(y)]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += _quad(integrand, lo, hi)

    top = y[-1]
    const = n * bracket(top) ** 2
    upper = top
    step = 1.0 / math.sqrt(w.a) if w.kind is WeightKind.EXP_SQ else 1.0 / w.a
    while const * float(w.tail_mass(upper)) > tail_tol:
        upper += step
    if upper > top:
        total += _quad(integrand, top, upper)
    return total


def _expect(g: Callable, density: Callable, lo: float, hi: float, breaks=(), **tol) -> float:
    """``int_lo^hi g(x) density(x) dx`` split at ``breaks``."""
    pts = [lo, *sorted(b for b in breaks if lo < b < hi), hi]
    return sum(_quad(lambda x: g(x) * density(x), p, q, **tol) for p, q in zip(pts[:-1], pts[1:]))


def characterization_residual(
    phi: float,
    t: float,
    density: Callable[[float], float] | None = None,
    breaks=None,
    **tol,
) -> float:
    """Left minus right side of the Stein identity at ``t``.

    With ``density=None`` the expectation is taken under IG(1, phi) and the
    result is zero up to quadrature error for every ``phi, t > 0``; the right
    side then comes from the closed-form distribution function. Any other
    density on (0, inf) is handled by quadrature on both sides.
    """
    if not (phi > 0 and t > 0):
        raise DomainError("phi and t must be positive")
    g = lambda x: 0.5 * (phi + 3.0 / x - phi / (x * x))  # noqa: E731
    if density is None:
        p = IGParams(1.0, phi)
        f = lambda x: float(ig_pdf(x, p))  # noqa: E731
        sd = 1.0 / math.sqrt(phi)
        breaks = [max(1e-3, 1 - 4 * sd), 1.0, 1 + 4 * sd, 1 + 20 * sd]
        rhs = float(ig_cdf(t, p))
    else:
        f = lambda x: float(density(x))  # noqa: E731
        breaks = (0.5, 1.0, 2.0, 5.0) if breaks is None else breaks
        rhs = _expect(lambda x: 1.0, f, 0.0, t, breaks, **tol)
    lhs = _expect(lambda x: g(x) * x, f, 0.0, t, breaks, **tol)
    lhs += t * _expect(g, f, t, np.inf, breaks, **tol)
    return lhs - rhs


def delta_limit(
    alt_density: Callable[[float], float],
    phi: float,
    w: WeightSpec,
    breaks=(0.5, 1.0, 2.0, 5.0),
) -> float:
    """Almost-sure limit of ``T_n / n`` when the data follow ``alt_density``.

    ``alt_density`` must be a density on (0, inf) with unit mean and finite
    ``E[1/X]``; ``phi`` is the limit of the fitted shape. The inner
    expectations and the outer weighted integral are all done by quadrature.
    """
    if not phi > 0:
        raise DomainError("phi must be positive")
    f = lambda x: float(alt_density(x))  # noqa: E731
    try:
        mean = _expect(lambda x: x, f, 0.0, np.inf, breaks, epsabs=1e-12, epsrel=1e-10)
        inv_mean = _expect(lambda x: 1.0 / x, f, 0.0, np.inf, breaks, epsabs=1e-12, epsrel=1e-10)
    except NumericalError as exc:
        raise DomainError(f"alternative lacks finite E[X] or E[1/X]: {exc}") from exc
    if abs(mean - 1.0) > 1e-6:
        raise DomainError(f"alternative must be normalized to unit mean, got E[X]={mean}")
    if not math.isfinite(inv_mean):
        raise DomainError("alternative must have finite E[1/X]")

    def integrand(t):
        r = characterization_residual(phi, t, f, breaks, epsabs=1e-13, epsrel=1e-11)
        return r * r * float(w(t))

    return _quad(integrand, 0.0, np.inf, epsabs=1e-12, epsrel=1e-9, limit=200)
