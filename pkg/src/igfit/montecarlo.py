"""
Parametric bootstrap tests and warp-speed Monte Carlo power studies.

Reproducibility rests on per-replicate random streams: replicate ``i`` draws
from ``SeedSequence(seed, spawn_key=(i, role))`` where ``role`` separates the
data draw from the bootstrap draw of each estimator. Replicates are processed
in fixed-size chunks, so the thread count never changes a result.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from igfit.competing import StatKind, rejection_score, scaled_statistic, statistic_batch
from igfit.errors import DegenerateSampleError, DomainError, NumericalError
from igfit.estimators import EstimatorKind, as_sample, estimate, scale_sample
from igfit.ig_core import IGParams, ig_sample

__all__ = [
    "AltFamily",
    "AltSpec",
    "BootstrapConfig",
    "TestOutcome",
    "PowerStudyConfig",
    "PowerResult",
    "substream",
    "sample_alternative",
    "bootstrap_test",
    "bootstrap_tests",
    "warp_speed_power",
    "default_threads",
    "TABLE_ALTERNATIVES",
]

CHUNK = 250
_ESTIMATORS = (EstimatorKind.ML, EstimatorKind.MO)
_DATA_ROLE = 0


def _boot_role(est: EstimatorKind) -> int:
    return 1 + _ESTIMATORS.index(est)


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator keyed injectively by ``(seed, *key)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def default_threads() -> int:
    env = os.environ.get("IGFIT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# --- alternatives -----------------------------------------------------------


class AltFamily(str, enum.Enum):
    WEIBULL = "weibull"
    LOGNORMAL = "lognormal"
    LOGNORMAL_VAR = "lognormal-var"
    GAMMA = "gamma"
    CHISQ = "chisq"
    DHILLON = "dhillon"
    IG = "ig"


_SHORT = {
    AltFamily.WEIBULL: "W",
    AltFamily.LOGNORMAL: "LN",
    AltFamily.LOGNORMAL_VAR: "LNvar",
    AltFamily.GAMMA: "Gamma",
    AltFamily.CHISQ: "ChiSq",
    AltFamily.DHILLON: "DH",
    AltFamily.IG: "IG",
}

_ALIASES = {"w": "weibull", "ln": "lognormal", "lnvar": "lognormal-var", "chi2": "chisq", "dh": "dhillon"}


@dataclass(frozen=True)
class AltSpec:
    """One of the unit-scale families used as alternatives (IG means IG(1, theta)).

    ``lognormal`` takes theta as the standard deviation of ``log X``;
    ``lognormal-var`` takes it as the variance, which is the convention behind
    the lognormal rows of ``TABLE_ALTERNATIVES``.
    """

    family: AltFamily
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "family", AltFamily(self.family))
        if not (math.isfinite(self.theta) and self.theta > 0):
            raise DomainError(f"theta must be positive, got {self.theta!r}")

    @classmethod
    def parse(cls, text: str) -> "AltSpec":
        """Parse ``family:theta``, e.g. ``weibull:1.2`` or ``ln:3``."""
        try:
            fam, theta = text.split(":")
            fam = _ALIASES.get(fam.strip().lower(), fam.strip().lower())
            return cls(AltFamily(fam), float(theta))
        except ValueError as exc:
            raise DomainError(f"cannot parse alternative {text!r}") from exc

    @property
    def label(self) -> str:
        return f"{_SHORT[self.family]}({self.theta:g})"

    def dist(self):
        """Frozen scipy distribution with the same law (used for checks and limits)."""
        th = self.theta
        f = self.family
        if f is AltFamily.WEIBULL:
            return stats.weibull_min(th)
        if f is AltFamily.LOGNORMAL:
            return stats.lognorm(th)
        if f is AltFamily.LOGNORMAL_VAR:
            return stats.lognorm(math.sqrt(th))
        if f is AltFamily.GAMMA:
            return stats.gamma(th)
        if f is AltFamily.CHISQ:
            return stats.chi2(th)
        if f is AltFamily.IG:
            return stats.invgauss(1.0 / th, scale=th)
        return _Dhillon(th)


class _Dhillon:
    """Minimal frozen-distribution shim for the Dhillon law."""

    def __init__(self, theta):
        self.theta = theta

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = -np.expm1(-np.log1p(np.maximum(x, 0.0)) ** (self.theta + 1))
        return np.where(x > 0, out, 0.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        th = self.theta
        lg = np.log1p(np.maximum(x, 0.0))
        out = (th + 1) / (x + 1) * np.exp(-(lg ** (th + 1))) * lg**th
        return np.where(x > 0, out, 0.0)


def sample_alternative(alt: AltSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    th = alt.theta
    f = alt.family
    if f is AltFamily.WEIBULL:
        return rng.weibull(th, size=n)
    if f is AltFamily.LOGNORMAL:
        return rng.lognormal(0.0, th, size=n)
    if f is AltFamily.LOGNORMAL_VAR:
        return rng.lognormal(0.0, math.sqrt(th), size=n)
    if f is AltFamily.GAMMA:
        return rng.gamma(th, size=n)
    if f is AltFamily.CHISQ:
        return rng.chisquare(th, size=n)
    if f is AltFamily.IG:
        return ig_sample(IGParams(1.0, th), n, rng)
    # inverse CDF: -log(1 - U) is a standard exponential
    return np.expm1(rng.standard_exponential(size=n) ** (1.0 / (th + 1.0)))


def _alts():
    rows = [("ig", t) for t in (1, 5, 10, 20)]
    rows += [("weibull", t) for t in (1, 1.2, 1.6, 2, 3)]
    rows += [("lognormal-var", t) for t in (0.6, 1, 1.4, 2, 3)]
    rows += [("gamma", t) for t in (1, 1.5, 2, 2.5)]
    rows += [("chisq", t) for t in (3, 5, 10)]
    rows += [("dhillon", t) for t in (1, 1.5, 2)]
    return tuple(AltSpec(AltFamily(f), float(t)) for f, t in rows)


# the 24 alternatives of the standard power grid, in row order
TABLE_ALTERNATIVES = _alts()


# --- shared machinery -------------------------------------------------------


def _draw_null(phi: float, n: int, est: EstimatorKind, rng, cap: int, counter: list):
    """IG(1, phi) sample of size n that the estimator accepts; redraws are counted."""
    p = IGParams(1.0, phi)
    while True:
        x = ig_sample(p, n, rng)
        try:
            z = scale_sample(x, est)
        except DegenerateSampleError:
            counter[0] += 1
            if counter[0] > cap:
                raise NumericalError("too many degenerate bootstrap samples")
            continue
        return z.y, z.phi_hat


def _map_chunks(fn, total: int, threads: int):
    chunks = [(lo, min(total, lo + CHUNK)) for lo in range(0, total, CHUNK)]
    if threads <= 1 or len(chunks) <= 1:
        return [fn(lo, hi) for lo, hi in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda c: fn(*c), chunks))


def _kinds_by_estimator(kinds):
    groups: dict[EstimatorKind, list[StatKind]] = {}
    for k in kinds:
        groups.setdefault(k.estimator, []).append(k)
    return groups


# --- classical parametric bootstrap -----------------------------------------


@dataclass(frozen=True)
class BootstrapConfig:
    b: int = 10_000
    alpha: float = 0.10
    seed: int = 0

    def __post_init__(self):
        if self.b < 100:
            raise DomainError("need at least 100 bootstrap replicates")
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")
        if self.b * self.alpha < 1:
            raise DomainError("b * alpha must be at least 1")


@dataclass(frozen=True)
class TestOutcome:
    """Result of a bootstrap test.

    ``statistic`` is on the rejection scale (``|VG|`` for VG; the raw value
    for all others), so ``reject == statistic > critical_value`` always holds.
    ``raw_statistic`` keeps the signed VG value.
    """

    __test__ = False  # not a pytest class

    kind: StatKind
    statistic: float
    raw_statistic: float
    critical_value: float
    p_value: float
    reject: bool
    b: int
    alpha: float
    seed: int
    redraws: int = 0
    estimates: IGParams | None = None


def _quantile_index(count: int, level: float) -> int:
    """0-based index of the empirical ``level``-quantile, ``inf{t: F(t) >= level}``."""
    k = math.ceil(count * level - 1e-9)
    return min(max(k, 1), count) - 1


def bootstrap_tests(x, kinds, cfg: BootstrapConfig, threads: int | None = None) -> list[TestOutcome]:
    """Run several bootstrap tests on one sample.

    Statistics that share an estimator also share bootstrap samples; the draws
    for replicate ``k`` depend only on ``(seed, k, estimator)``, so each
    outcome equals what ``bootstrap_test`` would return for that kind alone.
    """
    x = as_sample(x)
    n = x.size
    threads = default_threads() if threads is None else threads
    kinds = list(kinds)
    out: dict[StatKind, TestOutcome] = {}
    for est, group in _kinds_by_estimator(kinds).items():
        z = scale_sample(x, est)
        role = _boot_role(est)
        counter = [0]
        cap = 10 * cfg.b

        def work(lo, hi, group=group, z=z, role=role, counter=counter):
            ys = np.empty((hi - lo, n))
            phis = np.empty(hi - lo)
            for r, i in enumerate(range(lo, hi)):
                ys[r], phis[r] = _draw_null(z.phi_hat, n, est, substream(cfg.seed, i, role), cap, counter)
            return [rejection_score(k, statistic_batch(k, ys, phis)) for k in group]

        parts = _map_chunks(work, cfg.b, threads)
        for gi, kind in enumerate(group):
            boot = np.concatenate([p[gi] for p in parts])
            raw = scaled_statistic(kind, z)
            obs = float(rejection_score(kind, np.asarray(raw)))
            crit = float(np.sort(boot)[_quantile_index(cfg.b, 1 - cfg.alpha)])
            p = (1 + int(np.count_nonzero(boot >= obs))) / (cfg.b + 1)
            out[kind] = TestOutcome(
                kind=kind,
                statistic=obs,
                raw_statistic=raw,
                critical_value=crit,
                p_value=p,
                reject=obs > crit,
                b=cfg.b,
                alpha=cfg.alpha,
                seed=cfg.seed,
                redraws=counter[0],
                estimates=z.source_estimates,
            )
    return [out[k] for k in kinds]


def bootstrap_test(x, kind: StatKind, cfg: BootstrapConfig, threads: int | None = None) -> TestOutcome:
    """Parametric bootstrap test of inverse Gaussianity with statistic ``kind``.

    The p-value is ``(1 + #{T*_k >= T}) / (b + 1)``.
    """
    return bootstrap_tests(x, [kind], cfg, threads)[0]


# --- warp-speed power -------------------------------------------------------


@dataclass(frozen=True)
class PowerStudyConfig:
    alt: AltSpec
    n: int
    mc: int
    stats: tuple[StatKind, ...]
    alpha: float = 0.10
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "stats", tuple(self.stats))
        if self.n < 2:
            raise DomainError("sample size must be at least 2")
        if self.mc < 1:
            raise DomainError("need at least one Monte Carlo replicate")
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")
        if math.floor(self.mc * (1 - self.alpha)) < 1:
            raise DomainError("mc * (1 - alpha) must be at least 1")
        if not self.stats:
            raise DomainError("no statistics requested")


@dataclass(frozen=True)
class PowerResult:
    """Rejection percentages per statistic.

    ``power`` holds unrounded percentages; ``mc_se`` the Monte Carlo standard
    error in percentage points, ``100 * sqrt(p (1 - p) / mc)``.
    """

    config: PowerStudyConfig
    power: dict = field(default_factory=dict)
    mc_se: dict = field(default_factory=dict)
    critical_values: dict = field(default_factory=dict)
    redraws: int = 0

    def rounded(self) -> dict:
        return {k: int(math.floor(v + 0.5)) for k, v in self.power.items()}


def warp_speed_power(cfg: PowerStudyConfig, threads: int | None = None) -> PowerResult:
    """Approximate power with one bootstrap sample per Monte Carlo replicate.

    Replicate ``i`` is rejected when its statistic exceeds the
    ``floor(mc * (1 - alpha))``-th smallest of the pooled bootstrap statistics.
    All requested statistics see the same data and bootstrap samples.
    """
    threads = default_threads() if threads is None else threads
    n, alt = cfg.n, cfg.alt
    groups = _kinds_by_estimator(cfg.stats)
    ests = [e for e in _ESTIMATORS if e in groups]
    counter = [0]
    cap = 10 * cfg.mc

    def work(lo, hi):
        m = hi - lo
        ys = {e: np.empty((m, n)) for e in ests}
        phis = {e: np.empty(m) for e in ests}
        ybs = {e: np.empty((m, n)) for e in ests}
        phibs = {e: np.empty(m) for e in ests}
        for r, i in enumerate(range(lo, hi)):
            rng = substream(cfg.seed, i, _DATA_ROLE)
            while True:
                x = sample_alternative(alt, n, rng)
                try:
                    fits = {e: estimate(x, e) for e in ests}
                    break
                except DegenerateSampleError:
                    counter[0] += 1
                    if counter[0] > cap:
                        raise NumericalError("too many degenerate samples from the alternative")
            for e in ests:
                ys[e][r] = x / fits[e].mu
                phis[e][r] = fits[e].phi
                ybs[e][r], phibs[e][r] = _draw_null(
                    fits[e].phi, n, e, substream(cfg.seed, i, _boot_role(e)), cap, counter
                )
        res = {}
        for e in ests:
            for k in groups[e]:
                res[k] = (
                    rejection_score(k, statistic_batch(k, ys[e], phis[e])),
                    rejection_score(k, statistic_batch(k, ybs[e], phibs[e])),
                )
        return res

    parts = _map_chunks(work, cfg.mc, threads)
    idx = math.floor(cfg.mc * (1 - cfg.alpha)) - 1
    power, se, crits = {}, {}, {}
    for k in cfg.stats:
        s = np.concatenate([p[k][0] for p in parts])
        sb = np.sort(np.concatenate([p[k][1] for p in parts]))
        crit = float(sb[idx])
        rate = float(np.count_nonzero(s > crit)) / cfg.mc
        power[k] = 100.0 * rate
        se[k] = 100.0 * math.sqrt(rate * (1 - rate) / cfg.mc)
        crits[k] = crit
    return PowerResult(cfg, power, se, crits, counter[0])
