import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from igfit.competing import (
    TABLE_STATS,
    StatKind,
    StatTag,
    ad_batch,
    ad_stat,
    cm_batch,
    cm_stat,
    compute_statistic,
    hk1_batch,
    hk1_stat,
    hk2_batch,
    hk2_stat,
    ks_batch,
    ks_stat,
    rejection_score,
    statistic_batch,
    vg_batch,
    vg_stat,
)
from igfit.errors import DomainError
from igfit.estimators import estimate_ml, scale_sample
from igfit.ig_core import IGParams, ig_cdf, ig_laplace, ig_sample


def laplace_integrals(z, a):
    y, phi = z.y, z.phi_hat

    def lap(s):
        return np.mean(np.exp(-s * y))

    def dlap(s):
        return -np.mean(y * np.exp(-s * y))

    def eps2(s):
        return (lap(s) + np.sqrt(1 + 2 * s / phi) * dlap(s)) ** 2 * np.exp(-a * s)

    def diff2(s):
        return (lap(s) - ig_laplace(s, IGParams(1.0, phi))) ** 2

    q = dict(epsabs=1e-14, epsrel=1e-11, limit=300)
    return (
        z.n * integrate.quad(eps2, 0, np.inf, **q)[0],
        z.n * integrate.quad(diff2, 0, np.inf, **q)[0],
    )


class TestGolden:
    def test_repair_times(self, repair_times):
        z = scale_sample(repair_times, "ml")
        p = z.source_estimates
        assert ks_stat(repair_times, p) == pytest.approx(0.0682, abs=5e-4)
        assert cm_stat(repair_times, p) == pytest.approx(0.0327, abs=5e-4)
        assert ad_stat(repair_times, p) == pytest.approx(0.2195, abs=5e-4)
        assert hk1_stat(z) == pytest.approx(0.0137, abs=5e-4)
        assert hk2_stat(z) == pytest.approx(0.0028, abs=5e-4)

    def test_jug_bridge_edf(self, jug_bridge):
        # cross-checked with scipy.stats.kstest / cramervonmises
        p = estimate_ml(jug_bridge)
        assert ks_stat(jug_bridge, p) == pytest.approx(0.14998, abs=1e-5)
        assert cm_stat(jug_bridge, p) == pytest.approx(0.12894, abs=1e-5)

    def test_agree_with_scipy(self, jug_bridge, repair_times):
        for x in (jug_bridge, repair_times):
            p = estimate_ml(x)
            cdf = lambda v: ig_cdf(v, p)  # noqa: E731
            assert ks_stat(x, p) == pytest.approx(stats.kstest(x, cdf).statistic, rel=1e-12)
            assert cm_stat(x, p) == pytest.approx(stats.cramervonmises(x, cdf).statistic, rel=1e-10)
            u = np.sort(cdf(x))
            n = len(x)
            i = np.arange(1, n + 1)
            ref = -n - np.mean((2 * i - 1) * (np.log(u) + np.log1p(-u[::-1])))
            assert ad_stat(x, p) == pytest.approx(ref, rel=1e-12)


class TestEdfStats:
    def test_ks_single_point(self):
        p = IGParams(1.0, 2.0)
        # choose x at the median so that F(x) = 0.5
        from scipy.optimize import brentq

        med = brentq(lambda v: ig_cdf(v, p) - 0.5, 0.01, 10)
        assert ks_stat([med], p) == pytest.approx(0.5, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(0.01, 30.0), min_size=2, max_size=30).filter(lambda v: np.ptp(v) > 1e-3))
    def test_lower_bounds(self, x):
        z = scale_sample(x, "ml")
        n = z.n
        assert ks_batch(z.y, z.phi_hat)[0] >= 1 / (2 * n) - 1e-12
        assert cm_batch(z.y, z.phi_hat)[0] >= 1 / (12 * n) - 1e-12
        assert ad_batch(z.y, z.phi_hat)[0] >= 0

    def test_ad_finite_at_extremes(self):
        y = np.array([1e-8, 1.0, 60.0])
        y = y / y.mean()
        assert np.isfinite(ad_batch(y, 100.0)).all()


class TestLaplaceStats:
    @pytest.mark.parametrize("seed", range(4))
    def test_against_integrals(self, seed):
        rng = np.random.default_rng(seed)
        x = ig_sample(IGParams(2.0, rng.uniform(0.5, 10)), 12, rng)
        z = scale_sample(x, "ml")
        for a in (0.0, 0.5, 3.0):
            hk1_ref, hk2_ref = laplace_integrals(z, a)
            assert hk1_batch(z.y, z.phi_hat, a)[0] == pytest.approx(hk1_ref, rel=1e-8)
        assert hk2_batch(z.y, z.phi_hat)[0] == pytest.approx(hk2_ref, rel=1e-8)

    def test_hk2_small_value_precision(self):
        # tight sample, so the statistic is tiny; 40-digit mpmath of the closed form
        z = scale_sample([0.9, 1.0, 1.05, 1.1, 1.2, 0.95, 1.3, 0.85], "ml")
        exact = 9.6439782513181731825e-8
        assert hk2_stat(z) == pytest.approx(exact, rel=1e-12)
        assert hk2_batch(z.y, z.phi_hat)[0] == pytest.approx(exact, rel=1e-6)

    def test_nonnegative(self):
        rng = np.random.default_rng(9)
        y = rng.gamma(0.7, size=(30, 20))
        y /= y.mean(axis=1, keepdims=True)
        phi = rng.uniform(0.1, 20, 30)
        assert (hk1_batch(y, phi) >= -1e-14).all()
        assert (hk2_batch(y, phi) >= -1e-14).all()


class TestVG:
    def test_zero_at_fixed_point(self):
        # phi * S_y^2 == 1 makes the statistic vanish
        y = np.array([0.5, 1.0, 1.5])
        s2 = np.var(y, ddof=1)
        assert vg_batch(y, 1.0 / s2)[0] == pytest.approx(0.0, abs=1e-15)

    def test_sign_and_score(self):
        kind = StatKind(StatTag.VG)
        vals = np.array([-0.7, 0.2])
        np.testing.assert_array_equal(rejection_score(kind, vals), [0.7, 0.2])
        other = StatKind(StatTag.KS)
        np.testing.assert_array_equal(rejection_score(other, vals), vals)

    def test_single_sample_matches_batch(self, repair_times):
        z = scale_sample(repair_times, "ml")
        assert vg_stat(repair_times) == pytest.approx(vg_batch(z.y, z.phi_hat)[0], rel=1e-13)


ALL_KINDS = [StatKind.parse(s) for s in ("ks", "cm:mo", "ad", "hk1", "hk1:ml:2", "hk2", "vg", "stein:mo:1", "stein-sq:ml:10")]


class TestInvariance:
    @settings(max_examples=30, deadline=None)
    @given(
        x=st.lists(st.floats(0.05, 20.0), min_size=4, max_size=15).filter(lambda v: np.ptp(v) > 1e-2),
        beta=st.floats(0.01, 100.0),
        seed=st.integers(0, 2**16),
    )
    def test_scale_and_permutation(self, x, beta, seed):
        x = np.array(x)
        perm = np.random.default_rng(seed).permutation(x)
        for kind in ALL_KINDS:
            base = compute_statistic(x, kind)
            assert compute_statistic(beta * x, kind) == pytest.approx(base, rel=1e-9, abs=1e-12)
            assert compute_statistic(perm, kind) == pytest.approx(base, rel=1e-12, abs=1e-14)

    def test_batch_matches_rowwise(self):
        rng = np.random.default_rng(2)
        x = rng.gamma(2.0, size=(5, 11))
        for kind in ALL_KINDS:
            zs = [scale_sample(r, kind.estimator) for r in x]
            y = np.stack([z.y for z in zs])
            phi = np.array([z.phi_hat for z in zs])
            rows = [compute_statistic(r, kind) for r in x]
            # single-sample HK2 avoids the cancellation of the batched closed form
            rtol = 1e-8 if kind.tag is StatTag.HK2 else 1e-12
            np.testing.assert_allclose(statistic_batch(kind, y, phi), rows, rtol=rtol)


class TestStatKind:
    @pytest.mark.parametrize("text", ["hk1:mo", "hk2:mo", "vg:mo", "stein", "stein:ml:0", "stein-sq:ml:-1", "hk2:ml:1", "ks:ml:1", "bogus", "ks:xx", "a:b:c:d"])
    def test_rejects(self, text):
        with pytest.raises(DomainError):
            StatKind.parse(text)

    def test_parse(self):
        k = StatKind.parse("STEIN:MO:10")
        assert (k.tag, k.estimator.value, k.a) == (StatTag.STEIN, "mo", 10.0)
        assert StatKind.parse("hk1").a == 0.0
        assert StatKind.parse("ad").a is None
        assert StatKind.parse(str(k)) == k

    def test_table_columns(self):
        assert len(TABLE_STATS) == 18
        assert len({k.label for k in TABLE_STATS}) == 18
        assert [k.tag.value for k in TABLE_STATS[:6]] == ["ks", "cm", "ad", "hk1", "hk2", "vg"]
