import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from igfit.errors import DegenerateSampleError, DomainError
from igfit.estimators import EstimatorKind, estimate_ml, estimate_mo, scale_sample
from igfit.ig_core import IGParams, ig_sample

positive_samples = st.lists(st.floats(0.01, 100.0), min_size=3, max_size=40).filter(
    lambda v: max(v) - min(v) > 1e-3 * max(v)
)


def test_ml_two_points():
    p = estimate_ml([1.0, 2.0])
    assert p.mu == 1.5
    assert p.lam == pytest.approx(12.0, rel=1e-14)


def test_mo_two_points():
    p = estimate_mo([1.0, 2.0])
    assert p.mu == 1.5
    assert p.lam == pytest.approx(13.5, rel=1e-14)


def test_ml_unbiased_flag():
    x = [0.5, 1.0, 2.5, 4.0]
    assert estimate_ml(x, unbiased=True).lam == pytest.approx(estimate_ml(x).lam * 3 / 4)


@pytest.mark.parametrize("est", [estimate_ml, estimate_mo])
@pytest.mark.parametrize("value", [1.0, 0.1, 1234.5])
def test_constant_sample_is_degenerate(est, value):
    with pytest.raises(DegenerateSampleError):
        est([value] * 7)


@pytest.mark.parametrize("est", [estimate_ml, estimate_mo])
@pytest.mark.parametrize("bad", [[1.0, -2.0], [0.0, 1.0], [1.0, np.nan], [1.0], [[1.0, 2.0]]])
def test_invalid_input(est, bad):
    with pytest.raises(DomainError):
        est(bad)


@pytest.mark.parametrize("est", [estimate_ml, estimate_mo])
def test_equivariance_exact_factor(est):
    x = np.array([0.3, 1.1, 2.0, 5.5, 0.7])
    p, q = est(x), est(7 * x)
    assert q.mu == pytest.approx(7 * p.mu, rel=1e-15)
    assert q.lam == pytest.approx(7 * p.lam, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(x=positive_samples, beta=st.floats(0.01, 100.0))
def test_equivariance(x, beta):
    x = np.array(x)
    for est in (estimate_ml, estimate_mo):
        p, q = est(x), est(beta * x)
        assert q.mu == pytest.approx(beta * p.mu, rel=1e-12)
        assert q.lam == pytest.approx(beta * p.lam, rel=1e-12)


def test_equivariance_long_sample(rng):
    x = ig_sample(IGParams(2.0, 3.0), 100_000, rng)
    for est in (estimate_ml, estimate_mo):
        p, q = est(x), est(0.37 * x)
        assert q.lam == pytest.approx(0.37 * p.lam, rel=1e-12)


@pytest.mark.parametrize("phi", [0.5, 3.0, 25.0])
def test_consistency(phi):
    x = ig_sample(IGParams(1.0, phi), 100_000, np.random.default_rng(99))
    assert estimate_ml(x).phi == pytest.approx(phi, rel=0.05)
    assert estimate_mo(x).phi == pytest.approx(phi, rel=0.05)


@settings(max_examples=100, deadline=None)
@given(x=positive_samples)
def test_ml_shape_positive_finite(x):
    lam = estimate_ml(x).lam
    assert np.isfinite(lam) and lam > 0


class TestScaleSample:
    def test_two_points_ml(self):
        z = scale_sample([1.0, 2.0], EstimatorKind.ML)
        np.testing.assert_allclose(z.y, [2 / 3, 4 / 3], rtol=1e-15)
        assert z.phi_hat == pytest.approx(8.0, rel=1e-14)
        assert z.n == 2

    def test_two_points_mo(self):
        z = scale_sample([1.0, 2.0], "mo")
        np.testing.assert_allclose(z.y, [2 / 3, 4 / 3], rtol=1e-15)
        assert z.phi_hat == pytest.approx(9.0, rel=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(x=positive_samples, beta=st.floats(0.01, 100.0), kind=st.sampled_from(["ml", "mo"]))
    def test_scale_invariant(self, x, beta, kind):
        z1 = scale_sample(np.array(x), kind)
        z2 = scale_sample(beta * np.array(x), kind)
        assert np.mean(z1.y) == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(z2.y, z1.y, rtol=1e-14)
        assert z2.phi_hat == pytest.approx(z1.phi_hat, rel=1e-12)

    def test_errors_propagate(self):
        with pytest.raises(DegenerateSampleError):
            scale_sample([2.0, 2.0, 2.0], "mo")
