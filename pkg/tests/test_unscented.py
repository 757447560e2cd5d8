import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dynaslam.errors import CholeskyFailure
from dynaslam.geometry import wrap_angle
from dynaslam.unscented import (
    GaussianState,
    SigmaSet,
    lambda_default,
    propagate,
    reconstruct,
    sigma_points,
    transform_moments,
    ut_weights,
)


def random_spd_state(rng, n, scale=1.0):
    a = rng.standard_normal((n, n))
    cov = a @ a.T * scale / n + 1e-3 * np.eye(n)
    return GaussianState(mean=rng.standard_normal(n) * 5.0, cov=cov)


class TestWeights:
    @pytest.mark.parametrize(
        "n,lam,expected",
        [
            (1, 2.0, [2 / 3, 1 / 6, 1 / 6]),
            (3, 0.0, [0.0] + [1 / 6] * 6),
            (2, 1.0, [1 / 3, 1 / 6, 1 / 6, 1 / 6, 1 / 6]),
        ],
    )
    def test_known_values(self, n, lam, expected):
        np.testing.assert_allclose(ut_weights(n, lam), expected, atol=1e-15)

    @given(st.integers(1, 20), st.floats(-5.0, 10.0))
    def test_sums_to_one(self, n, lam):
        if n + lam <= 0:
            with pytest.raises(ValueError):
                ut_weights(n, lam)
        else:
            assert math.fsum(ut_weights(n, lam)) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_degenerate(self):
        with pytest.raises(ValueError):
            ut_weights(2, -2.0)

    def test_lambda_default_keeps_spread_constant(self):
        for n in (1, 3, 23):
            assert n + lambda_default(n) == pytest.approx(3.0)


class TestSigmaPoints:
    def test_scalar_unit_gaussian(self):
        sig = sigma_points(GaussianState([0.0], [[1.0]]), lam=2.0)
        got = sorted(sig.points[0])
        np.testing.assert_allclose(got, [-math.sqrt(3), 0.0, math.sqrt(3)], atol=1e-12)

    def test_zero_covariance_collapses_to_mean(self):
        mean = np.array([1.0, -2.0, 0.5])
        sig = sigma_points(GaussianState(mean, np.zeros((3, 3))), lam=0.0)
        assert sig.points.shape == (3, 7)
        for i in range(7):
            np.testing.assert_array_equal(sig.points[:, i], mean)

    def test_identity_covariance_layout(self):
        sig = sigma_points(GaussianState([0.0, 0.0], np.eye(2)), lam=1.0)
        s3 = math.sqrt(3)
        expected = np.array([[0, s3, 0, -s3, 0], [0, 0, s3, 0, -s3]], dtype=float)
        np.testing.assert_allclose(sig.points, expected, atol=1e-12)

    def test_column_zero_is_mean(self):
        rng = np.random.default_rng(7)
        state = random_spd_state(rng, 5)
        sig = sigma_points(state, lam=-2.0)
        np.testing.assert_array_equal(sig.points[:, 0], state.mean)

    def test_weights_sum_to_one(self):
        rng = np.random.default_rng(8)
        state = random_spd_state(rng, 4)
        sig = sigma_points(state)
        assert math.fsum(sig.weights) == pytest.approx(1.0, abs=1e-12)

    def test_indefinite_covariance_raises(self):
        cov = np.diag([1.0, -1.0])
        with pytest.raises(CholeskyFailure):
            sigma_points(GaussianState([0.0, 0.0], cov), lam=1.0)

    def test_near_singular_covariance_recovered_by_jitter(self):
        # Rank-1 covariance: plain Cholesky fails, jitter must rescue it.
        v = np.array([1.0, 2.0, 3.0])
        cov = np.outer(v, v)
        sig = sigma_points(GaussianState(np.zeros(3), cov), lam=0.0)
        rec = reconstruct(sig)
        np.testing.assert_allclose(rec.cov, cov, atol=1e-7)

    def test_rejects_degenerate_lambda(self):
        with pytest.raises(ValueError):
            sigma_points(GaussianState([0.0], [[1.0]]), lam=-1.0)


class TestReconstruct:
    def test_hand_evaluated_scalar_case(self):
        # Oracle: mean = 2/3*0 + 1/6*sqrt(3) - 1/6*sqrt(3) = 0
        #         cov  = 2/3*0 + 1/6*3 + 1/6*3 = 1
        s3 = math.sqrt(3)
        sig = SigmaSet(
            points=np.array([[0.0, s3, -s3]]),
            weights=np.array([2 / 3, 1 / 6, 1 / 6]),
            lam=2.0,
        )
        rec = reconstruct(sig)
        assert rec.mean[0] == pytest.approx(0.0, abs=1e-15)
        assert rec.cov[0, 0] == pytest.approx(1.0, abs=1e-15)

    def test_identical_points_give_zero_covariance(self):
        v = np.array([2.0, -1.0])
        sig = SigmaSet(points=np.tile(v[:, None], 5), weights=ut_weights(2, 1.0), lam=1.0)
        rec = reconstruct(sig)
        np.testing.assert_allclose(rec.mean, v, atol=1e-15)
        np.testing.assert_allclose(rec.cov, 0.0, atol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 12])
    def test_round_trip_random_spd(self, n):
        rng = np.random.default_rng(100 + n)
        for _ in range(20):
            state = random_spd_state(rng, n)
            rec = reconstruct(sigma_points(state))
            np.testing.assert_allclose(rec.mean, state.mean, rtol=0, atol=1e-9 * (1 + np.abs(state.mean).max()))
            err = np.linalg.norm(rec.cov - state.cov) / np.linalg.norm(state.cov)
            assert err < 1e-9

    def test_angular_slot_circular_mean_near_pi(self):
        # Points straddling the +/-pi seam: arithmetic mean would be ~0,
        # the circular mean must stay at the seam.
        state = GaussianState([math.pi], [[0.01]])
        sig = sigma_points(state, lam=2.0)
        rec = reconstruct(sig, angular=(0,))
        assert abs(wrap_angle(rec.mean[0] - math.pi)) < 1e-9
        assert rec.cov[0, 0] == pytest.approx(0.01, rel=1e-9)

    def test_angular_round_trip_preserves_wrapped_mean(self):
        state = GaussianState([3.0, -3.1], 0.04 * np.eye(2))
        rec = reconstruct(sigma_points(state), angular=(0, 1))
        np.testing.assert_allclose(rec.mean, state.mean, atol=1e-9)
        np.testing.assert_allclose(rec.cov, state.cov, atol=1e-9)


class TestLinearExactness:
    @settings(deadline=None, max_examples=25)
    @given(st.integers(1, 6), st.integers(0, 10_000))
    def test_affine_map_exact(self, n, seed):
        rng = np.random.default_rng(seed)
        state = random_spd_state(rng, n)
        m = rng.integers(1, n + 1)
        a = rng.standard_normal((m, n))
        b = rng.standard_normal(m)
        out = propagate(state, lambda pts: a @ pts + b[:, None])
        expected_mean = a @ state.mean + b
        expected_cov = a @ state.cov @ a.T
        scale = 1 + np.abs(expected_mean).max()
        np.testing.assert_allclose(out.mean, expected_mean, atol=1e-9 * scale)
        np.testing.assert_allclose(out.cov, expected_cov, atol=1e-9 * (1 + np.abs(expected_cov).max()))

    def test_transform_moments_affine_cross_covariance(self):
        rng = np.random.default_rng(42)
        state = random_spd_state(rng, 4)
        a = rng.standard_normal((2, 4))
        sig = sigma_points(state)
        z, s_cov, cross = transform_moments(sig, a @ sig.points, state.mean)
        np.testing.assert_allclose(z, a @ state.mean, atol=1e-9)
        np.testing.assert_allclose(s_cov, a @ state.cov @ a.T, atol=1e-9)
        np.testing.assert_allclose(cross, state.cov @ a.T, atol=1e-9)
