import math

import numpy as np
import pytest

from dynaslam.geometry import Point2D, Pose2D
from dynaslam.rng import STREAM_MEASUREMENT, substream
from dynaslam.sensing import SensorParams, noisy_control, sense
from dynaslam.slam import Control, observation_model


def quiet_sensor(**kwargs):
    defaults = dict(max_range=30.0, fov=2 * math.pi, sigma_r=0.0, sigma_b=0.0)
    defaults.update(kwargs)
    return SensorParams(**defaults)


class TestSense:
    def test_range_gate_excludes_far_landmark(self):
        world = [(1, Point2D(31.0, 0.0))]
        out = sense(Pose2D(0, 0, 0), world, quiet_sensor(), substream(0, STREAM_MEASUREMENT))
        assert out == []

    def test_range_gate_inclusive_at_boundary(self):
        world = [(1, Point2D(30.0, 0.0))]
        out = sense(Pose2D(0, 0, 0), world, quiet_sensor(), substream(0, STREAM_MEASUREMENT))
        assert len(out) == 1
        assert out[0].range == 30.0

    def test_fov_gate_inclusive_at_half_angle(self):
        params = quiet_sensor(fov=math.pi)
        visible = sense(Pose2D(0, 0, 0), [(1, Point2D(0.0, 5.0))], params, substream(0, STREAM_MEASUREMENT))
        assert len(visible) == 1  # bearing exactly +fov/2
        hidden = sense(Pose2D(0, 0, 0), [(1, Point2D(-1.0, 5.0))], params, substream(0, STREAM_MEASUREMENT))
        assert hidden == []

    def test_noiseless_matches_observation_model(self):
        pose = Pose2D(2.0, -1.0, 0.7)
        world = [(3, Point2D(8.0, 4.0)), (1, Point2D(-3.0, 2.0))]
        out = sense(pose, world, quiet_sensor(), substream(0, STREAM_MEASUREMENT))
        assert [m.landmark_id for m in out] == [1, 3]
        for m in out:
            pt = dict(world)[m.landmark_id]
            r, b = observation_model(pose, pt)
            assert m.range == r
            assert m.bearing == b

    def test_output_sorted_by_id(self):
        pose = Pose2D(0, 0, 0)
        world = [(9, Point2D(1, 0)), (2, Point2D(0, 1)), (5, Point2D(-1, 0))]
        out = sense(pose, world, quiet_sensor(), substream(0, STREAM_MEASUREMENT))
        assert [m.landmark_id for m in out] == [2, 5, 9]

    def test_noise_statistics_match_sigma(self):
        # 1e5 draws at fixed geometry: the sample std of the range error must
        # land within 3% of sigma_r.
        params = quiet_sensor(sigma_r=0.05, sigma_b=math.radians(1.0))
        pose = Pose2D(0, 0, 0)
        world = [(1, Point2D(10.0, 0.0))]
        rng = substream(12345, STREAM_MEASUREMENT)
        errors = np.array([sense(pose, world, params, rng)[0].range - 10.0 for _ in range(100_000)])
        assert abs(errors.std(ddof=1) - 0.05) < 0.03 * 0.05
        assert abs(errors.mean()) < 3 * 0.05 / math.sqrt(100_000)

    def test_negative_noisy_range_clamped(self):
        params = quiet_sensor(sigma_r=5.0)
        pose = Pose2D(0, 0, 0)
        world = [(1, Point2D(0.5, 0.0))]
        rng = substream(7, STREAM_MEASUREMENT)
        ranges = [sense(pose, world, params, rng)[0].range for _ in range(500)]
        assert min(ranges) == 0.0
        assert all(r >= 0.0 for r in ranges)

    def test_deterministic_given_stream(self):
        params = quiet_sensor(sigma_r=0.05, sigma_b=0.01)
        pose = Pose2D(1, 2, 0.3)
        world = [(1, Point2D(5, 5)), (2, Point2D(-3, 1))]
        a = sense(pose, world, params, substream(11, STREAM_MEASUREMENT))
        b = sense(pose, world, params, substream(11, STREAM_MEASUREMENT))
        assert a == b

    def test_params_validation(self):
        with pytest.raises(ValueError):
            SensorParams(max_range=0.0)
        with pytest.raises(ValueError):
            SensorParams(fov=0.0)
        with pytest.raises(ValueError):
            SensorParams(fov=2 * math.pi + 0.1)
        with pytest.raises(ValueError):
            SensorParams(sigma_r=-0.1)


class TestNoisyControl:
    def test_zero_sigmas_identity(self):
        u = Control(3.0, 0.2, 0.1)
        out = noisy_control(u, 0.0, 0.0, substream(0, STREAM_MEASUREMENT))
        assert (out.v, out.omega, out.dt) == (3.0, 0.2, 0.1)

    def test_dt_never_perturbed(self):
        rng = substream(1, STREAM_MEASUREMENT)
        for _ in range(100):
            out = noisy_control(Control(1.0, 0.0, 0.25), 0.5, 0.5, rng)
            assert out.dt == 0.25

    def test_sample_mean_law_of_large_numbers(self):
        rng = substream(2, STREAM_MEASUREMENT)
        n = 100_000
        vs = np.array([noisy_control(Control(3.0, 0.1, 0.1), 0.3, 0.05, rng).v for _ in range(n)])
        assert abs(vs.mean() - 3.0) < 3 * 0.3 / math.sqrt(n)
