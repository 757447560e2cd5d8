import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dynaslam.geometry import Point2D, Pose2D, distance, wrap_angle, wrap_angle_array

finite_angles = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


class TestWrapAngle:
    @pytest.mark.parametrize(
        "theta,expected",
        [
            (0.0, 0.0),
            (3 * math.pi, math.pi),
            (-3 * math.pi / 2, math.pi / 2),
            (math.pi, math.pi),
            (-math.pi, math.pi),
            (2 * math.pi, 0.0),
        ],
    )
    def test_known_values(self, theta, expected):
        assert wrap_angle(theta) == pytest.approx(expected, abs=1e-12)

    def test_rejects_non_finite(self):
        for bad in (math.nan, math.inf, -math.inf):
            with pytest.raises(ValueError):
                wrap_angle(bad)

    @given(finite_angles)
    def test_result_in_half_open_interval(self, theta):
        w = wrap_angle(theta)
        assert -math.pi < w <= math.pi

    @given(finite_angles)
    def test_idempotent_bitwise(self, theta):
        w = wrap_angle(theta)
        assert wrap_angle(w) == w

    @given(finite_angles)
    def test_congruent_mod_two_pi(self, theta):
        w = wrap_angle(theta)
        k = (theta - w) / (2 * math.pi)
        assert abs(k - round(k)) < 1e-6

    @given(st.lists(finite_angles, min_size=1, max_size=20))
    def test_array_matches_scalar(self, thetas):
        arr = wrap_angle_array(np.array(thetas))
        for got, theta in zip(arr, thetas):
            assert got == wrap_angle(theta)


class TestDistance:
    @pytest.mark.parametrize(
        "a,b,expected",
        [
            ((0, 0), (0, 0), 0.0),
            ((0, 0), (3, 4), 5.0),
            ((1, 1), (-2, 5), 5.0),
        ],
    )
    def test_known_values(self, a, b, expected):
        assert distance(Point2D(*a), Point2D(*b)) == pytest.approx(expected, abs=1e-15)

    @given(st.tuples(*[st.floats(-1e3, 1e3) for _ in range(4)]))
    def test_symmetric_and_nonnegative(self, coords):
        a = Point2D(coords[0], coords[1])
        b = Point2D(coords[2], coords[3])
        assert distance(a, b) >= 0.0
        assert distance(a, b) == distance(b, a)

    @given(st.tuples(*[st.floats(-1e3, 1e3) for _ in range(6)]))
    def test_triangle_inequality(self, coords):
        a = Point2D(coords[0], coords[1])
        b = Point2D(coords[2], coords[3])
        c = Point2D(coords[4], coords[5])
        assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9


class TestTypes:
    def test_point_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Point2D(math.nan, 0.0)
        with pytest.raises(ValueError):
            Point2D(0.0, math.inf)

    def test_pose_wraps_heading(self):
        p = Pose2D(1.0, 2.0, 3 * math.pi)
        assert p.theta == pytest.approx(math.pi)
        assert -math.pi < p.theta <= math.pi

    def test_pose_as_array(self):
        p = Pose2D(1.0, -2.0, 0.5)
        np.testing.assert_array_equal(p.as_array(), [1.0, -2.0, 0.5])

    def test_pose_position(self):
        assert Pose2D(3.0, 4.0, 0.0).position == Point2D(3.0, 4.0)
