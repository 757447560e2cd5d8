import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dynaslam.errors import LengthMismatch
from dynaslam.geometry import Pose2D
from dynaslam.metrics import TrialResult, iae, summarize


def line(points):
    return np.array(points, dtype=float)


def make_trial(value, ms=1.0, seed=0):
    path = np.zeros((2, 3))
    return TrialResult(
        estimated=path,
        truth=path,
        iae=value,
        ms_per_step=ms,
        admitted_per_step=[],
        rejected_per_step=[],
        seed=seed,
        control_steps=0,
    )


class TestIae:
    def test_identical_polylines_zero(self):
        path = line([(0, 0), (1, 2), (3, 3), (6, 1)])
        assert iae(path, path) == 0.0

    def test_rectangle_between_parallel_segments(self):
        est = line([(0, 0), (4, 0)])
        truth = line([(0, 0.5), (4, 0.5)])
        assert iae(est, truth) == pytest.approx(2.0, abs=1e-12)

    def test_single_triangle_oracle(self):
        # Hand shoelace: triangle (0,0),(1,0),(1,1) has area 1/2; the second
        # triangle of the split is degenerate.
        est = line([(0, 0), (1, 0)])
        truth = line([(0, 0), (1, 1)])
        assert iae(est, truth) == pytest.approx(0.5, abs=1e-12)

    def test_multi_segment_rectangle_additive(self):
        est = line([(0, 0), (2, 0), (4, 0)])
        truth = line([(0, 0.5), (2, 0.5), (4, 0.5)])
        assert iae(est, truth) == pytest.approx(2.0, abs=1e-12)

    def test_length_mismatch_raises(self):
        with pytest.raises(LengthMismatch):
            iae(line([(0, 0), (1, 0)]), line([(0, 0), (1, 0), (2, 0)]))
        with pytest.raises(LengthMismatch):
            iae(line([(0, 0)]), line([(0, 0)]))

    def test_accepts_pose_sequences(self):
        est = [Pose2D(0, 0, 0), Pose2D(1, 0, 0.3)]
        truth = [Pose2D(0, 1, 0), Pose2D(1, 1, 0)]
        assert iae(est, truth) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize(
        "est,truth",
        [
            # Parallel offset paths.
            ([(0, 0), (3, 0), (6, 0)], [(0, 1), (3, 1), (6, 1)]),
            # Paths crossing mid-segment (bowtie quadrilateral).
            ([(0, 0), (4, 0)], [(0, 1), (4, -1)]),
            # Randomish wiggle.
            ([(0, 0), (1, 0.5), (2, -0.2), (3, 0.1)], [(0, 0.3), (1, -0.4), (2, 0.6), (3, 0)]),
        ],
    )
    def test_symmetric(self, est, truth):
        assert iae(line(est), line(truth)) == pytest.approx(iae(line(truth), line(est)), rel=1e-12)

    @given(st.floats(-50, 50), st.floats(-50, 50))
    def test_translation_invariance(self, dx, dy):
        est = line([(0, 0), (1, 0.5), (2, -0.2), (3, 0.1)])
        truth = line([(0, 0.3), (1, -0.4), (2, 0.6), (3, 0)])
        base = iae(est, truth)
        shifted = iae(est + [dx, dy], truth + [dx, dy])
        assert shifted == pytest.approx(base, abs=1e-9)

    def test_monotone_under_doubled_offset(self):
        est = line([(0, 0), (3, 0), (6, 0)])
        near = est + [0.0, 0.5]
        far = est + [0.0, 1.0]
        assert iae(est, far) >= 2.0 * iae(est, near) - 1e-12


class TestSummarize:
    def test_single_trial(self):
        mean, std, ms = summarize([make_trial(2.5, ms=0.7)])
        assert (mean, std, ms) == (2.5, 0.0, 0.7)

    def test_matches_independent_oracle(self):
        rng = np.random.default_rng(314)
        values = rng.uniform(0.0, 10.0, size=100)
        trials = [make_trial(float(v), ms=float(v) / 10) for v in values]
        mean, std, ms = summarize(trials)
        # Oracle: independent high-precision accumulation in extended
        # precision (numpy longdouble).
        longs = values.astype(np.longdouble)
        oracle_mean = float(longs.sum() / 100)
        oracle_std = float(np.sqrt(((longs - longs.sum() / 100) ** 2).sum() / 99))
        assert mean == pytest.approx(oracle_mean, abs=1e-12)
        assert std == pytest.approx(oracle_std, abs=1e-12)
        assert ms == pytest.approx(oracle_mean / 10, abs=1e-12)

    def test_order_independent_bitwise(self):
        rng = np.random.default_rng(99)
        values = [float(v) for v in rng.uniform(0, 1, size=37)]
        trials = [make_trial(v) for v in values]
        forward = summarize(trials)
        backward = summarize(list(reversed(trials)))
        shuffled = trials.copy()
        rng.shuffle(shuffled)
        assert forward == backward == summarize(shuffled)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize([])
