"""Trajectory error (integral absolute error) and trial aggregation.

The error between an estimated and a ground-truth polyline is the unsigned
area swept between them: for each consecutive step pair the quadrilateral
(est_k, est_{k+1}, truth_{k+1}, truth_k) is split along the
est_k - truth_{k+1} diagonal into two triangles whose absolute areas are
summed.  Absolute (not signed) areas keep crossing paths from cancelling.

Polylines are step-indexed: pose k of the estimate is compared against pose
k of the truth, which the synchronized simulator logs guarantee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import LengthMismatch


@dataclass(slots=True)
class TrialResult:
    """Everything one trial produced, enough to re-derive every metric."""

    estimated: np.ndarray  # (n_obs, 3) pose per observation step
    truth: np.ndarray  # (n_obs, 3)
    iae: float
    ms_per_step: float
    admitted_per_step: list[int]
    rejected_per_step: list[int]
    seed: int
    control_steps: int
    failed: bool = False
    failure_reason: str = ""

    @property
    def admitted_total(self) -> int:
        return sum(self.admitted_per_step)

    @property
    def rejected_total(self) -> int:
        return sum(self.rejected_per_step)


def _triangle_area(ax, ay, bx, by, cx, cy) -> float:
    return 0.5 * abs((bx - ax) * (cy - ay) - (cx - ax) * (by - ay))


def iae(estimated, truth) -> float:
    """Unsigned area between two equal-length polylines, in square meters.

    Accepts (n, >=2) arrays or sequences of objects with x/y attributes.
    """
    est = _as_xy(estimated)
    tru = _as_xy(truth)
    if est.shape[0] != tru.shape[0]:
        raise LengthMismatch(f"polyline lengths differ: {est.shape[0]} vs {tru.shape[0]}")
    if est.shape[0] < 2:
        raise LengthMismatch("need at least 2 poses per polyline")

    total = 0.0
    for k in range(est.shape[0] - 1):
        ex0, ey0 = est[k]
        ex1, ey1 = est[k + 1]
        tx0, ty0 = tru[k]
        tx1, ty1 = tru[k + 1]
        total += _triangle_area(ex0, ey0, ex1, ey1, tx1, ty1)
        total += _triangle_area(ex0, ey0, tx1, ty1, tx0, ty0)
    return float(total)


def _as_xy(polyline) -> np.ndarray:
    if isinstance(polyline, np.ndarray):
        return polyline[:, :2].astype(float)
    first = polyline[0]
    if hasattr(first, "x"):
        return np.array([[p.x, p.y] for p in polyline], dtype=float)
    return np.asarray(polyline, dtype=float)[:, :2]


def summarize(trials: Sequence[TrialResult]) -> tuple[float, float, float]:
    """Mean and sample standard deviation of IAE, and mean per-step time.

    Sums use :func:`math.fsum`, so the result is independent of trial order
    bit for bit.  A single trial has zero standard deviation by convention.
    """
    if not trials:
        raise ValueError("need at least one trial")
    values = [t.iae for t in trials]
    times = [t.ms_per_step for t in trials]
    n = len(values)
    mean = math.fsum(values) / n
    if n == 1:
        std = 0.0
    else:
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1))
    mean_ms = math.fsum(times) / n
    return mean, std, mean_ms
