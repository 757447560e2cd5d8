"""Planar primitives shared by all modules: points, poses, angles, distance.

Angle convention: counter-clockwise positive, zero along the +x axis.
All angles are kept in the half-open interval ``(-pi, pi]`` so every
heading has exactly one representative (``pi`` is canonical, ``-pi`` is not).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Wrap an angle to ``(-pi, pi]``.

    Values already inside the interval are returned unchanged, which makes
    the function exactly idempotent.
    """
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    if -math.pi < theta <= math.pi:
        return theta
    wrapped = math.pi - (math.pi - theta) % _TWO_PI
    # Float rounding in the modulo can land exactly on -pi; -pi == pi (mod 2pi).
    if wrapped <= -math.pi:
        return math.pi
    return wrapped


def wrap_angle_array(theta: np.ndarray) -> np.ndarray:
    """Vectorized :func:`wrap_angle`; in-range entries pass through bitwise."""
    theta = np.asarray(theta, dtype=float)
    in_range = (theta > -np.pi) & (theta <= np.pi)
    if in_range.all():
        return theta
    wrapped = np.pi - np.mod(np.pi - theta, _TWO_PI)
    wrapped = np.where(wrapped <= -np.pi, np.pi, wrapped)
    return np.where(in_range, theta, wrapped)


@dataclass(slots=True, frozen=True)
class Point2D:
    """Point in the world frame, meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite: ({self.x}, {self.y})")


@dataclass(slots=True, frozen=True)
class Pose2D:
    """Robot pose: position in meters, heading in ``(-pi, pi]`` radians."""

    x: float
    y: float
    theta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"pose position must be finite: ({self.x}, {self.y})")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def position(self) -> Point2D:
        return Point2D(self.x, self.y)

    def as_array(self) -> np.ndarray:
        """Return ``[x, y, theta]`` as a float array."""
        return np.array([self.x, self.y, self.theta], dtype=float)


def distance(a: Point2D | Pose2D, b: Point2D | Pose2D) -> float:
    """Euclidean distance between two planar points (poses use position only)."""
    return math.hypot(b.x - a.x, b.y - a.y)
