"""Simulated range-bearing sensor and control-noise injection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Point2D, Pose2D, wrap_angle
from .slam import Control, Measurement, observation_model


@dataclass(slots=True)
class SensorParams:
    """Range gate, field-of-view cone (full width), and noise magnitudes."""

    max_range: float = 30.0
    fov: float = 2.0 * math.pi
    sigma_r: float = 0.05
    sigma_b: float = math.radians(1.0)

    def __post_init__(self) -> None:
        if self.max_range <= 0.0:
            raise ValueError("max_range must be positive")
        if not (0.0 < self.fov <= 2.0 * math.pi):
            raise ValueError("fov must be in (0, 2*pi]")
        if self.sigma_r < 0.0 or self.sigma_b < 0.0:
            raise ValueError("noise sigmas must be non-negative")


def sense(
    true_pose: Pose2D,
    world: list[tuple[int, Point2D]],
    params: SensorParams,
    rng: np.random.Generator,
) -> list[Measurement]:
    """Measure every visible landmark, id-sorted, with Gaussian noise.

    Visibility gates are inclusive at both boundaries: a landmark exactly at
    ``max_range`` or exactly on the field-of-view edge is seen.  Noise draws
    are consumed in id order, one (range, bearing) pair per visible landmark,
    so the stream is reproducible given the same truth.
    """
    half_fov = params.fov / 2.0
    out: list[Measurement] = []
    for lid, pt in sorted(world, key=lambda item: item[0]):
        rng_true, brg_true = observation_model(true_pose, pt)
        if rng_true > params.max_range or abs(brg_true) > half_fov:
            continue
        noisy_range = rng_true + rng.normal(0.0, params.sigma_r) if params.sigma_r > 0.0 else rng_true
        noisy_bearing = brg_true + rng.normal(0.0, params.sigma_b) if params.sigma_b > 0.0 else brg_true
        out.append(Measurement(lid, max(noisy_range, 0.0), wrap_angle(noisy_bearing)))
    return out


def noisy_control(u: Control, sigma_v: float, sigma_omega: float, rng: np.random.Generator) -> Control:
    """Add independent Gaussian noise to speed and turn rate; dt untouched."""
    v = u.v + rng.normal(0.0, sigma_v) if sigma_v > 0.0 else u.v
    omega = u.omega + rng.normal(0.0, sigma_omega) if sigma_omega > 0.0 else u.omega
    return Control(v, omega, u.dt)
