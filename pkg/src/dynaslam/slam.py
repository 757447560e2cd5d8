"""UKF-SLAM over a planar pose and point landmarks.

State layout is ``[x, y, theta, m1x, m1y, ..., mnx, mny]`` with a dense
``(3 + 2n) x (3 + 2n)`` covariance partitioned into pose, pose-landmark,
and landmark blocks.  Prediction pushes sigma points of the full state
through the unicycle motion model (landmark slots are carried unchanged);
correction stacks all of a step's range-bearing measurements into one
joint update so a single innovation solve determines the whole step.

Sign conventions follow the standard UKF: the Kalman gain is
``K = C S^-1`` with ``C`` the state-measurement cross-covariance and
``S`` the innovation covariance, and the covariance update subtracts
``K S K^T``.  Bearing and heading residuals are always wrapped, never
differenced raw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DuplicateLandmark, SingularInnovation, UnknownLandmark, ZeroRange
from .geometry import Point2D, Pose2D, distance, wrap_angle, wrap_angle_array
from .unscented import GaussianState, _sigma_points_raw, sigma_points, transform_moments, weighted_mean, residuals

THETA_SLOT = 2
POSE_DIM = 3

# Heading is the only angular slot of the state vector.
_STATE_ANGULAR = (THETA_SLOT,)

# Minimum modeled measurement noise (1 um / 1 urad) for the sigma mapping.
_SIGMA_FLOOR = 1e-6


@dataclass(slots=True)
class Control:
    """Unicycle control: forward speed, turn rate, and step duration."""

    v: float
    omega: float
    dt: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.v) and math.isfinite(self.omega)):
            raise ValueError("control velocities must be finite")
        if not (self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt}")


@dataclass(slots=True)
class Measurement:
    """Range-bearing observation of an identified landmark."""

    landmark_id: int
    range: float
    bearing: float

    def __post_init__(self) -> None:
        if self.range < 0.0:
            raise ValueError(f"range must be non-negative, got {self.range}")
        self.bearing = wrap_angle(self.bearing)


@dataclass(slots=True)
class NoiseParams:
    """Filter noise model: additive pose process noise and per-measurement noise."""

    q_pose: np.ndarray  # (3, 3)
    r_meas: np.ndarray  # (2, 2), [range; bearing]

    def __post_init__(self) -> None:
        self.q_pose = np.asarray(self.q_pose, dtype=float)
        self.r_meas = np.asarray(self.r_meas, dtype=float)
        if self.q_pose.shape != (3, 3) or self.r_meas.shape != (2, 2):
            raise ValueError("q_pose must be 3x3 and r_meas 2x2")

    @classmethod
    def from_sigmas(
        cls, sigma_v: float, sigma_omega: float, sigma_r: float, sigma_b: float, dt: float
    ) -> "NoiseParams":
        """Map control/sensor noise magnitudes onto the filter's Q and R.

        Speed noise enters position isotropically as ``(sigma_v * dt)^2`` and
        turn-rate noise enters heading as ``(sigma_omega * dt)^2``.  The
        filter's measurement model is floored at a micrometer/microradian:
        an exactly-zero R declares measurements perfect, and the gain then
        amplifies the transform's own second-order bias without bound.
        """
        sigma_r = max(sigma_r, _SIGMA_FLOOR)
        sigma_b = max(sigma_b, _SIGMA_FLOOR)
        return cls(
            q_pose=np.diag([(sigma_v * dt) ** 2, (sigma_v * dt) ** 2, (sigma_omega * dt) ** 2]),
            r_meas=np.diag([sigma_r**2, sigma_b**2]),
        )


@dataclass(slots=True)
class CorrectionTrace:
    """Intermediate quantities of one joint correction, kept for inspection."""

    z_hat: np.ndarray
    innovation_cov: np.ndarray
    cross_cov: np.ndarray
    gain: np.ndarray


@dataclass(slots=True)
class SlamState:
    """Joint Gaussian over robot pose and landmark positions.

    ``landmark_ids`` fixes the block order: landmark ``landmark_ids[i]``
    occupies mean slots ``3 + 2i`` and ``4 + 2i``.
    """

    mean: np.ndarray
    cov: np.ndarray
    landmark_ids: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=float).reshape(-1)
        self.cov = np.asarray(self.cov, dtype=float)
        n = self.mean.shape[0]
        if n != POSE_DIM + 2 * len(self.landmark_ids):
            raise ValueError(
                f"state dimension {n} inconsistent with {len(self.landmark_ids)} landmarks"
            )
        if self.cov.shape != (n, n):
            raise ValueError(f"covariance shape {self.cov.shape} does not match dimension {n}")
        if len(set(self.landmark_ids)) != len(self.landmark_ids):
            raise ValueError("landmark ids must be unique")

    @classmethod
    def initial(cls, pose: Pose2D, pose_cov: np.ndarray) -> "SlamState":
        """Landmark-free state at a known starting pose."""
        return cls(mean=pose.as_array(), cov=np.asarray(pose_cov, dtype=float).copy())

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def pose(self) -> Pose2D:
        return Pose2D(self.mean[0], self.mean[1], self.mean[2])

    @property
    def landmarks(self) -> list[tuple[int, Point2D]]:
        return [
            (lid, Point2D(self.mean[POSE_DIM + 2 * i], self.mean[POSE_DIM + 2 * i + 1]))
            for i, lid in enumerate(self.landmark_ids)
        ]

    def landmark_index(self, landmark_id: int) -> int:
        try:
            return self.landmark_ids.index(landmark_id)
        except ValueError:
            raise UnknownLandmark(f"landmark {landmark_id} not in state") from None

    def has_landmark(self, landmark_id: int) -> bool:
        return landmark_id in self.landmark_ids


def motion_model(pose: Pose2D, u: Control) -> Pose2D:
    """One unicycle step; the position accumulates the commanded displacement."""
    return Pose2D(
        pose.x + u.v * math.cos(pose.theta) * u.dt,
        pose.y + u.v * math.sin(pose.theta) * u.dt,
        wrap_angle(pose.theta + u.omega * u.dt),
    )


def _motion_model_columns(points: np.ndarray, u: Control) -> None:
    """Apply the motion model in place to the pose rows of sigma columns."""
    theta = points[THETA_SLOT]
    points[0] += u.v * np.cos(theta) * u.dt
    points[1] += u.v * np.sin(theta) * u.dt
    points[THETA_SLOT] = wrap_angle_array(theta + u.omega * u.dt)


def observation_model(pose: Pose2D, lm: Point2D) -> tuple[float, float]:
    """Range and bearing from a pose to a landmark, bearing in the robot frame."""
    rng = distance(pose, lm)
    if rng == 0.0:
        raise ZeroRange(f"landmark coincides with sensor at ({pose.x}, {pose.y})")
    bearing = wrap_angle(math.atan2(lm.y - pose.y, lm.x - pose.x) - pose.theta)
    return rng, bearing


def _observe_columns(points: np.ndarray, lm_indices: np.ndarray) -> np.ndarray:
    """Range-bearing images of sigma columns for the given landmark block indices.

    Returns a ``(2m, 2N+1)`` matrix with ranges on even rows and bearings on
    odd rows, one row pair per landmark in ``lm_indices`` order.
    """
    px, py, th = points[0], points[1], points[THETA_SLOT]
    dx = points[POSE_DIM + 2 * lm_indices] - px
    dy = points[POSE_DIM + 2 * lm_indices + 1] - py
    z = np.empty((2 * lm_indices.shape[0], points.shape[1]))
    z[0::2] = np.hypot(dx, dy)
    z[1::2] = wrap_angle_array(np.arctan2(dy, dx) - th)
    return z


def predict(state: SlamState, u: Control, noise: NoiseParams, lam: float | None = None) -> SlamState:
    """Unscented prediction: motion on the pose block, landmarks carried over.

    Process noise is added to the pose block after reconstruction.  Landmark
    marginal means are copied from the input state: the motion model is the
    identity on landmark slots, so the weighted mean is unchanged exactly and
    copying avoids accumulating round-off.
    """
    sig = _sigma_points_raw(state.mean, state.cov, lam)
    _motion_model_columns(sig.points, u)
    mean = weighted_mean(sig.points, sig.weights, _STATE_ANGULAR)
    mean[POSE_DIM:] = state.mean[POSE_DIM:]
    dev = residuals(sig.points, mean, _STATE_ANGULAR)
    cov = (dev * sig.weights) @ dev.T
    cov = 0.5 * (cov + cov.T)
    cov[:POSE_DIM, :POSE_DIM] += noise.q_pose
    return SlamState(mean=mean, cov=cov, landmark_ids=state.landmark_ids)


def correct(
    state: SlamState,
    measurements: list[Measurement],
    noise: NoiseParams,
    lam: float | None = None,
) -> tuple[SlamState, CorrectionTrace]:
    """Joint unscented correction with all of a step's measurements stacked.

    Raises
    ------
    UnknownLandmark
        If any measurement refers to a landmark not in the state.
    SingularInnovation
        If the stacked innovation covariance cannot be inverted.
    """
    if not measurements:
        empty = np.zeros((0,))
        return state, CorrectionTrace(empty, np.zeros((0, 0)), np.zeros((state.dim, 0)), np.zeros((state.dim, 0)))

    lm_indices = np.array([state.landmark_index(m.landmark_id) for m in measurements])
    z = np.empty(2 * len(measurements))
    z[0::2] = [m.range for m in measurements]
    z[1::2] = [m.bearing for m in measurements]
    bearing_slots = tuple(range(1, z.shape[0], 2))

    sig = _sigma_points_raw(state.mean, state.cov, lam)
    z_cols = _observe_columns(sig.points, lm_indices)
    z_hat, s, c = transform_moments(
        sig, z_cols, state.mean, angular_in=_STATE_ANGULAR, angular_out=bearing_slots
    )
    for j in range(len(measurements)):
        s[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] += noise.r_meas

    new_mean, new_cov, gain = kalman_update(
        state.mean, state.cov, z, z_hat, s, c, angular_meas=bearing_slots, angular_state=_STATE_ANGULAR
    )
    return (
        SlamState(mean=new_mean, cov=new_cov, landmark_ids=state.landmark_ids),
        CorrectionTrace(z_hat=z_hat, innovation_cov=s, cross_cov=c, gain=gain),
    )


def kalman_update(
    mean: np.ndarray,
    cov: np.ndarray,
    z: np.ndarray,
    z_hat: np.ndarray,
    innovation_cov: np.ndarray,
    cross_cov: np.ndarray,
    angular_meas: tuple[int, ...] = (),
    angular_state: tuple[int, ...] = (),
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gain, mean, and covariance update shared by all correction paths.

    ``K = C S^-1``, ``mean += K (z - z_hat)``, ``cov -= K S K^T`` with
    angular residual slots wrapped.
    """
    try:
        gain = np.linalg.solve(innovation_cov, cross_cov.T).T
    except np.linalg.LinAlgError as exc:
        raise SingularInnovation(str(exc)) from None
    innovation = z - z_hat
    for idx in angular_meas:
        innovation[idx] = wrap_angle(innovation[idx])
    new_mean = mean + gain @ innovation
    for idx in angular_state:
        new_mean[idx] = wrap_angle(new_mean[idx])
    new_cov = cov - gain @ innovation_cov @ gain.T
    new_cov = 0.5 * (new_cov + new_cov.T)
    return new_mean, new_cov, gain


def augment(
    state: SlamState, m: Measurement, noise: NoiseParams, lam: float | None = None
) -> SlamState:
    """Add a newly admitted landmark to the state.

    The landmark mean is the direct inverse projection of the measurement
    from the pose mean.  Its covariance block and the cross-covariances with
    the existing state come from an unscented propagation of the joint
    Gaussian [state; range noise; bearing noise] through the inverse
    observation map, so correlations with the pose (and, through it, with
    the other landmarks) are kept consistent.
    """
    if state.has_landmark(m.landmark_id):
        raise DuplicateLandmark(f"landmark {m.landmark_id} already in state")

    n = state.dim
    x, y, theta = state.mean[0], state.mean[1], state.mean[2]
    heading = theta + m.bearing
    new_lm = np.array([x + m.range * math.cos(heading), y + m.range * math.sin(heading)])

    joint_mean = np.concatenate([state.mean, [m.range, m.bearing]])
    joint_cov = np.zeros((n + 2, n + 2))
    joint_cov[:n, :n] = state.cov
    joint_cov[n:, n:] = noise.r_meas

    sig = _sigma_points_raw(joint_mean, joint_cov, lam)
    px, py, th = sig.points[0], sig.points[1], sig.points[THETA_SLOT]
    r_col, b_col = sig.points[n], sig.points[n + 1]
    ang = th + b_col
    projected = np.vstack([px + r_col * np.cos(ang), py + r_col * np.sin(ang)])

    _, lm_cov, cross = transform_moments(
        sig, projected, joint_mean, angular_in=_STATE_ANGULAR
    )

    new_dim = n + 2
    mean = np.concatenate([state.mean, new_lm])
    cov = np.zeros((new_dim, new_dim))
    cov[:n, :n] = state.cov
    cov[:n, n:] = cross[:n]
    cov[n:, :n] = cross[:n].T
    cov[n:, n:] = lm_cov
    return SlamState(mean=mean, cov=cov, landmark_ids=state.landmark_ids + (m.landmark_id,))


def remove_landmark(state: SlamState, landmark_id: int) -> SlamState:
    """Marginalize a landmark out of the state (delete its rows and columns)."""
    idx = state.landmark_index(landmark_id)
    slots = [POSE_DIM + 2 * idx, POSE_DIM + 2 * idx + 1]
    mean = np.delete(state.mean, slots)
    cov = np.delete(np.delete(state.cov, slots, axis=0), slots, axis=1)
    ids = state.landmark_ids[:idx] + state.landmark_ids[idx + 1 :]
    return SlamState(mean=mean, cov=cov, landmark_ids=ids)
