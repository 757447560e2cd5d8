"""Stationary-vs-moving landmark classification by Euclidean distance.

The idea: if a landmark is stationary, the triangle formed by the robot's
previous position, its new position, and the landmark fixes the new
robot-landmark distance by the law of cosines,

    d_hat = sqrt(d_s^2 + d_prev^2 - 2 d_s d_prev cos(alpha)),

where ``d_s`` is the robot's displacement between the two sightings,
``d_prev`` the previously measured range, and ``alpha`` the angle at the old
position between the travel direction and the old line of sight.  A measured
range within ``epsilon`` of ``d_hat`` keeps the stationary verdict; anything
farther marks the landmark as moving.  Classification needs two sightings,
so first sightings (and re-sightings after a stale gap) are withheld for one
observation step.

All geometry uses the filter's own dead-reckoned poses, never ground truth.

Known blind spot: a landmark that relocates along the circle of radius
``d_hat`` around the new robot position keeps its measured range consistent
with the stationary hypothesis and is not detected.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import StaleTrack, ZeroDisplacement
from .geometry import Pose2D, distance, wrap_angle
from .slam import Measurement

_MIN_DISPLACEMENT = 1e-9


class Verdict(enum.Enum):
    STATIONARY = "stationary"
    MOVING = "moving"
    UNKNOWN = "unknown"


@dataclass(slots=True)
class ClassifierParams:
    """Threshold on |d_hat - d_measured| and track staleness limit."""

    epsilon: float = 0.35
    staleness_limit: int = 10

    def __post_init__(self) -> None:
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.staleness_limit < 1:
            raise ValueError(f"staleness_limit must be >= 1, got {self.staleness_limit}")


@dataclass(slots=True)
class LandmarkTrack:
    """Per-landmark memory between sightings."""

    landmark_id: int
    prev_range: float
    prev_bearing: float
    prev_pose: Pose2D
    last_seen_step: int


@dataclass(slots=True)
class Classification:
    """Outcome of one landmark sighting."""

    landmark_id: int
    verdict: Verdict
    d_hat: float
    d_meas: float


@dataclass(slots=True)
class StepDecision:
    """What one observation step admits, rejects, and logs."""

    admitted: list[Measurement]
    rejected_ids: list[int]
    classifications: list[Classification]


def predicted_distance(d_s: float, d_k: float, alpha: float) -> float:
    """Law-of-cosines range prediction under the stationary hypothesis.

    The radicand is mathematically non-negative; round-off can push it a
    hair below zero, which is clamped.
    """
    if d_s < 0.0 or d_k < 0.0:
        raise ValueError("distances must be non-negative")
    radicand = d_s * d_s + d_k * d_k - 2.0 * d_s * d_k * math.cos(alpha)
    return math.sqrt(max(radicand, 0.0))


def compute_alpha(prev_pose: Pose2D, new_pose: Pose2D, prev_bearing: float) -> float:
    """Angle at the old position between travel direction and old sight line.

    Raises
    ------
    ZeroDisplacement
        If the robot moved less than 1e-9 m; the angle is undefined and the
        caller should skip classification this step.
    """
    dx = new_pose.x - prev_pose.x
    dy = new_pose.y - prev_pose.y
    if math.hypot(dx, dy) < _MIN_DISPLACEMENT:
        raise ZeroDisplacement("robot displacement too small to define approach angle")
    travel_direction = math.atan2(dy, dx)
    sight_direction = prev_pose.theta + prev_bearing
    return abs(wrap_angle(travel_direction - sight_direction))


def classify(
    track: LandmarkTrack,
    m: Measurement,
    new_pose: Pose2D,
    params: ClassifierParams,
    step: int,
) -> Classification:
    """Compare measured range against the stationary-hypothesis prediction.

    The boundary is inclusive: |d_hat - d| exactly equal to epsilon still
    counts as stationary.

    Raises
    ------
    StaleTrack
        If the track's last sighting is older than the staleness limit.
    ZeroDisplacement
        Propagated from :func:`compute_alpha`.
    """
    if m.landmark_id != track.landmark_id:
        raise ValueError("measurement and track refer to different landmarks")
    if step - track.last_seen_step > params.staleness_limit:
        raise StaleTrack(
            f"landmark {track.landmark_id} unseen for {step - track.last_seen_step} steps"
        )
    d_s = distance(track.prev_pose, new_pose)
    alpha = compute_alpha(track.prev_pose, new_pose, track.prev_bearing)
    d_hat = predicted_distance(d_s, track.prev_range, alpha)
    verdict = Verdict.STATIONARY if abs(d_hat - m.range) <= params.epsilon else Verdict.MOVING
    return Classification(m.landmark_id, verdict, d_hat, m.range)


def step_filter(
    tracks: dict[int, LandmarkTrack],
    measurements: list[Measurement],
    new_pose: Pose2D,
    step: int,
    params: ClassifierParams,
    classify_motion: bool = True,
    track_pose: Pose2D | None = None,
) -> tuple[StepDecision, dict[int, LandmarkTrack]]:
    """Gate one observation step's measurements and refresh the track store.

    Stationary verdicts are admitted, moving ones rejected (their ids are
    reported so the caller can drop them from the SLAM state), and first
    sightings, stale re-sightings, and zero-displacement steps are withheld
    with verdict ``UNKNOWN``.  Every sighted landmark's track is updated
    with the new (range, bearing, pose, step) snapshot; ``track_pose``
    lets the caller store a different pose estimate for the sighting than
    the one classified against (see :class:`MotionClassifier`).

    With ``classify_motion=False`` the distance test is skipped and every
    tracked landmark is admitted; the first-sighting and staleness delays
    still apply, which is what makes a conventional (non-classifying) run
    follow the exact same admission schedule when nothing moves.
    """
    admitted: list[Measurement] = []
    rejected_ids: list[int] = []
    classifications: list[Classification] = []
    updated = dict(tracks)
    if track_pose is None:
        track_pose = new_pose

    for m in measurements:
        track = updated.get(m.landmark_id)
        if track is None:
            outcome = Classification(m.landmark_id, Verdict.UNKNOWN, math.nan, m.range)
        elif not classify_motion:
            try:
                # Same branch structure as the classifying path so admission
                # schedules are identical when no landmark moves.
                if step - track.last_seen_step > params.staleness_limit:
                    raise StaleTrack("stale")
                compute_alpha(track.prev_pose, new_pose, track.prev_bearing)
                outcome = Classification(m.landmark_id, Verdict.STATIONARY, math.nan, m.range)
            except (StaleTrack, ZeroDisplacement):
                outcome = Classification(m.landmark_id, Verdict.UNKNOWN, math.nan, m.range)
        else:
            try:
                outcome = classify(track, m, new_pose, params, step)
            except (StaleTrack, ZeroDisplacement):
                outcome = Classification(m.landmark_id, Verdict.UNKNOWN, math.nan, m.range)

        classifications.append(outcome)
        if outcome.verdict is Verdict.STATIONARY:
            admitted.append(m)
        elif outcome.verdict is Verdict.MOVING:
            rejected_ids.append(m.landmark_id)
        updated[m.landmark_id] = LandmarkTrack(
            m.landmark_id, m.range, m.bearing, track_pose, step
        )

    return StepDecision(admitted, rejected_ids, classifications), updated


@dataclass(slots=True)
class MotionClassifier:
    """Stateful gate in front of the SLAM correction.

    Owns the track store and the blacklist: once a landmark is seen moving
    it is rejected on every later sighting for the rest of the run.

    Classification and track updates are split into two phases.
    :meth:`observe` classifies against the filter's *predicted* pose, so the
    displacement in the stationary-hypothesis triangle is the pure
    dead-reckoned motion since the previous sighting.  :meth:`commit` then
    stores the *corrected* pose into the tracks.  Anchoring both triangle
    vertices to the same estimation error makes the distance test invariant
    to map-gauge drift; storing predicted poses instead would fold every
    correction jump into the apparent displacement and mass-reject
    stationary landmarks.
    """

    params: ClassifierParams
    classify_motion: bool = True
    tracks: dict[int, LandmarkTrack] = field(default_factory=dict)
    blacklist: set[int] = field(default_factory=set)
    _pending: list[tuple[Measurement, int]] = field(default_factory=list)

    def observe(self, measurements: list[Measurement], pose: Pose2D, step: int) -> StepDecision:
        """Classify one step's sightings; ``pose`` is the post-predict pose."""
        live = [m for m in measurements if m.landmark_id not in self.blacklist]
        decision, _ = step_filter(
            self.tracks, live, pose, step, self.params, self.classify_motion
        )
        for m in measurements:
            if m.landmark_id in self.blacklist:
                decision.rejected_ids.append(m.landmark_id)
                decision.classifications.append(
                    Classification(m.landmark_id, Verdict.MOVING, math.nan, m.range)
                )
        for lid in decision.rejected_ids:
            self.blacklist.add(lid)
            self.tracks.pop(lid, None)
        decision.rejected_ids.sort()
        decision.classifications.sort(key=lambda c: c.landmark_id)
        self._pending = [(m, step) for m in live if m.landmark_id not in self.blacklist]
        return decision

    def commit(self, pose: Pose2D) -> None:
        """Record this step's sightings with the post-correct pose."""
        for m, step in self._pending:
            self.tracks[m.landmark_id] = LandmarkTrack(
                m.landmark_id, m.range, m.bearing, pose, step
            )
        self._pending = []
