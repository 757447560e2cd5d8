"""Deterministic benchmark world generation.

A scenario is built in four stages, each drawing from its own named random
substream of the run seed:

1. waypoints sampled uniformly in the area and ordered into a short closed
   tour (nearest-neighbor construction plus 2-opt),
2. ground-truth driving: a proportional heading controller follows the tour
   with additive Gaussian control noise, integrating the same motion model
   the filter uses (so logged poses replay exactly from logged controls),
3. stationary landmarks rejection-sampled until each lies within
   ``landmark_radius`` of some waypoint,
4. movers walking at fixed speed toward random targets that are re-drawn
   near the robot's ground-truth position whenever reached or left behind.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamic_filter import ClassifierParams
from .errors import PlacementExhausted
from .geometry import Point2D, Pose2D, distance, wrap_angle
from .rng import STREAM_CONTROL, STREAM_LANDMARKS, STREAM_MOVER, STREAM_WAYPOINTS, substream
from .sensing import SensorParams, noisy_control
from .slam import Control, NoiseParams, motion_model

# Waypoint capture radius for the ground-truth controller, meters.
SWITCH_RADIUS = 1.0

_PLACEMENT_ATTEMPTS = 10_000
_TARGET_ATTEMPTS = 100


class LandmarkKind(enum.Enum):
    STATIONARY = "stationary"
    MOVING = "moving"


@dataclass(slots=True)
class NoiseSigmas:
    """Source standard deviations for injected noise (and the filter's Q/R)."""

    sigma_v: float = 0.3
    sigma_omega: float = math.radians(3.0)
    sigma_r: float = 0.05
    sigma_b: float = math.radians(1.0)

    def to_noise_params(self, dt: float) -> NoiseParams:
        return NoiseParams.from_sigmas(self.sigma_v, self.sigma_omega, self.sigma_r, self.sigma_b, dt)


@dataclass(slots=True)
class SensorGeometry:
    """Sensor reach only; noise magnitudes live in :class:`NoiseSigmas`."""

    max_range: float = 30.0
    fov: float = 2.0 * math.pi


@dataclass(slots=True)
class ScenarioConfig:
    """Everything that defines one benchmark world and one run over it."""

    waypoints: int = 20
    landmarks: int = 10
    movers: int = 0
    area: tuple[float, float] = (100.0, 100.0)
    landmark_radius: float = 15.0
    robot_speed: float = 3.0
    max_turn_rate: float = math.radians(45.0)
    dt: float = 0.1
    obs_every: int = 5
    mover_speed: float = 1.0
    mover_tether: float = 20.0
    laps: int = 1
    noise: NoiseSigmas = field(default_factory=NoiseSigmas)
    sensor: SensorGeometry = field(default_factory=SensorGeometry)
    classifier: ClassifierParams = field(default_factory=ClassifierParams)
    seed: int = 0
    ukf_lambda: float | None = None

    def __post_init__(self) -> None:
        if self.waypoints < 2:
            raise ValueError("need at least 2 waypoints")
        if not (0 <= self.movers <= self.landmarks):
            raise ValueError(f"movers must satisfy 0 <= {self.movers} <= {self.landmarks}")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.landmark_radius <= 0.0:
            raise ValueError("landmark_radius must be positive")
        if self.obs_every < 1:
            raise ValueError("obs_every must be >= 1")
        if self.laps < 1:
            raise ValueError("laps must be >= 1")

    @property
    def observation_dt(self) -> float:
        return self.obs_every * self.dt

    def sensor_params(self) -> SensorParams:
        """Effective simulated-sensor parameters: geometry plus noise sigmas."""
        return SensorParams(
            max_range=self.sensor.max_range,
            fov=self.sensor.fov,
            sigma_r=self.noise.sigma_r,
            sigma_b=self.noise.sigma_b,
        )


@dataclass(slots=True)
class Scenario:
    """A generated world: tour-ordered waypoints, landmarks, mover scripts."""

    waypoints: list[Point2D]
    landmarks: list[tuple[int, LandmarkKind, Point2D]]
    mover_paths: dict[int, list[Point2D]]

    def stationary(self) -> list[tuple[int, Point2D]]:
        return [(lid, p) for lid, kind, p in self.landmarks if kind is LandmarkKind.STATIONARY]

    def world_at(self, obs_index: int) -> list[tuple[int, Point2D]]:
        """Landmark positions at one observation step, sorted by id."""
        world = []
        for lid, kind, p in self.landmarks:
            if kind is LandmarkKind.MOVING:
                path = self.mover_paths[lid]
                world.append((lid, path[min(obs_index, len(path) - 1)]))
            else:
                world.append((lid, p))
        world.sort(key=lambda item: item[0])
        return world


@dataclass(slots=True)
class TruthLog:
    """Ground-truth record of one drive: poses and both control streams.

    ``poses[k]`` is the pose after applying ``applied[k]`` to the previous
    pose, starting from ``initial_pose``; replaying the applied controls
    through the motion model reproduces the poses bit for bit.
    """

    initial_pose: Pose2D
    poses: np.ndarray  # (K, 3)
    commanded: np.ndarray  # (K, 2) columns v, omega
    applied: np.ndarray  # (K, 2)
    dt: float

    @property
    def n_steps(self) -> int:
        return self.poses.shape[0]

    def observation_steps(self, obs_every: int) -> list[int]:
        """Control-step indices (1-based) at which the sensor fires."""
        return list(range(obs_every, self.n_steps + 1, obs_every))

    def pose_after(self, k: int) -> Pose2D:
        """Pose after control step ``k`` (1-based); k=0 is the initial pose."""
        if k == 0:
            return self.initial_pose
        x, y, th = self.poses[k - 1]
        return Pose2D(x, y, th)


def tour_length(points: list[Point2D], order: list[int]) -> float:
    """Closed-tour length for a visiting order."""
    total = 0.0
    for i in range(len(order)):
        total += distance(points[order[i]], points[order[(i + 1) % len(order)]])
    return total


def tsp_order(points: list[Point2D]) -> list[int]:
    """Closed-tour visiting order: nearest-neighbor start, 2-opt polish.

    Deterministic for a given input order; terminates when no single 2-opt
    exchange shortens the tour.
    """
    n = len(points)
    if n < 2:
        raise ValueError("need at least 2 points")
    coords = np.array([[p.x, p.y] for p in points])
    dists = np.hypot(coords[:, 0:1] - coords[:, 0], coords[:, 1:2] - coords[:, 1])

    unvisited = set(range(1, n))
    tour = [0]
    while unvisited:
        last = tour[-1]
        nxt = min(unvisited, key=lambda j: (dists[last, j], j))
        tour.append(nxt)
        unvisited.remove(nxt)

    improved = True
    while improved:
        improved = False
        for i in range(1, n - 1):
            for j in range(i + 1, n):
                a, b = tour[i - 1], tour[i]
                c, d = tour[j], tour[(j + 1) % n]
                delta = dists[a, c] + dists[b, d] - dists[a, b] - dists[c, d]
                if delta < -1e-12:
                    tour[i : j + 1] = reversed(tour[i : j + 1])
                    improved = True
    return tour


def drive(scenario: Scenario, config: ScenarioConfig) -> TruthLog:
    """Follow the waypoint tour with a proportional heading controller.

    Commanded turn rate is the heading error over one step, clamped to the
    turn-rate limit; speed is constant.  Applied controls add seeded Gaussian
    noise.  The run ends when the robot has captured every waypoint of every
    lap (within :data:`SWITCH_RADIUS`) or when a generous step budget runs
    out (a noisy controller can in principle orbit a target forever).
    """
    waypoints = scenario.waypoints
    rng = substream(config.seed, STREAM_CONTROL)

    # Lap 1 starts at waypoint 0, so it only drives the remaining M-1 legs;
    # every further lap returns through waypoint 0 first.
    targets = list(waypoints[1:])
    for _ in range(config.laps - 1):
        targets.append(waypoints[0])
        targets.extend(waypoints[1:])
    est_tour = tour_length(waypoints, list(range(len(waypoints))))
    max_steps = int(5 * config.laps * (est_tour / max(config.robot_speed * config.dt, 1e-9))) + 2000

    pose = Pose2D(
        waypoints[0].x,
        waypoints[0].y,
        math.atan2(waypoints[1].y - waypoints[0].y, waypoints[1].x - waypoints[0].x),
    )
    initial_pose = pose

    poses: list[tuple[float, float, float]] = []
    commanded: list[tuple[float, float]] = []
    applied: list[tuple[float, float]] = []

    target_idx = 0
    for _ in range(max_steps):
        if target_idx >= len(targets):
            break
        target = targets[target_idx]
        heading_err = wrap_angle(math.atan2(target.y - pose.y, target.x - pose.x) - pose.theta)
        omega_cmd = max(-config.max_turn_rate, min(config.max_turn_rate, heading_err / config.dt))
        cmd = Control(config.robot_speed, omega_cmd, config.dt)
        act = noisy_control(cmd, config.noise.sigma_v, config.noise.sigma_omega, rng)
        pose = motion_model(pose, act)

        poses.append((pose.x, pose.y, pose.theta))
        commanded.append((cmd.v, cmd.omega))
        applied.append((act.v, act.omega))

        while target_idx < len(targets) and distance(pose, targets[target_idx]) <= SWITCH_RADIUS:
            target_idx += 1

    return TruthLog(
        initial_pose=initial_pose,
        poses=np.array(poses, dtype=float).reshape(-1, 3),
        commanded=np.array(commanded, dtype=float).reshape(-1, 2),
        applied=np.array(applied, dtype=float).reshape(-1, 2),
        dt=config.dt,
    )


def _uniform_disk_point(center_x: float, center_y: float, radius: float, rng: np.random.Generator) -> tuple[float, float]:
    r = radius * math.sqrt(rng.uniform())
    ang = rng.uniform(0.0, 2.0 * math.pi)
    return center_x + r * math.cos(ang), center_y + r * math.sin(ang)


def moving_path(
    start: Point2D, truth: TruthLog, config: ScenarioConfig, rng: np.random.Generator
) -> list[Point2D]:
    """Fixed-speed walk toward random targets tethered to the robot's truth.

    One position per observation step.  Targets are drawn uniformly in the
    tether disk around the robot's current true position, clamped to the
    area; a target is re-drawn once reached (within one step length) or once
    the robot leaves it more than the tether behind.  Because targets lie
    inside the rectangular area and steps never overshoot the target, the
    path stays in the area and every step has exactly the nominal length.
    """
    width, height = config.area
    step_len = config.mover_speed * config.observation_dt
    pos = (start.x, start.y)
    target: tuple[float, float] | None = None
    path: list[Point2D] = []

    for k in truth.observation_steps(config.obs_every):
        if step_len == 0.0:
            path.append(Point2D(*pos))
            continue
        robot = truth.pose_after(k)
        need_new = (
            target is None
            or math.hypot(target[0] - robot.x, target[1] - robot.y) > config.mover_tether
            or math.hypot(target[0] - pos[0], target[1] - pos[1]) <= step_len
        )
        if need_new:
            target = None
            for _ in range(_TARGET_ATTEMPTS):
                cx, cy = _uniform_disk_point(robot.x, robot.y, config.mover_tether, rng)
                cand = (min(max(cx, 0.0), width), min(max(cy, 0.0), height))
                if math.hypot(cand[0] - pos[0], cand[1] - pos[1]) > step_len:
                    target = cand
                    break
            if target is None:
                # Degenerate geometry: aim at the farthest corner instead.
                corners = [(0.0, 0.0), (width, 0.0), (0.0, height), (width, height)]
                target = max(corners, key=lambda c: math.hypot(c[0] - pos[0], c[1] - pos[1]))
        gap = math.hypot(target[0] - pos[0], target[1] - pos[1])
        pos = (
            pos[0] + step_len * (target[0] - pos[0]) / gap,
            pos[1] + step_len * (target[1] - pos[1]) / gap,
        )
        path.append(Point2D(*pos))

    return path


def generate_scenario(config: ScenarioConfig) -> tuple[Scenario, TruthLog]:
    """Deterministically build a world and its ground-truth drive.

    Raises
    ------
    PlacementExhausted
        If a stationary landmark cannot be placed within ``landmark_radius``
        of any waypoint after 10^4 attempts.
    """
    width, height = config.area
    rng_w = substream(config.seed, STREAM_WAYPOINTS)
    raw = [Point2D(rng_w.uniform(0.0, width), rng_w.uniform(0.0, height)) for _ in range(config.waypoints)]
    order = tsp_order(raw)
    waypoints = [raw[i] for i in order]

    scenario = Scenario(waypoints=waypoints, landmarks=[], mover_paths={})
    truth = drive(scenario, config)

    rng_l = substream(config.seed, STREAM_LANDMARKS)
    n_stationary = config.landmarks - config.movers
    landmarks: list[tuple[int, LandmarkKind, Point2D]] = []
    for lid in range(n_stationary):
        for _ in range(_PLACEMENT_ATTEMPTS):
            cand = Point2D(rng_l.uniform(0.0, width), rng_l.uniform(0.0, height))
            if any(distance(cand, w) <= config.landmark_radius for w in waypoints):
                landmarks.append((lid, LandmarkKind.STATIONARY, cand))
                break
        else:
            raise PlacementExhausted(
                f"no position within {config.landmark_radius} m of a waypoint after "
                f"{_PLACEMENT_ATTEMPTS} attempts (landmark {lid})"
            )

    mover_paths: dict[int, list[Point2D]] = {}
    for i in range(config.movers):
        lid = n_stationary + i
        rng_m = substream(config.seed, STREAM_MOVER, i)
        sx, sy = _uniform_disk_point(
            truth.initial_pose.x, truth.initial_pose.y, config.mover_tether, rng_m
        )
        start = Point2D(min(max(sx, 0.0), width), min(max(sy, 0.0), height))
        landmarks.append((lid, LandmarkKind.MOVING, start))
        mover_paths[lid] = moving_path(start, truth, config, rng_m)

    scenario.landmarks = landmarks
    scenario.mover_paths = mover_paths
    return scenario, truth
