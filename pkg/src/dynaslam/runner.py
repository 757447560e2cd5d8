"""Trial execution and experiment sweeps.

One *trial* is: generate a seeded world, drive the ground truth, precompute
the measurement stream, then run the filter pipeline over it.  The proposed
and conventional algorithms always consume the identical scenario, truth,
and measurement objects inside a trial, so their comparison is paired; the
only difference is whether the motion classifier's distance test is active
(the conventional baseline keeps the same first-sighting admission delay,
which makes the two pipelines bit-identical when nothing moves and the
threshold is infinite).

Experiments sweep one parameter, derive an independent seed per
(value, trial) cell, and may fan trials out over worker processes; rows are
sorted by (value, trial, algorithm) afterwards, so the output is identical
for any job count.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field, replace
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .dynamic_filter import Classification, MotionClassifier
from .errors import CholeskyFailure, ConfigError, SingularInnovation
from .geometry import Point2D
from .metrics import TrialResult, iae, summarize
from .rng import STREAM_MEASUREMENT, derive_trial_seed, substream
from .scenario import (
    LandmarkKind,
    Scenario,
    ScenarioConfig,
    TruthLog,
    drive,
    generate_scenario,
    tsp_order,
)
from .sensing import sense
from .slam import (
    Control,
    Measurement,
    SlamState,
    augment,
    correct,
    predict,
    remove_landmark,
)

CONVENTIONAL = "conventional"
PROPOSED = "proposed"
ALGORITHMS = (CONVENTIONAL, PROPOSED)

# Starting pose uncertainty: the simulator initializes the filter at the
# true pose, but an exactly-zero covariance is numerically fragile, so give
# it 10 um / 10 urad of slack.  (The transform's second-order mean bias per
# predict scales with this variance, so it also bounds noiseless drift.)
INIT_POSE_VAR = 1e-10

EXPERIMENT_KINDS = ("vary_movers", "vary_landmarks", "vary_waypoints", "timing", "mapping")
_KIND_CODE = {"single": 0, "vary_movers": 1, "vary_landmarks": 2, "vary_waypoints": 3, "timing": 4, "mapping": 5}

RESULTS_HEADER = "experiment,param_value,trial,seed,algorithm,iae,steps,ms_per_step,admitted,rejected"
SUMMARY_HEADER = "param,algo,mean_iae,std_iae,mean_ms"

# Mapping scenario constants: wall sample spacing and the rigid 5-point
# moving cluster (plus-shaped, offsets in meters).
WALL_SPACING = 0.25
CLUSTER_OFFSETS = ((0.0, 0.0), (0.15, 0.0), (-0.15, 0.0), (0.0, 0.15), (0.0, -0.15))
_WAYPOINT_MARGIN = 2.0

_blas_limited = False


def _limit_blas_threads() -> None:
    """Pin BLAS pools to one thread so results do not depend on --jobs.

    Threaded GEMM changes summation order with the thread count; a single
    thread makes every trial bit-reproducible in any process layout (and is
    faster anyway at these matrix sizes).
    """
    global _blas_limited
    if _blas_limited:
        return
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(limits=1)
    except ImportError:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, "1")
    _blas_limited = True


@dataclass(slots=True)
class ExperimentSpec:
    """One sweep: which parameter varies, over which values, how many trials."""

    kind: str
    values: list[int]
    base: ScenarioConfig
    trials: int = 100
    algorithms: tuple[str, ...] = ALGORITHMS

    def __post_init__(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.kind != "mapping":
            if not self.values:
                raise ConfigError("experiment needs at least one sweep value")
            if any(v < 0 for v in self.values):
                raise ConfigError("sweep values must be non-negative")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {algo!r}")


@dataclass(slots=True)
class ResultRow:
    experiment: str
    param_value: int
    trial: int
    seed: int
    algorithm: str
    iae: float
    steps: int
    ms_per_step: float
    admitted: int
    rejected: int

    def to_csv(self) -> str:
        return (
            f"{self.experiment},{self.param_value},{self.trial},{self.seed},{self.algorithm},"
            f"{self.iae!r},{self.steps},{self.ms_per_step!r},{self.admitted},{self.rejected}"
        )


def cell_config(base: ScenarioConfig, kind: str, value: int, seed: int) -> ScenarioConfig:
    """Specialize the base config for one sweep cell.

    ``vary_landmarks`` sweeps the *stationary* count (the mover count stays
    fixed), matching the fixed-movers experiment design.
    """
    if kind == "vary_movers" or kind == "timing":
        return replace(base, movers=value, seed=seed)
    if kind == "vary_landmarks":
        return replace(base, landmarks=value + base.movers, seed=seed)
    if kind == "vary_waypoints":
        return replace(base, waypoints=value, seed=seed)
    return replace(base, seed=seed)


def precompute_measurements(
    scenario: Scenario, truth: TruthLog, config: ScenarioConfig
) -> list[list[Measurement]]:
    """Sense every observation step once, from ground truth only.

    Both algorithms of a trial consume this identical stream.  Draws are
    consumed in landmark-id order, so stationary landmarks (low ids) see the
    same noise regardless of how many movers exist.
    """
    rng = substream(config.seed, STREAM_MEASUREMENT)
    sensor = config.sensor_params()
    out = []
    for obs_index, k in enumerate(truth.observation_steps(config.obs_every)):
        world = scenario.world_at(obs_index)
        out.append(sense(truth.pose_after(k), world, sensor, rng))
    return out


def run_trial(
    scenario: Scenario,
    truth: TruthLog,
    config: ScenarioConfig,
    algorithm: str,
    measurements: list[list[Measurement]] | None = None,
    classification_sink: list[list[Classification]] | None = None,
    state_sink: list[SlamState] | None = None,
) -> TrialResult:
    """Run one filter pipeline over a prepared world.

    Per control step the filter predicts with the commanded control (the
    noise that actually perturbed the robot is unknowable); per observation
    step the gate classifies, moving landmarks are dropped from the state,
    newly admitted ones are augmented, and a joint correction runs over all
    admitted measurements.  Wall-clock time is accumulated around filter
    code only.

    A numerically failed trial is returned with ``failed=True`` and NaN
    error rather than raised.
    """
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algorithm!r}")
    noise = config.noise.to_noise_params(config.dt)
    lam = config.ukf_lambda
    if measurements is None:
        measurements = precompute_measurements(scenario, truth, config)

    state = SlamState.initial(truth.initial_pose, INIT_POSE_VAR * np.eye(3))
    gate = MotionClassifier(config.classifier, classify_motion=(algorithm == PROPOSED))
    obs_steps = truth.observation_steps(config.obs_every)

    est: list[tuple[float, float, float]] = []
    tru: list[tuple[float, float, float]] = []
    admitted_per_step: list[int] = []
    rejected_per_step: list[int] = []
    filter_seconds = 0.0
    steps_done = 0
    failed = False
    reason = ""

    obs_iter = 0
    try:
        for k in range(1, truth.n_steps + 1):
            v_cmd, w_cmd = truth.commanded[k - 1]
            u = Control(v_cmd, w_cmd, config.dt)
            observing = obs_iter < len(obs_steps) and obs_steps[obs_iter] == k

            t0 = time.perf_counter()
            state = predict(state, u, noise, lam)
            if observing:
                decision = gate.observe(measurements[obs_iter], state.pose, obs_iter)
                for lid in decision.rejected_ids:
                    if state.has_landmark(lid):
                        state = remove_landmark(state, lid)
                for m in decision.admitted:
                    if not state.has_landmark(m.landmark_id):
                        state = augment(state, m, noise, lam)
                state, _ = correct(state, decision.admitted, noise, lam)
                gate.commit(state.pose)
            filter_seconds += time.perf_counter() - t0

            if observing:
                pose = state.pose
                true_pose = truth.poses[k - 1]
                est.append((pose.x, pose.y, pose.theta))
                tru.append((true_pose[0], true_pose[1], true_pose[2]))
                admitted_per_step.append(len(decision.admitted))
                rejected_per_step.append(len(decision.rejected_ids))
                if classification_sink is not None:
                    classification_sink.append(decision.classifications)
                obs_iter += 1
            steps_done = k
    except (CholeskyFailure, SingularInnovation) as exc:
        failed = True
        reason = f"{type(exc).__name__}: {exc}"

    if state_sink is not None:
        state_sink.append(state)

    est_arr = np.array(est, dtype=float).reshape(-1, 3)
    tru_arr = np.array(tru, dtype=float).reshape(-1, 3)
    error = iae(est_arr, tru_arr) if not failed and est_arr.shape[0] >= 2 else math.nan
    ms = 1000.0 * filter_seconds / steps_done if steps_done else math.nan
    return TrialResult(
        estimated=est_arr,
        truth=tru_arr,
        iae=error,
        ms_per_step=ms,
        admitted_per_step=admitted_per_step,
        rejected_per_step=rejected_per_step,
        seed=config.seed,
        control_steps=steps_done,
        failed=failed,
        failure_reason=reason,
    )


def run_cell_trial(
    base: ScenarioConfig, kind: str, value: int, trial: int, algorithms: tuple[str, ...]
) -> list[tuple[str, int, TrialResult]]:
    """One (sweep value, trial) cell: shared world, one run per algorithm."""
    _limit_blas_threads()
    seed = derive_trial_seed(base.seed, _KIND_CODE[kind], value, trial)
    config = cell_config(base, kind, value, seed)
    scenario, truth = generate_scenario(config)
    measurements = precompute_measurements(scenario, truth, config)
    return [
        (algo, seed, run_trial(scenario, truth, config, algo, measurements))
        for algo in algorithms
    ]


def _cell_worker(args):
    base, kind, value, trial, algorithms = args
    return value, trial, run_cell_trial(base, kind, value, trial, algorithms)


def run_experiment(
    spec: ExperimentSpec,
    jobs: int = 1,
    out_dir: str | Path | None = None,
    progress: bool = False,
) -> tuple[list[ResultRow], list[tuple[int, str, float, float, float]]]:
    """Run a sweep, optionally in parallel, and optionally write CSVs.

    Returns the sorted result rows and the per-(value, algorithm) summary
    ``(param, algo, mean_iae, std_iae, mean_ms)``.  Failed trials keep their
    row (with NaN error) but are excluded from summary statistics.
    """
    _limit_blas_threads()
    tasks = [
        (spec.base, spec.kind, value, trial, spec.algorithms)
        for value in spec.values
        for trial in range(spec.trials)
    ]
    results: dict[tuple[int, int], list[tuple[str, int, TrialResult]]] = {}
    if jobs > 1 and len(tasks) > 1:
        with get_context("fork").Pool(processes=jobs, initializer=_limit_blas_threads) as pool:
            for value, trial, cell in pool.imap_unordered(_cell_worker, tasks, chunksize=1):
                results[(value, trial)] = cell
                if progress:
                    print(f"  cell value={value} trial={trial} done", flush=True)
    else:
        for base, kind, value, trial, algorithms in tasks:
            results[(value, trial)] = run_cell_trial(base, kind, value, trial, algorithms)
            if progress:
                print(f"  cell value={value} trial={trial} done", flush=True)

    rows: list[ResultRow] = []
    trials_by_cell: dict[tuple[int, str], list[TrialResult]] = {}
    failures = 0
    for value in spec.values:
        for trial in range(spec.trials):
            for algo, seed, result in results[(value, trial)]:
                rows.append(
                    ResultRow(
                        experiment=spec.kind,
                        param_value=value,
                        trial=trial,
                        seed=seed,
                        algorithm=algo,
                        iae=result.iae,
                        steps=result.control_steps,
                        ms_per_step=result.ms_per_step,
                        admitted=result.admitted_total,
                        rejected=result.rejected_total,
                    )
                )
                if result.failed:
                    failures += 1
                else:
                    trials_by_cell.setdefault((value, algo), []).append(result)
    rows.sort(key=lambda r: (r.param_value, r.trial, r.algorithm))

    summary: list[tuple[int, str, float, float, float]] = []
    for value in spec.values:
        for algo in spec.algorithms:
            cell = trials_by_cell.get((value, algo), [])
            if cell:
                mean, std, mean_ms = summarize(cell)
                summary.append((value, algo, mean, std, mean_ms))
            else:
                summary.append((value, algo, math.nan, math.nan, math.nan))

    if failures and progress:
        print(f"  {failures} diverged trial(s) excluded from summaries", flush=True)
    if out_dir is not None:
        write_results_csv(Path(out_dir) / "results.csv", rows)
        write_summary_csv(Path(out_dir) / "summary.csv", summary)
    return rows, summary


def write_results_csv(path: str | Path, rows: list[ResultRow]) -> None:
    lines = [RESULTS_HEADER] + [r.to_csv() for r in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summary_csv(path: str | Path, summary) -> None:
    lines = [SUMMARY_HEADER]
    for value, algo, mean, std, mean_ms in summary:
        lines.append(f"{value},{algo},{mean!r},{std!r},{mean_ms!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def build_mapping_world(config: ScenarioConfig) -> tuple[Scenario, TruthLog]:
    """Rectangular room whose walls are closely spaced point landmarks,
    plus one rigid 5-point cluster circling the room center.

    The robot tours an inset rectangle.  Wall points are stationary
    landmarks; the cluster's points share one scripted circular path offset
    by a fixed formation, moving at the configured mover speed.
    """
    width, height = config.area
    margin = _WAYPOINT_MARGIN
    if width <= 2 * margin or height <= 2 * margin:
        raise ConfigError("mapping area too small for the inset tour")

    walls: list[Point2D] = []
    for x in np.arange(0.0, width, WALL_SPACING):
        walls.append(Point2D(float(x), 0.0))
        walls.append(Point2D(float(x), height))
    for y in np.arange(WALL_SPACING, height, WALL_SPACING):
        walls.append(Point2D(0.0, float(y)))
        walls.append(Point2D(width, float(y)))
    walls.sort(key=lambda p: (p.x, p.y))

    corners = [
        (margin, margin),
        (width / 2, margin),
        (width - margin, margin),
        (width - margin, height / 2),
        (width - margin, height - margin),
        (width / 2, height - margin),
        (margin, height - margin),
        (margin, height / 2),
    ]
    ring = [Point2D(x, y) for x, y in corners]
    order = tsp_order(ring)
    waypoints = [ring[i] for i in order]

    landmarks = [(lid, LandmarkKind.STATIONARY, pt) for lid, pt in enumerate(walls)]

    scenario = Scenario(waypoints=waypoints, landmarks=list(landmarks), mover_paths={})
    truth = drive(scenario, config)

    # The cluster patrols a straight segment through the room center at
    # constant speed, aimed at where the robot will be when the cluster is
    # classified for the first time (its second sighting).  Radial motion at
    # that moment guarantees immediate rejection; the permanent blacklist
    # keeps the map clean afterwards.
    center = (width / 2.0, height / 2.0)
    obs_ks = truth.observation_steps(config.obs_every)
    n_obs = len(obs_ks)
    anchor = truth.pose_after(obs_ks[1]) if n_obs > 1 else truth.initial_pose
    dx, dy = center[0] - anchor.x, center[1] - anchor.y
    norm = math.hypot(dx, dy)
    ux, uy = (dx / norm, dy / norm) if norm > 1e-9 else (1.0, 0.0)
    half = min(width, height) / 4.0
    seg_len = 2.0 * half
    e0 = (center[0] - half * ux, center[1] - half * uy)
    step_len = config.mover_speed * config.observation_dt

    def patrol(dist: float) -> tuple[float, float]:
        folded = math.fmod(dist, 2.0 * seg_len)
        along = folded if folded <= seg_len else 2.0 * seg_len - folded
        return e0[0] + along * ux, e0[1] + along * uy

    base_id = len(walls)
    mover_paths: dict[int, list[Point2D]] = {}
    for j, (ox, oy) in enumerate(CLUSTER_OFFSETS):
        lid = base_id + j
        landmarks.append((lid, LandmarkKind.MOVING, Point2D(e0[0] + ox, e0[1] + oy)))
        path = []
        for step in range(n_obs):
            cx, cy = patrol(step_len * (step + 1))
            path.append(Point2D(cx + ox, cy + oy))
        mover_paths[lid] = path

    scenario.landmarks = landmarks
    scenario.mover_paths = mover_paths
    return scenario, truth


@dataclass(slots=True)
class MappingResult:
    trial: TrialResult
    wall_rmse: float
    walls_mapped: int
    walls_total: int
    mover_points_in_map: int
    map_points: list[tuple[int, str, float, float, float, float]] = field(default_factory=list)


def run_mapping(config: ScenarioConfig) -> MappingResult:
    """Run the proposed pipeline over the mapping world and score the map."""
    _limit_blas_threads()
    scenario, truth = build_mapping_world(config)
    states: list[SlamState] = []
    trial = run_trial(scenario, truth, config, PROPOSED, state_sink=states)
    final = states[0]

    truth_pos = {lid: pt for lid, _, pt in scenario.landmarks}
    kinds = {lid: kind for lid, kind, _ in scenario.landmarks}
    n_walls = sum(1 for k in kinds.values() if k is LandmarkKind.STATIONARY)

    sq_errors = []
    movers_in_map = 0
    map_points = []
    for lid, est in final.landmarks:
        kind = kinds[lid]
        if kind is LandmarkKind.MOVING:
            movers_in_map += 1
            true_pt = scenario.mover_paths[lid][-1]
        else:
            true_pt = truth_pos[lid]
            sq_errors.append((est.x - true_pt.x) ** 2 + (est.y - true_pt.y) ** 2)
        map_points.append((lid, kind.value, est.x, est.y, true_pt.x, true_pt.y))

    wall_rmse = math.sqrt(sum(sq_errors) / len(sq_errors)) if sq_errors else math.nan
    return MappingResult(
        trial=trial,
        wall_rmse=wall_rmse,
        walls_mapped=len(sq_errors),
        walls_total=n_walls,
        mover_points_in_map=movers_in_map,
        map_points=map_points,
    )
