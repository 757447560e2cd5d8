"""Scenario and ground-truth persistence: line-oriented UTF-8 text.

Format (header line, then one record per line, floats as %.17g so reading
back reproduces the exact binary values):

    dynaslam-scenario v1
    W <idx> <x> <y>                      waypoint, tour order
    L <id> <S|D> <x> <y>                 landmark (S stationary, D moving)
    P <id> <step> <x> <y>                mover position at observation step
    T <step> <x> <y> <theta> <v_cmd> <w_cmd> <v_app> <w_app>   truth log

The T record with step 0 carries the initial pose with null controls;
steps 1..K hold the pose after each applied control.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ConfigError
from .geometry import Point2D, Pose2D
from .scenario import LandmarkKind, Scenario, TruthLog

HEADER = "dynaslam-scenario v1"

_KIND_CODE = {LandmarkKind.STATIONARY: "S", LandmarkKind.MOVING: "D"}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}


def _f(x: float) -> str:
    return format(x, ".17g")


def write_scenario(path: str | Path, scenario: Scenario, truth: TruthLog) -> None:
    """Serialize a scenario and its truth log to one dataset file."""
    lines = [HEADER]
    for idx, w in enumerate(scenario.waypoints):
        lines.append(f"W {idx} {_f(w.x)} {_f(w.y)}")
    for lid, kind, pt in scenario.landmarks:
        lines.append(f"L {lid} {_KIND_CODE[kind]} {_f(pt.x)} {_f(pt.y)}")
    for lid in sorted(scenario.mover_paths):
        for step, pt in enumerate(scenario.mover_paths[lid]):
            lines.append(f"P {lid} {step} {_f(pt.x)} {_f(pt.y)}")
    p0 = truth.initial_pose
    lines.append(f"T 0 {_f(p0.x)} {_f(p0.y)} {_f(p0.theta)} 0 0 0 0")
    for k in range(truth.n_steps):
        x, y, th = truth.poses[k]
        vc, wc = truth.commanded[k]
        va, wa = truth.applied[k]
        lines.append(f"T {k + 1} {_f(x)} {_f(y)} {_f(th)} {_f(vc)} {_f(wc)} {_f(va)} {_f(wa)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_scenario(path: str | Path, dt: float = 0.0) -> tuple[Scenario, TruthLog]:
    """Parse a dataset file back into a scenario and truth log.

    The file does not carry the control interval; pass the config's ``dt``
    so the returned truth log can replay controls.

    Raises
    ------
    ConfigError
        On a bad header or malformed record.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise ConfigError(f"{path}: expected header '{HEADER}'")

    waypoints: list[tuple[int, Point2D]] = []
    landmarks: list[tuple[int, LandmarkKind, Point2D]] = []
    mover_records: dict[int, list[tuple[int, Point2D]]] = {}
    truth_records: dict[int, tuple[float, ...]] = {}

    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        tag = fields[0]
        try:
            if tag == "W":
                waypoints.append((int(fields[1]), Point2D(float(fields[2]), float(fields[3]))))
            elif tag == "L":
                landmarks.append(
                    (int(fields[1]), _CODE_KIND[fields[2]], Point2D(float(fields[3]), float(fields[4])))
                )
            elif tag == "P":
                mover_records.setdefault(int(fields[1]), []).append(
                    (int(fields[2]), Point2D(float(fields[3]), float(fields[4])))
                )
            elif tag == "T":
                truth_records[int(fields[1])] = tuple(float(v) for v in fields[2:9])
            else:
                raise ConfigError(f"{path}:{lineno}: unknown record tag {tag!r}")
        except (IndexError, ValueError, KeyError) as exc:
            raise ConfigError(f"{path}:{lineno}: malformed record: {raw!r} ({exc})") from None

    waypoints.sort(key=lambda item: item[0])
    landmarks.sort(key=lambda item: item[0])
    mover_paths = {
        lid: [pt for _, pt in sorted(records)] for lid, records in mover_records.items()
    }
    scenario = Scenario(
        waypoints=[w for _, w in waypoints], landmarks=landmarks, mover_paths=mover_paths
    )

    if 0 not in truth_records:
        raise ConfigError(f"{path}: missing initial-pose record 'T 0'")
    init = truth_records.pop(0)
    n = len(truth_records)
    if sorted(truth_records) != list(range(1, n + 1)):
        raise ConfigError(f"{path}: truth steps are not contiguous 1..{n}")
    poses = np.empty((n, 3))
    commanded = np.empty((n, 2))
    applied = np.empty((n, 2))
    for k in range(1, n + 1):
        x, y, th, vc, wc, va, wa = truth_records[k]
        poses[k - 1] = (x, y, th)
        commanded[k - 1] = (vc, wc)
        applied[k - 1] = (va, wa)
    truth = TruthLog(
        initial_pose=Pose2D(init[0], init[1], init[2]),
        poses=poses,
        commanded=commanded,
        applied=applied,
        dt=dt,
    )
    return scenario, truth
