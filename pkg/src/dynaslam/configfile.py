"""Config-file parsing: flat ``key = value`` lines under bracketed sections.

Sections are ``[scenario]``, ``[noise]``, ``[classifier]``, and
``[experiment]``; ``#`` starts a comment.  Unknown sections or keys are
errors (fail fast), missing ones fall back to defaults.  Angles are given
in degrees in the file and converted to radians here.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import replace
from pathlib import Path

from .dynamic_filter import ClassifierParams
from .errors import ConfigError
from .runner import ALGORITHMS, ExperimentSpec
from .scenario import NoiseSigmas, ScenarioConfig, SensorGeometry

_SCENARIO_KEYS = {
    "waypoints": int,
    "landmarks": int,
    "movers": int,
    "area_width": float,
    "area_height": float,
    "landmark_radius": float,
    "robot_speed": float,
    "max_turn_rate_deg": float,
    "dt": float,
    "obs_every": int,
    "mover_speed": float,
    "mover_tether": float,
    "laps": int,
    "seed": int,
    "max_range": float,
    "fov_deg": float,
    "ukf_lambda": float,
}
_NOISE_KEYS = {"sigma_v": float, "sigma_omega_deg": float, "sigma_r": float, "sigma_b_deg": float}
_CLASSIFIER_KEYS = {"epsilon": float, "staleness_limit": int}
_EXPERIMENT_KEYS = {"kind": str, "values": str, "trials": int, "algorithms": str}

_SECTIONS = {
    "scenario": _SCENARIO_KEYS,
    "noise": _NOISE_KEYS,
    "classifier": _CLASSIFIER_KEYS,
    "experiment": _EXPERIMENT_KEYS,
}


def _parse_sections(path: str | Path) -> dict[str, dict[str, object]]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), strict=True)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    out: dict[str, dict[str, object]] = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        schema = _SECTIONS[section]
        values: dict[str, object] = {}
        for key, raw in parser.items(section):
            if key not in schema:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            try:
                values[key] = schema[key](raw)
            except ValueError:
                raise ConfigError(
                    f"{path}: bad value for {key!r} in [{section}]: {raw!r}"
                ) from None
        out[section] = values
    return out


def load_config(path: str | Path) -> tuple[ScenarioConfig, ExperimentSpec | None]:
    """Build a scenario config (and experiment spec, if present) from a file.

    Raises
    ------
    ConfigError
        On unknown sections/keys, malformed values, or invalid combinations.
    """
    sections = _parse_sections(path)

    sc = sections.get("scenario", {})
    nz = sections.get("noise", {})
    cl = sections.get("classifier", {})

    kwargs: dict[str, object] = {}
    for key in ("waypoints", "landmarks", "movers", "landmark_radius", "robot_speed",
                "dt", "obs_every", "mover_speed", "mover_tether", "laps", "seed", "ukf_lambda"):
        if key in sc:
            kwargs[key] = sc[key]
    if "area_width" in sc or "area_height" in sc:
        base = ScenarioConfig()
        kwargs["area"] = (
            float(sc.get("area_width", base.area[0])),
            float(sc.get("area_height", base.area[1])),
        )
    if "max_turn_rate_deg" in sc:
        kwargs["max_turn_rate"] = math.radians(float(sc["max_turn_rate_deg"]))
    sensor = SensorGeometry()
    if "max_range" in sc:
        sensor.max_range = float(sc["max_range"])
    if "fov_deg" in sc:
        sensor.fov = math.radians(float(sc["fov_deg"]))
    kwargs["sensor"] = sensor

    noise = NoiseSigmas()
    if "sigma_v" in nz:
        noise.sigma_v = float(nz["sigma_v"])
    if "sigma_omega_deg" in nz:
        noise.sigma_omega = math.radians(float(nz["sigma_omega_deg"]))
    if "sigma_r" in nz:
        noise.sigma_r = float(nz["sigma_r"])
    if "sigma_b_deg" in nz:
        noise.sigma_b = math.radians(float(nz["sigma_b_deg"]))
    kwargs["noise"] = noise

    classifier = ClassifierParams()
    if "epsilon" in cl:
        classifier = replace(classifier, epsilon=float(cl["epsilon"]))
    if "staleness_limit" in cl:
        classifier = replace(classifier, staleness_limit=int(cl["staleness_limit"]))
    kwargs["classifier"] = classifier

    try:
        config = ScenarioConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    spec = None
    if "experiment" in sections:
        spec = _build_experiment(sections["experiment"], config, path)
    return config, spec


def parse_algorithms(text: str) -> tuple[str, ...]:
    name = text.strip().lower()
    if name == "both":
        return ALGORITHMS
    if name in ALGORITHMS:
        return (name,)
    raise ConfigError(f"unknown algorithm {text!r} (use conventional, proposed, or both)")


def _build_experiment(exp: dict[str, object], config: ScenarioConfig, path) -> ExperimentSpec:
    if "kind" not in exp:
        raise ConfigError(f"{path}: [experiment] requires 'kind'")
    kind = str(exp["kind"]).strip()
    values: list[int] = []
    if "values" in exp:
        try:
            values = [int(v.strip()) for v in str(exp["values"]).split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"{path}: [experiment] values must be comma-separated integers") from None
    algorithms = ALGORITHMS
    if "algorithms" in exp:
        algorithms = parse_algorithms(str(exp["algorithms"]))
    kwargs = {"kind": kind, "values": values, "base": config, "algorithms": algorithms}
    if "trials" in exp:
        kwargs["trials"] = int(exp["trials"])
    return ExperimentSpec(**kwargs)
