"""Command-line front end.

Subcommands:

* ``gen``   write a scenario dataset file for a config and seed
* ``run``   run one trial (both algorithms by default), write trajectory
            and classification CSVs
* ``bench`` run the experiment sweep described by the config's
            [experiment] section, write results.csv and summary.csv
* ``map``   run the room-mapping scenario, write the estimated point map
            and an error report

Exit codes: 0 success, 1 configuration error, 2 every trial diverged.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .configfile import load_config, parse_algorithms
from .dataset_io import read_scenario, write_scenario
from .errors import ConfigError, DynaslamError
from .runner import (
    ALGORITHMS,
    PROPOSED,
    ExperimentSpec,
    generate_scenario,
    precompute_measurements,
    run_experiment,
    run_mapping,
    run_trial,
)
from .scenario import ScenarioConfig

TRAJECTORY_HEADER = "step,est_x,est_y,est_theta,true_x,true_y,true_theta,admitted,rejected"
CLASSIFICATION_HEADER = "step,landmark_id,verdict,d_hat,d_meas"


class _Parser(argparse.ArgumentParser):
    # The spec reserves exit code 2 for "all trials diverged"; usage errors
    # are configuration errors.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dynaslam", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"dynaslam {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, algo=False, trials=False, jobs=False, dataset=False):
        p.add_argument("--config", type=Path, help="config file (key = value sections)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        if algo:
            p.add_argument("--algo", default="both", help="conventional, proposed, or both")
        if trials:
            p.add_argument("--trials", type=int, help="override trials per sweep cell")
        if jobs:
            p.add_argument("--jobs", type=int, default=1, help="worker processes for trials")
        if dataset:
            p.add_argument("--dataset", type=Path, help="run on a previously generated scenario file")

    common(sub.add_parser("gen", help="generate and write a scenario dataset"))
    common(sub.add_parser("run", help="run a single trial"), algo=True, dataset=True)
    common(sub.add_parser("bench", help="run an experiment sweep"), trials=True, jobs=True)
    common(sub.add_parser("map", help="run the room-mapping scenario"))
    return parser


def _load(args, default: ScenarioConfig | None = None):
    if args.config is not None:
        config, spec = load_config(args.config)
    else:
        config, spec = (default if default is not None else ScenarioConfig()), None
    if args.seed is not None:
        config = replace(config, seed=args.seed)
        if spec is not None:
            spec = replace(spec, base=config)
    return config, spec


def _fmt(x: float) -> str:
    return repr(float(x))


def cmd_gen(args) -> int:
    config, _ = _load(args)
    scenario, truth = generate_scenario(config)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "scenario.txt"
    write_scenario(path, scenario, truth)
    print(f"wrote {path} ({len(scenario.waypoints)} waypoints, {len(scenario.landmarks)} landmarks, "
          f"{truth.n_steps} control steps)")
    return 0


def cmd_run(args) -> int:
    config, _ = _load(args)
    algorithms = parse_algorithms(args.algo)
    if args.dataset is not None:
        scenario, truth = read_scenario(args.dataset, dt=config.dt)
    else:
        scenario, truth = generate_scenario(config)
    measurements = precompute_measurements(scenario, truth, config)
    args.out.mkdir(parents=True, exist_ok=True)

    any_ok = False
    for algo in algorithms:
        classifications: list = []
        result = run_trial(scenario, truth, config, algo, measurements, classification_sink=classifications)
        traj_lines = [TRAJECTORY_HEADER]
        for j in range(result.estimated.shape[0]):
            ex, ey, eth = result.estimated[j]
            tx, ty, tth = result.truth[j]
            traj_lines.append(
                f"{j},{_fmt(ex)},{_fmt(ey)},{_fmt(eth)},{_fmt(tx)},{_fmt(ty)},{_fmt(tth)},"
                f"{result.admitted_per_step[j]},{result.rejected_per_step[j]}"
            )
        (args.out / f"trajectory_{algo}.csv").write_text("\n".join(traj_lines) + "\n", encoding="utf-8")

        cls_lines = [CLASSIFICATION_HEADER]
        for j, step_classifications in enumerate(classifications):
            for c in step_classifications:
                cls_lines.append(f"{j},{c.landmark_id},{c.verdict.value},{_fmt(c.d_hat)},{_fmt(c.d_meas)}")
        (args.out / f"classifications_{algo}.csv").write_text("\n".join(cls_lines) + "\n", encoding="utf-8")

        if result.failed:
            print(f"{algo}: DIVERGED ({result.failure_reason}) after {result.control_steps} steps")
        else:
            any_ok = True
            print(f"{algo}: iae={result.iae:.6g} m^2 steps={result.control_steps} "
                  f"ms/step={result.ms_per_step:.4f} admitted={result.admitted_total} rejected={result.rejected_total}")
    return 0 if any_ok else 2


def cmd_bench(args) -> int:
    config, spec = _load(args)
    if spec is None:
        raise ConfigError("bench requires a config file with an [experiment] section")
    if args.trials is not None:
        spec = replace(spec, trials=args.trials)
    args.out.mkdir(parents=True, exist_ok=True)
    rows, summary = run_experiment(spec, jobs=args.jobs, out_dir=args.out, progress=True)
    print(f"wrote {args.out / 'results.csv'} and {args.out / 'summary.csv'}")
    print(f"{'param':>6} {'algorithm':>14} {'mean_iae':>12} {'std_iae':>12} {'mean_ms':>9}")
    for value, algo, mean, std, mean_ms in summary:
        print(f"{value:>6} {algo:>14} {mean:>12.4g} {std:>12.4g} {mean_ms:>9.4f}")
    if all(math.isnan(r.iae) for r in rows):
        print("every trial diverged", file=sys.stderr)
        return 2
    return 0


def cmd_map(args) -> int:
    mapping_defaults = ScenarioConfig(
        waypoints=8,
        landmarks=1,
        movers=0,
        area=(10.0, 8.0),
        robot_speed=1.0,
    )
    config, _ = _load(args, default=mapping_defaults)
    result = run_mapping(config)
    args.out.mkdir(parents=True, exist_ok=True)

    lines = ["landmark_id,kind,est_x,est_y,true_x,true_y"]
    for lid, kind, ex, ey, tx, ty in result.map_points:
        lines.append(f"{lid},{kind},{_fmt(ex)},{_fmt(ey)},{_fmt(tx)},{_fmt(ty)}")
    (args.out / "map_points.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    report = [
        f"wall_rmse_m {_fmt(result.wall_rmse)}",
        f"walls_mapped {result.walls_mapped}",
        f"walls_total {result.walls_total}",
        f"mover_points_in_map {result.mover_points_in_map}",
        f"trajectory_iae_m2 {_fmt(result.trial.iae)}",
        f"diverged {int(result.trial.failed)}",
    ]
    (args.out / "mapping_report.txt").write_text("\n".join(report) + "\n", encoding="utf-8")
    for line in report:
        print(line)
    return 2 if result.trial.failed else 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        handler = {"gen": cmd_gen, "run": cmd_run, "bench": cmd_bench, "map": cmd_map}[args.command]
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DynaslamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
