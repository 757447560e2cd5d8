import subprocess
import sys

import pytest

BASE_CFG = """
[scenario]
waypoints = 6
landmarks = 5
movers = 2
area_width = 50
area_height = 50
seed = 13
"""

BENCH_CFG = BASE_CFG + """
[experiment]
kind = vary_movers
values = 0,2
trials = 2
algorithms = both
"""


def cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "dynaslam.cli", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "bench.cfg"
    path.write_text(BENCH_CFG)
    return path


class TestGen:
    def test_writes_scenario(self, tmp_path, cfg_file):
        out = tmp_path / "out"
        proc = cli("gen", "--config", str(cfg_file), "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        text = (out / "scenario.txt").read_text()
        assert text.startswith("dynaslam-scenario v1\n")
        assert " D " in text  # movers serialized

    def test_seed_override_changes_output(self, tmp_path, cfg_file):
        a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
        cli("gen", "--config", str(cfg_file), "--out", str(a))
        cli("gen", "--config", str(cfg_file), "--out", str(b), "--seed", "14")
        cli("gen", "--config", str(cfg_file), "--out", str(c), "--seed", "13")
        sa = (a / "scenario.txt").read_bytes()
        sb = (b / "scenario.txt").read_bytes()
        sc = (c / "scenario.txt").read_bytes()
        assert sa != sb
        assert sa == sc


class TestRun:
    def test_writes_trajectories_and_classifications(self, tmp_path, cfg_file):
        out = tmp_path / "out"
        proc = cli("run", "--config", str(cfg_file), "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        for algo in ("conventional", "proposed"):
            traj = (out / f"trajectory_{algo}.csv").read_text().splitlines()
            assert traj[0] == "step,est_x,est_y,est_theta,true_x,true_y,true_theta,admitted,rejected"
            assert len(traj) > 10
            cls = (out / f"classifications_{algo}.csv").read_text().splitlines()
            assert cls[0] == "step,landmark_id,verdict,d_hat,d_meas"
        assert "proposed" in proc.stdout

    def test_run_from_dataset_matches_generated(self, tmp_path, cfg_file):
        gen_out = tmp_path / "gen"
        cli("gen", "--config", str(cfg_file), "--out", str(gen_out))
        direct = tmp_path / "direct"
        via_file = tmp_path / "via_file"
        p1 = cli("run", "--config", str(cfg_file), "--out", str(direct), "--algo", "proposed")
        p2 = cli(
            "run", "--config", str(cfg_file), "--out", str(via_file), "--algo", "proposed",
            "--dataset", str(gen_out / "scenario.txt"),
        )
        assert p1.returncode == 0 and p2.returncode == 0
        assert (direct / "trajectory_proposed.csv").read_bytes() == (
            via_file / "trajectory_proposed.csv"
        ).read_bytes()


class TestBench:
    def test_results_and_summary(self, tmp_path, cfg_file):
        out = tmp_path / "out"
        proc = cli("bench", "--config", str(cfg_file), "--out", str(out), "--jobs", "2")
        assert proc.returncode == 0, proc.stderr
        results = (out / "results.csv").read_text().splitlines()
        assert results[0] == "experiment,param_value,trial,seed,algorithm,iae,steps,ms_per_step,admitted,rejected"
        assert len(results) == 1 + 2 * 2 * 2
        assert (out / "summary.csv").exists()

    def test_trials_override(self, tmp_path, cfg_file):
        out = tmp_path / "out"
        cli("bench", "--config", str(cfg_file), "--out", str(out), "--trials", "1")
        results = (out / "results.csv").read_text().splitlines()
        assert len(results) == 1 + 2 * 1 * 2

    def test_requires_experiment_section(self, tmp_path):
        path = tmp_path / "plain.cfg"
        path.write_text(BASE_CFG)
        proc = cli("bench", "--config", str(path), "--out", str(tmp_path / "o"))
        assert proc.returncode == 1
        assert "experiment" in proc.stderr


class TestMapCommand:
    def test_map_outputs(self, tmp_path):
        out = tmp_path / "out"
        proc = cli("map", "--seed", "2", "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        assert "wall_rmse_m" in proc.stdout
        points = (out / "map_points.csv").read_text().splitlines()
        assert points[0] == "landmark_id,kind,est_x,est_y,true_x,true_y"
        report = (out / "mapping_report.txt").read_text()
        assert "mover_points_in_map" in report


class TestErrors:
    def test_bad_config_exits_one(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[scenario]\nbogus_key = 3\n")
        proc = cli("gen", "--config", str(path), "--out", str(tmp_path / "o"))
        assert proc.returncode == 1
        assert "bogus_key" in proc.stderr

    def test_bad_flag_exits_one(self):
        proc = cli("run", "--algo", "wizardry")
        assert proc.returncode == 1

    def test_version(self):
        proc = cli("--version")
        assert proc.returncode == 0
        assert "dynaslam" in proc.stdout
