"""Command-line client: output formats, exit codes, artifact writing."""

import json
from pathlib import Path

import pytest

from softltlf.cli import main
from softltlf.trajectory import run_experiment

TRACE_ELEMS = [0.1, 0.4, 0.5, 0.2, 0.9, 0.3]


@pytest.fixture()
def trace_json(tmp_path) -> str:
    path = tmp_path / "trace.json"
    path.write_text(json.dumps({"dims": [3, 2], "elems": TRACE_ELEMS}))
    return str(path)


@pytest.fixture()
def trace_csv(tmp_path) -> str:
    path = tmp_path / "trace.csv"
    path.write_text("f0,f1\n0.1,0.4\n0.5,0.2\n0.9,0.3\n")
    return str(path)


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestEvalCommand:
    def test_json_trace(self, capsys, trace_json):
        code, out, _ = run(capsys, "eval", "F (f0 <= f1)", trace_json)
        assert code == 0
        assert json.loads(out) == {"dims": [], "elems": [True]}

    def test_csv_trace_matches_json(self, capsys, trace_json, trace_csv):
        _, from_json, _ = run(capsys, "eval", "G (f0 <= f1)", trace_json)
        _, from_csv, _ = run(capsys, "eval", "G (f0 <= f1)", trace_csv)
        assert from_json == from_csv

    def test_formula_from_file(self, capsys, tmp_path, trace_json):
        formula = tmp_path / "formula.ltlf"
        formula.write_text("F (f0 <= f1)\n")
        code, out, _ = run(capsys, "eval", f"@{formula}", trace_json)
        assert code == 0
        assert json.loads(out)["elems"] == [True]

    def test_base_case_past_end(self, capsys, trace_json):
        code, out, _ = run(capsys, "eval", "f0 <= f1", trace_json, "--t", "3")
        assert code == 0
        assert json.loads(out)["elems"] == [False]


class TestExitCodes:
    def test_parse_error_is_2(self, capsys, trace_json):
        code, _, err = run(capsys, "eval", "G (f0 <=", trace_json)
        assert code == 2
        assert "parse" in err

    def test_bounds_error_is_3(self, capsys, trace_json):
        code, _, err = run(capsys, "eval", "f7 <= f0", trace_json)
        assert code == 3

    def test_missing_trace_file_is_3(self, capsys, tmp_path):
        code, _, err = run(capsys, "eval", "f0 <= f0", str(tmp_path / "nope.json"))
        assert code == 3

    def test_missing_formula_file_is_3(self, capsys, trace_json, tmp_path):
        code, _, _ = run(capsys, "eval", f"@{tmp_path}/nope.ltlf", trace_json)
        assert code == 3

    def test_unreachable_server_is_1(self, capsys, trace_json):
        code, _, err = run(
            capsys, "--server", "http://127.0.0.1:1", "eval", "f0 <= f1", trace_json
        )
        assert code == 1
        assert "cannot reach" in err

    def test_server_flag_works_after_the_subcommand(self, capsys, trace_json):
        code, _, err = run(
            capsys, "eval", "f0 <= f1", trace_json, "--server", "http://127.0.0.1:1"
        )
        assert code == 1
        assert "cannot reach" in err

    def test_gradcheck_failure_is_5(self, capsys, trace_json):
        code, out, _ = run(
            capsys,
            "gradcheck",
            "F (f0 <= f1)",
            trace_json,
            "--gamma",
            "0.05",
            "--corrupt-index",
            "2",
        )
        assert code == 5
        report = json.loads(out)
        assert report["passed"] is False
        assert report["worst_index"] == [1, 0]


class TestLossAndGradCommands:
    def test_loss_value(self, capsys, trace_json):
        code, out, _ = run(capsys, "loss", "F (f0 <= f1)", trace_json, "--gamma", "0.05")
        assert code == 0
        body = json.loads(out)
        assert body["dims"] == []
        assert isinstance(body["elems"][0], float)

    def test_gamma_zero_hard_loss(self, capsys, trace_json):
        _, out, _ = run(capsys, "loss", "F (f0 <= f1)", trace_json, "--gamma", "0")
        assert json.loads(out)["elems"] == [0.0]

    def test_grad_shape_matches_trace(self, capsys, trace_json):
        _, out, _ = run(capsys, "grad", "G (f0 <= 0.3)", trace_json, "--gamma", "0.05")
        assert json.loads(out)["dims"] == [3, 2]

    def test_naive_agrees_with_stable_on_benign_input(self, capsys, trace_json):
        _, stable, _ = run(capsys, "loss", "F (f0 <= f1)", trace_json, "--gamma", "0.5")
        _, naive, _ = run(
            capsys, "loss", "F (f0 <= f1)", trace_json, "--gamma", "0.5", "--naive"
        )
        a = json.loads(stable)["elems"][0]
        b = json.loads(naive)["elems"][0]
        assert a == pytest.approx(b, rel=1e-9)

    def test_naive_overflow_is_divergence_4(self, capsys, tmp_path):
        path = tmp_path / "big.json"
        path.write_text(json.dumps({"dims": [1, 1], "elems": [100.0]}))
        code, _, err = run(
            capsys, "loss", "f0 <= 0", str(path), "--gamma", "0.001", "--naive"
        )
        assert code == 4
        assert "divergence" in err


class TestGradcheckCommand:
    def test_pass_is_0(self, capsys, trace_json):
        code, out, _ = run(capsys, "gradcheck", "F (f0 <= f1)", trace_json, "--gamma", "0.05")
        assert code == 0
        assert json.loads(out)["passed"] is True

    def test_tolerance_monotonicity(self, capsys, trace_json):
        # anything passing a tight tolerance passes a looser one
        tight, _, _ = run(
            capsys, "gradcheck", "G (f0 <= 0.3)", trace_json,
            "--gamma", "0.005", "--tolerance", "1e-6",
        )
        loose, _, _ = run(
            capsys, "gradcheck", "G (f0 <= 0.3)", trace_json,
            "--gamma", "0.005", "--tolerance", "1e-2",
        )
        if tight == 0:
            assert loose == 0


class TestExperimentCommand:
    def test_artifacts_match_library_run(self, capsys, tmp_path):
        out_dir = tmp_path / "cli_run"
        code, out, _ = run(
            capsys, "experiment", "until", "--steps", "40", "--out", str(out_dir)
        )
        assert code == 0
        verdict = json.loads(out)
        assert "clauses" in verdict

        lib_dir = tmp_path / "lib_run"
        run_experiment("until", seed=0, steps=40, out_dir=lib_dir)
        for name in ("config.json", "verdict.json", "trajectory.csv", "loss_history.csv"):
            assert (out_dir / name).read_bytes() == (lib_dir / name).read_bytes(), name

    def test_unknown_experiment_is_3(self, capsys):
        code, _, err = run(capsys, "experiment", "warp", "--steps", "5")
        assert code == 3

    def test_flag_overrides_land_in_config(self, capsys, tmp_path):
        out_dir = tmp_path / "run"
        run(
            capsys, "experiment", "until", "--steps", "10",
            "--lr", "0.002", "--gamma", "0.01", "--eta", "2.0",
            "--seed", "7", "--out", str(out_dir),
        )
        config = json.loads((out_dir / "config.json").read_text())
        assert config["steps"] == 10
        assert config["learning_rate"] == 0.002
        assert config["gamma"] == 0.01
        assert config["ltlf_weight"] == 2.0
        assert config["seed"] == 7


class TestOptimizeCommand:
    @pytest.fixture()
    def trajectory_file(self, tmp_path) -> str:
        path = tmp_path / "traj.json"
        path.write_text(json.dumps({"positions": [[i / 9, i / 9] for i in range(10)]}))
        return str(path)

    def test_stdout_result(self, capsys, trajectory_file):
        code, out, _ = run(
            capsys, "optimize", "F (dist(0.3, 0.8) <= 0)", trajectory_file,
            "--steps", "20",
        )
        assert code == 0
        body = json.loads(out)
        assert len(body["history"]) == 20
        assert len(body["trajectory"]["positions"]) == 10

    def test_out_dir_csvs(self, capsys, tmp_path, trajectory_file):
        out_dir = tmp_path / "opt"
        code, out, _ = run(
            capsys, "optimize", "F (dist(0.3, 0.8) <= 0)", trajectory_file,
            "--steps", "20", "--out", str(out_dir),
        )
        assert code == 0
        assert out == ""
        lines = (out_dir / "trajectory.csv").read_text().splitlines()
        assert lines[0] == "t,x,y"
        assert len(lines) == 11
        history = (out_dir / "loss_history.csv").read_text().splitlines()
        assert history[0] == "step,total,ltlf,dynamical"
        assert len(history) == 21

    def test_malformed_trajectory_file_is_3(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{}")
        code, _, _ = run(capsys, "optimize", "G (0 <= x)", str(path))
        assert code == 3

    def test_divergence_is_4(self, capsys, tmp_path):
        path = tmp_path / "traj.json"
        path.write_text(
            json.dumps(
                {
                    "positions": [[i / 4, 0.1] for i in range(5)],
                    "velocities": [[0.3, 0.0]] * 4,
                }
            )
        )
        code, _, err = run(
            capsys, "optimize", "G (0 <= vx)", str(path),
            "--dyn-weight", "1.0", "--steps", "400", "--lr", "1e8",
        )
        assert code == 4


class TestSelftestCommand:
    def test_reports_every_check(self, capsys):
        code, out, _ = run(capsys, "selftest", "--instances", "5")
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 5
        assert all(line.startswith("PASS") for line in lines)
