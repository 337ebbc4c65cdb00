import json

import pytest
from click.testing import CliRunner

from tdsched.cli import main
from tdsched.model import problem_to_json

from conftest import make_e1, make_e2
from solomon_fixtures import synth_solomon


@pytest.fixture
def runner():
    return CliRunner()


def write_problem(tmp_path, problem, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(problem_to_json(problem)))
    return path


class TestSolve:
    def test_ddd_solves_the_spiky_instance(self, runner, tmp_path):
        path = write_problem(tmp_path, make_e1())
        result = runner.invoke(main, ["solve", str(path), "--algo", "ddd"])
        assert result.exit_code == 0, result.output
        out = json.loads(result.output)
        assert out["status"] == "ok"
        assert out["t"] == [2, 4]
        assert out["completion"] == 5
        assert out["stats"]["iterations"] == 2

    def test_full_expansion_agrees(self, runner, tmp_path):
        path = write_problem(tmp_path, make_e1())
        result = runner.invoke(main, ["solve", str(path), "--algo", "ten-full"])
        assert result.exit_code == 0
        assert json.loads(result.output)["completion"] == 5

    def test_greedy_on_monotone_instance(self, runner, tmp_path):
        path = write_problem(tmp_path, make_e2(capacity=10))
        result = runner.invoke(main, ["solve", str(path), "--algo", "greedy"])
        assert result.exit_code == 0
        assert json.loads(result.output)["completion"] == 3

    def test_infeasible_exit_code_and_status(self, runner, tmp_path):
        path = write_problem(tmp_path, make_e1(capacity=1))
        result = runner.invoke(main, ["solve", str(path)])
        assert result.exit_code == 1
        assert json.loads(result.output)["status"] == "infeasible"

    def test_replen_solver_rejects_plain_problems(self, runner, tmp_path):
        path = write_problem(tmp_path, make_e1())
        result = runner.invoke(main, ["solve", str(path), "--algo", "ddd-replen"])
        assert result.exit_code == 2

    def test_bad_algo_is_usage_error(self, runner, tmp_path):
        path = write_problem(tmp_path, make_e1())
        result = runner.invoke(main, ["solve", str(path), "--algo", "bogus"])
        assert result.exit_code == 2

    def test_output_file(self, runner, tmp_path):
        path = write_problem(tmp_path, make_e2())
        out = tmp_path / "schedule.json"
        result = runner.invoke(main, ["solve", str(path), "-o", str(out)])
        assert result.exit_code == 0
        saved = json.loads(out.read_text())
        assert saved["completion"] == 5
        assert saved["y"] == [1, 0]


class TestValidate:
    def test_small_run_passes(self, runner):
        result = runner.invoke(main, ["validate", "--count", "40", "--seed", "7"])
        assert result.exit_code == 0, result.output
        assert "plain: 40/40 match" in result.output
        assert "replen: 40/40 match" in result.output

    def test_seed_reproducibility(self, runner):
        a = runner.invoke(main, ["validate", "--count", "15", "--seed", "3",
                                 "--kind", "plain"])
        b = runner.invoke(main, ["validate", "--count", "15", "--seed", "3",
                                 "--kind", "plain"])
        assert a.output == b.output


@pytest.fixture(scope="module")
def tiny_solomon(tmp_path_factory):
    path = tmp_path_factory.mktemp("solomon") / "t101.txt"
    path.write_text(synth_solomon("T101", 5, style="c1", box=20, horizon=300, seed=4))
    return path


class TestGenerateAndBench:
    def test_generate_single_variant(self, runner, tiny_solomon, tmp_path):
        out = tmp_path / "inst.json"
        result = runner.invoke(main, [
            "generate", str(tiny_solomon), "--variant", "depot",
            "--output", str(out), "--config", str(_config(tmp_path))])
        assert result.exit_code == 0, result.output
        obj = json.loads(out.read_text())
        assert obj["variant"] == "depot"
        assert len(obj["nodes"]) == 6

    def test_generate_deterministic(self, runner, tiny_solomon, tmp_path):
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        cfg = str(_config(tmp_path))
        r1 = runner.invoke(main, ["generate", str(tiny_solomon), "--variant", "none",
                                  "--output", str(out1), "--config", cfg])
        r2 = runner.invoke(main, ["generate", str(tiny_solomon), "--variant", "none",
                                  "--output", str(out2), "--config", cfg])
        assert r1.exit_code == 0 and r2.exit_code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_bad_variant_usage_error(self, runner, tiny_solomon):
        result = runner.invoke(main, ["generate", str(tiny_solomon),
                                      "--variant", "depot+9"])
        assert result.exit_code == 2

    def test_bench_and_report(self, runner, tiny_solomon, tmp_path):
        inst = tmp_path / "inst.json"
        r = runner.invoke(main, ["generate", str(tiny_solomon), "--variant", "depot",
                                 "--output", str(inst), "--config", str(_config(tmp_path))])
        assert r.exit_code == 0, r.output
        csv_path = tmp_path / "bench.csv"
        r = runner.invoke(main, ["bench", str(inst), "--evaluator", "ddd",
                                 "--evaluator", "ddd-pl", "--output", str(csv_path)])
        assert r.exit_code == 0, r.output
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0].startswith("Instance,Solver,Charging")
        assert len(lines) >= 3  # one row per evaluator
        report_dir = tmp_path / "report"
        r = runner.invoke(main, ["report", str(csv_path), str(inst),
                                 "--output", str(report_dir)])
        assert r.exit_code == 0, r.output
        assert (report_dir / "report.csv").exists()
        assert (report_dir / "vehicles.png").exists()
        assert (report_dir / "inst_congestion.png").exists()
        assert (report_dir / "inst_map.png").exists()


def _config(tmp_path):
    path = tmp_path / "gen_config.json"
    if not path.exists():
        path.write_text(json.dumps({"sample_count": 6, "fit_breakpoints": 8}))
    return path
