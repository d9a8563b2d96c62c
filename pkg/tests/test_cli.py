import json

import numpy as np
import pytest

from pcgrl.cli import main
from pcgrl.levels import Level, serialize_level


@pytest.fixture
def sokoban_level_file(tmp_path):
    path = tmp_path / "level.json"
    grid = np.array([[2, 3, 4, 1]], dtype=np.int16)
    path.write_text(serialize_level(Level(grid), "sokoban"))
    return path


class TestExitCodes:
    def test_missing_subcommand_is_usage_error(self, capsys):
        assert main([]) == 1

    def test_unknown_flag_is_usage_error(self):
        assert main(["render", "--bogus"]) == 1

    def test_missing_file_is_runtime_error(self, tmp_path):
        assert main(["render", "--level", str(tmp_path / "missing.json")]) == 2

    def test_malformed_level_is_runtime_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        assert main(["render", "--level", str(bad)]) == 2


class TestRender:
    def test_renders_glyphs(self, sokoban_level_file, capsys):
        assert main(["render", "--level", str(sokoban_level_file)]) == 0
        assert capsys.readouterr().out.strip() == "@$*#"


class TestSolve:
    def test_prints_solution(self, sokoban_level_file, capsys):
        assert main(["solve", "--level", str(sokoban_level_file)]) == 0
        out = capsys.readouterr().out
        assert "length=1" in out and "moves=R" in out and "nodes=" in out

    def test_rejects_non_sokoban(self, tmp_path, capsys):
        path = tmp_path / "binary.json"
        path.write_text(serialize_level(Level(np.zeros((2, 2), dtype=np.int16)), "binary"))
        assert main(["solve", "--level", str(path)]) == 1

    def test_unsolvable_reports_cleanly(self, tmp_path, capsys):
        grid = np.array([[3, 0, 2, 0, 4]], dtype=np.int16)  # crate in corner
        path = tmp_path / "dead.json"
        path.write_text(serialize_level(Level(grid), "sokoban"))
        assert main(["solve", "--level", str(path)]) == 0
        assert "no solution" in capsys.readouterr().out


class TestTrainEvalGenerate:
    def test_tiny_pipeline(self, tmp_path, capsys):
        policy_path = tmp_path / "policy.json"
        config_path = tmp_path / "env.json"
        config_path.write_text(
            json.dumps(
                {
                    "problem": {"name": "binary", "width": 4, "height": 4},
                    "rep": "narrow",
                    "change_percentage": 0.2,
                }
            )
        )
        code = main(
            [
                "train",
                "--config", str(config_path),
                "--out", str(policy_path),
                "--steps", "256",
                "--seed", "1",
                "--hidden", "8",
                "--n-envs", "2",
                "--log", str(tmp_path / "log.csv"),
            ]
        )
        assert code == 0
        doc = json.loads(policy_path.read_text())
        assert set(doc) == {"arch", "layers", "rep", "problem"}
        assert (tmp_path / "log.csv").read_text().startswith("steps,")

        report_path = tmp_path / "report.csv"
        code = main(
            [
                "eval",
                "--policy", str(policy_path),
                "--pct-grid", "0:1:0.5",
                "--n", "3",
                "--seed", "2",
                "--out", str(report_path),
            ]
        )
        assert code == 0
        lines = report_path.read_text().strip().splitlines()
        assert lines[0] == "policy,pct,n,success_rate,mean_changed,std_changed,start_solved"
        assert len(lines) == 4  # pct 0, 0.5, 1.0

        gen_dir = tmp_path / "out"
        code = main(
            [
                "generate",
                "--policy", str(policy_path),
                "--pct", "1.0",
                "--n", "2",
                "--seed", "3",
                "--out", str(gen_dir),
            ]
        )
        assert code == 0
        assert (gen_dir / "summary.json").exists()
        assert (gen_dir / "final_001.json").exists()

    def test_eval_random_needs_env_spec(self, tmp_path):
        assert main(["eval", "--random", "--out", str(tmp_path / "r.csv")]) == 1

    def test_eval_random_with_problem(self, tmp_path):
        code = main(
            [
                "eval",
                "--random",
                "--problem", "sokoban",
                "--rep", "wide",
                "--pct-grid", "0.2",
                "--n", "2",
                "--seed", "0",
                "--out", str(tmp_path / "r.csv"),
            ]
        )
        assert code == 0

    def test_bad_pct_grid(self, tmp_path):
        assert (
            main(
                [
                    "eval", "--random", "--problem", "binary", "--rep", "narrow",
                    "--pct-grid", "0:1", "--n", "2", "--out", str(tmp_path / "r.csv"),
                ]
            )
            == 1
        )
