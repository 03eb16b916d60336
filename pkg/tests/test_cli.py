import json

from ramp.cli import main
from ramp.goals import default_catalog_dir


def goal_path(goal_id):
    return str(default_catalog_dir() / "goals" / f"{goal_id}.xml")


class TestPlanCommand:
    def test_plan_writes_json(self, tmp_path, capsys):
        out = tmp_path / "plan.json"
        code = main(["plan", "--goal", goal_path("easy-1"), "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["goal_id"] == "easy-1"
        fastens = [a for a in doc["actions"] if a["name"] == "fasten"]
        assert len(fastens) == 3
        assert all("coarse_step" in a for a in doc["actions"])

    def test_plan_missing_goal_file_is_io_error(self, tmp_path, capsys):
        code = main(["plan", "--goal", str(tmp_path / "nope.xml"),
                     "--out", str(tmp_path / "p.json")])
        assert code == 2

    def test_unplannable_goal_is_validation_error(self, tmp_path, capsys):
        code = main(["plan", "--goal", goal_path("hard-1"),
                     "--out", str(tmp_path / "p.json")])
        assert code == 1


class TestRunCommand:
    def test_run_and_report_and_replay(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(["run", "--class", "easy", "--seed", "7",
                     "--out", str(out)])
        assert code == 0
        assert (out / "report.json").is_file()
        capsys.readouterr()

        trace = out / "goal-easy-1" / "trial-1.trace.jsonl"
        code = main(["replay", "--trace", str(trace),
                     "--goal", goal_path("easy-1")])
        assert code == 0
        captured = capsys.readouterr()
        assert captured.out.startswith("time_s,completion_pct")

        code = main(["report", "--in", str(out)])
        assert code == 0

    def test_env_var_catalog(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("RAMP_CATALOG", str(default_catalog_dir()))
        out = tmp_path / "plan.json"
        code = main(["plan", "--goal", goal_path("easy-2"), "--out", str(out)])
        assert code == 0

    def test_bad_catalog_dir_is_io_error(self, tmp_path, capsys):
        code = main(["run", "--class", "easy", "--catalog",
                     str(tmp_path / "missing"), "--out", str(tmp_path / "o")])
        assert code == 2

    def test_determinism_across_runs(self, tmp_path, capsys):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        for out in (out_a, out_b):
            code = main(["run", "--class", "easy", "--seed", "11",
                         "--out", str(out)])
            assert code == 0
        files_a = sorted(p.relative_to(out_a) for p in out_a.rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(out_b) for p in out_b.rglob("*") if p.is_file())
        assert files_a == files_b
        for rel in files_a:
            assert (out_a / rel).read_bytes() == (out_b / rel).read_bytes(), rel
