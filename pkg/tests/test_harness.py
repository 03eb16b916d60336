import math

import numpy as np
import pytest

from ramp.errors import GridError
from ramp.harness import (
    TrialResult,
    curve_stats,
    emit_report,
    report_as_dict,
    run_protocol,
)
from ramp.reporting import rebuild_report
from ramp.simulator import ExecutionTrace


def fake_trial(repeat, breakpoints, total_time):
    trace = ExecutionTrace(events=(), final_state=None, planning_time_s=1.0,
                           seed=repeat)
    return TrialResult(goal_id="g", repeat_index=repeat, trace=trace,
                       curve=breakpoints,
                       final_completion_pct=breakpoints[-1][1],
                       total_time_s=total_time)


class TestCurveStats:
    def test_identical_traces_zero_std(self):
        curve = [(0.0, 0.0), (10.0, 50.0), (20.0, 100.0)]
        trials = [fake_trial(i, curve, 25.0) for i in range(1, 6)]
        _grid, mean, std, best, _idx = curve_stats(trials, 1.0)
        assert all(s == 0.0 for s in std)
        assert best == mean

    def test_four_full_one_zero(self):
        full = [(0.0, 0.0), (5.0, 100.0)]
        zero = [(0.0, 0.0)]
        trials = [fake_trial(i, full, 10.0) for i in range(1, 5)]
        trials.append(fake_trial(5, zero, 10.0))
        _grid, mean, std, _best, best_idx = curve_stats(trials, 1.0)
        assert mean[-1] == pytest.approx(80.0)
        assert std[-1] == pytest.approx(40.0)  # population std
        assert best_idx == 1  # earliest of the tied full completions

    def test_row_count_is_grid_law(self):
        curve = [(0.0, 0.0), (3.0, 100.0)]
        trials = [fake_trial(i, curve, 7.3) for i in range(1, 6)]
        grid, mean, _std, _best, _idx = curve_stats(trials, 2.0)
        assert len(grid) == math.ceil(7.3 / 2.0) + 1
        assert len(mean) == len(grid)

    def test_fig_style_planning_delay(self):
        """Synthetic runs with a 180-200 s planning phase: the mean curve
        stays at zero until the first insertion after 180 s."""
        trials = []
        for i, plan_t in enumerate((180.0, 185.0, 190.0, 195.0, 200.0), start=1):
            curve = [(0.0, 0.0), (plan_t + 30.0, 50.0), (plan_t + 90.0, 100.0)]
            trials.append(fake_trial(i, curve, plan_t + 100.0))
        grid, mean, _std, _best, _idx = curve_stats(trials, 1.0)
        for t, value in zip(grid, mean):
            if t < 180.0:
                assert value == 0.0
        assert mean[-1] == 100.0

    def test_nonpositive_grid_rejected(self):
        trials = [fake_trial(i, [(0.0, 0.0)], 1.0) for i in range(1, 6)]
        with pytest.raises(GridError):
            curve_stats(trials, 0.0)

    def test_monotone_curves_within_bounds(self):
        curve = [(0.0, 0.0), (2.0, 33.3), (4.0, 66.7), (6.0, 100.0)]
        trials = [fake_trial(i, curve, 8.0) for i in range(1, 6)]
        _grid, mean, _std, best, _idx = curve_stats(trials, 0.5)
        assert mean == sorted(mean)
        assert all(0.0 <= v <= 100.0 for v in mean)
        assert best == sorted(best)


@pytest.fixture(scope="module")
def easy_run(catalog, coarse_desc, fine_desc, baseline_config, tmp_path_factory):
    out = tmp_path_factory.mktemp("protocol")
    report = run_protocol("easy", catalog, (coarse_desc, fine_desc), None,
                          baseline_config, out)
    return report, out


class TestProtocol:
    def test_five_trials_per_goal(self, easy_run):
        report, _out = easy_run
        assert set(report.per_goal) == {"easy-1", "easy-2", "easy-3"}
        for res in report.per_goal.values():
            assert [t.repeat_index for t in res.trials] == [1, 2, 3, 4, 5]

    def test_one_config_hash_everywhere(self, easy_run):
        report, _out = easy_run
        for res in report.per_goal.values():
            for trial in res.trials:
                assert trial.trace.config_hash == report.config_hash

    def test_per_trial_seeds(self, easy_run, baseline_config):
        report, _out = easy_run
        for res in report.per_goal.values():
            seeds = [t.trace.seed for t in res.trials]
            assert seeds == [baseline_config.seed + k for k in range(1, 6)]

    def test_summary_is_mean_of_goal_means(self, easy_run):
        report, _out = easy_run
        goal_means = [np.mean([t.final_completion_pct for t in res.trials])
                      for res in report.per_goal.values()]
        assert report.summary_mean_success_pct == pytest.approx(
            float(np.mean(goal_means)), abs=1e-12)

    def test_best_trial_rule(self, easy_run):
        report, _out = easy_run
        for res in report.per_goal.values():
            best = next(t for t in res.trials if t.repeat_index == res.best_trial)
            for other in res.trials:
                assert (-best.final_completion_pct, best.total_time_s) <= \
                    (-other.final_completion_pct, other.total_time_s)

    def test_output_files_exist(self, easy_run):
        _report, out = easy_run
        assert (out / "report.json").is_file()
        assert (out / "summary.csv").is_file()
        for goal_id in ("easy-1", "easy-2", "easy-3"):
            assert (out / f"curve-{goal_id}.csv").is_file()
            for k in range(1, 6):
                assert (out / f"goal-{goal_id}" / f"trial-{k}.trace.jsonl").is_file()

    def test_curve_csv_row_count(self, easy_run):
        report, out = easy_run
        res = report.per_goal["easy-1"]
        max_time = max(t.total_time_s for t in res.trials)
        rows = (out / "curve-easy-1.csv").read_text().splitlines()
        assert len(rows) == 1 + math.ceil(max_time / report.grid_dt_s) + 1

    def test_emit_deterministic(self, easy_run, tmp_path):
        report, out = easy_run
        emit_report(report, tmp_path)
        for name in ("report.json", "summary.csv", "curve-easy-1.csv"):
            assert (tmp_path / name).read_bytes() == (out / name).read_bytes()

    def test_unplannable_class_degrades_to_zero(self, catalog, coarse_desc,
                                                fine_desc, baseline_config,
                                                tmp_path):
        report = run_protocol("medium", catalog, (coarse_desc, fine_desc), None,
                              baseline_config, tmp_path)
        assert report.summary_mean_success_pct == 0.0
        for res in report.per_goal.values():
            assert len(res.trials) == 5
            assert all(t.plan_failed for t in res.trials)

    def test_parallel_goals_byte_identical(self, catalog, coarse_desc, fine_desc,
                                           baseline_config, easy_run, tmp_path):
        _report, out = easy_run
        run_protocol("easy", catalog, (coarse_desc, fine_desc), None,
                     baseline_config, tmp_path, parallel_goals=True)
        for path in sorted(out.rglob("*")):
            if path.is_file():
                rel = path.relative_to(out)
                assert (tmp_path / rel).read_bytes() == path.read_bytes(), rel


class TestAggregationLaw:
    def test_rebuild_matches_report(self, easy_run, catalog):
        report, out = easy_run
        rebuilt = rebuild_report(out, catalog, write=False)
        assert math.isclose(rebuilt.summary_mean_success_pct,
                            report.summary_mean_success_pct, rel_tol=1e-9)
        assert math.isclose(rebuilt.summary_mean_time_s,
                            report.summary_mean_time_s, rel_tol=1e-9)
        a = report_as_dict(rebuilt)
        b = report_as_dict(report)
        assert a["goals"].keys() == b["goals"].keys()
        for goal_id in a["goals"]:
            assert math.isclose(a["goals"][goal_id]["mean_final_pct"],
                                b["goals"][goal_id]["mean_final_pct"],
                                rel_tol=1e-9)
