"""Rebuilds a benchmark report from the raw trace files in an output
directory, recomputing every statistic from the events alone. Running this
over a protocol directory and comparing with its report.json checks that the
emitted aggregates never drift from the trial data."""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .errors import CatalogError, MalformedTrace
from .goals import AssemblyCatalog
from .harness import (
    DEFAULT_GRID_DT_S,
    BenchmarkReport,
    GoalResult,
    TrialResult,
    curve_stats,
    emit_report,
)
from .model import satisfaction
from .simulator import read_trace, replay

_TRIAL_RE = re.compile(r"trial-(\d+)\.trace\.jsonl$")


def rebuild_report(out_dir: Path, catalog: AssemblyCatalog,
                   grid_dt_s: float | None = None,
                   write: bool = True) -> BenchmarkReport:
    out_dir = Path(out_dir)
    goal_dirs = sorted(p for p in out_dir.glob("goal-*") if p.is_dir())
    if not goal_dirs:
        raise CatalogError(f"no goal-*/ directories under {out_dir}")

    if grid_dt_s is None:
        report_path = out_dir / "report.json"
        if report_path.is_file():
            grid_dt_s = json.loads(report_path.read_text()).get(
                "grid_dt_s", DEFAULT_GRID_DT_S)
        else:
            grid_dt_s = DEFAULT_GRID_DT_S

    per_goal: dict[str, GoalResult] = {}
    classes = set()
    base_seed = 0
    config_hash = ""
    for goal_dir in goal_dirs:
        goal_id = goal_dir.name[len("goal-"):]
        goal = catalog.goal(goal_id)
        classes.add(goal.goal_class)
        trials = []
        for trace_path in sorted(goal_dir.glob("trial-*.trace.jsonl")):
            m = _TRIAL_RE.search(trace_path.name)
            if not m:
                continue
            repeat = int(m.group(1))
            trace = read_trace(trace_path, goal, catalog)
            if trace.repeat_index and trace.repeat_index != repeat:
                raise MalformedTrace(
                    f"{trace_path}: header repeat {trace.repeat_index} does "
                    f"not match filename")
            trace.repeat_index = repeat
            config_hash = trace.config_hash or config_hash
            if trace.events:
                curve = replay(trace, goal, catalog)
                final_pct = satisfaction(trace.final_state, goal).completion_pct
                total_time = trace.events[-1].t_s
            else:
                curve = [(0.0, 0.0)]
                final_pct = 0.0
                total_time = trace.planning_time_s
            trials.append(TrialResult(goal_id=goal_id, repeat_index=repeat,
                                      trace=trace, curve=curve,
                                      final_completion_pct=final_pct,
                                      total_time_s=total_time))
        trials.sort(key=lambda t: t.repeat_index)
        grid, mean, std, best_curve, best_idx = curve_stats(trials, grid_dt_s)
        per_goal[goal_id] = GoalResult(goal_id=goal_id, trials=trials, grid=grid,
                                       mean_curve=mean, std_band=std,
                                       best_curve=best_curve, best_trial=best_idx)

    if len(classes) != 1:
        raise CatalogError(f"directory mixes goal classes: {sorted(classes)}")
    results = [per_goal[g] for g in sorted(per_goal)]
    goal_means = [float(np.mean([t.final_completion_pct for t in r.trials]))
                  for r in results]
    goal_times = [float(np.mean([t.total_time_s for t in r.trials]))
                  for r in results]
    seeds = [t.trace.seed for r in results for t in r.trials if t.trace.seed]
    if seeds:
        base_seed = min(seeds) - 1

    report = BenchmarkReport(
        goal_class=classes.pop(),
        config_hash=config_hash,
        base_seed=base_seed,
        grid_dt_s=grid_dt_s,
        per_goal=per_goal,
        summary_mean_success_pct=float(np.mean(goal_means)),
        summary_mean_time_s=float(np.mean(goal_times)),
    )
    if write:
        emit_report(report, out_dir)
    return report
