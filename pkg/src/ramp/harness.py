"""The evaluation protocol: five consecutive repeats per assembly with one
config for the whole class, completion-vs-time curves with best / mean /
standard deviation, and deterministic report files.

Per-trial seeds are config.seed + repeat_index (1..5), so repeats differ
stochastically while the class run stays reproducible. Planning runs once
per trial and its (possibly overridden) wall time is charged to the trial.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .action_language import SystemDescription
from .errors import GridError, IOErrorWrapper, NoPlan, ProtocolError, RefinementFailed
from .goals import AssemblyCatalog
from .instance import BridgeMap
from .model import GoalConfiguration
from .planning import FinePlan, plan, plan_to_json
from .simulator import ExecutionTrace, SimConfig, execute, replay, write_trace

REPEATS = 5
DEFAULT_GRID_DT_S = 1.0


@dataclass
class TrialResult:
    goal_id: str
    repeat_index: int
    trace: ExecutionTrace
    curve: list[tuple[float, float]]
    final_completion_pct: float
    total_time_s: float
    plan_failed: str | None = None  # error code when planning failed


@dataclass
class GoalResult:
    goal_id: str
    trials: list[TrialResult]
    grid: list[float]
    mean_curve: list[float]
    std_band: list[float]
    best_curve: list[float]
    best_trial: int  # repeat index of the best trial


@dataclass
class BenchmarkReport:
    goal_class: str
    config_hash: str
    base_seed: int
    grid_dt_s: float
    per_goal: dict[str, GoalResult]
    summary_mean_success_pct: float
    summary_mean_time_s: float


def curve_stats(trials: list[TrialResult], grid_dt_s: float):
    """Sample the five completion step functions on a shared time grid and
    return (grid, mean, population std, best curve, best repeat index)."""
    if grid_dt_s <= 0:
        raise GridError(f"grid_dt_s must be positive, got {grid_dt_s}")
    if len(trials) != REPEATS:
        raise ProtocolError(f"expected {REPEATS} trials, got {len(trials)}")
    max_time = max(t.total_time_s for t in trials)
    n_rows = math.ceil(max_time / grid_dt_s) + 1
    grid = [i * grid_dt_s for i in range(n_rows)]

    sampled = np.zeros((len(trials), n_rows))
    for row, trial in enumerate(trials):
        times = [bp[0] for bp in trial.curve]
        values = [bp[1] for bp in trial.curve]
        idx = np.searchsorted(times, grid, side="right") - 1
        idx = np.clip(idx, 0, len(values) - 1)
        sampled[row] = np.asarray(values)[idx]

    mean = sampled.mean(axis=0)
    std = sampled.std(axis=0)  # population
    best = min(trials, key=lambda t: (-t.final_completion_pct, t.total_time_s,
                                      t.repeat_index))
    best_row = trials.index(best)
    return grid, mean.tolist(), std.tolist(), sampled[best_row].tolist(), best.repeat_index


def _run_goal(goal: GoalConfiguration, catalog: AssemblyCatalog,
              coarse_desc: SystemDescription, fine_desc: SystemDescription,
              bridge: BridgeMap | None, config: SimConfig, out_dir: Path,
              grid_dt_s: float) -> GoalResult:
    goal_dir = out_dir / f"goal-{goal.goal_id}"
    goal_dir.mkdir(parents=True, exist_ok=True)
    trials: list[TrialResult] = []
    plan_written = False

    for repeat in range(1, REPEATS + 1):
        trial_seed = config.seed + repeat
        trial_config = config.with_seed(trial_seed)
        fine_plan: FinePlan | None = None
        instance = None
        plan_failed = None
        t_plan = time.perf_counter()
        try:
            fine_plan, instance = plan(goal, catalog, coarse_desc, fine_desc, bridge)
        except (NoPlan, RefinementFailed) as exc:
            plan_failed = exc.code
        plan_wall = time.perf_counter() - t_plan

        if fine_plan is None:
            planning_time = config.planning_time_override_s or max(plan_wall, 1e-9)
            trace = ExecutionTrace(events=(), final_state=None,
                                   planning_time_s=planning_time,
                                   seed=trial_seed,
                                   config_hash=config.content_hash(),
                                   plan_hash="", goal_id=goal.goal_id,
                                   repeat_index=repeat)
            curve = [(0.0, 0.0)]
            trial = TrialResult(goal_id=goal.goal_id, repeat_index=repeat,
                                trace=trace, curve=curve,
                                final_completion_pct=0.0,
                                total_time_s=planning_time,
                                plan_failed=plan_failed)
        else:
            if not plan_written:
                (goal_dir / "plan.json").write_bytes(plan_to_json(
                    fine_plan,
                    planning_time_override_s=config.planning_time_override_s))
                plan_written = True
            trace = execute(fine_plan, goal, catalog, trial_config,
                            fine_desc=fine_desc, instance=instance)
            trace.repeat_index = repeat
            curve = replay(trace, goal, catalog)
            from .model import satisfaction
            final_pct = satisfaction(trace.final_state, goal).completion_pct
            trial = TrialResult(goal_id=goal.goal_id, repeat_index=repeat,
                                trace=trace, curve=curve,
                                final_completion_pct=final_pct,
                                total_time_s=trace.events[-1].t_s)
        write_trace(trial.trace, goal_dir / f"trial-{repeat}.trace.jsonl")
        trials.append(trial)

    grid, mean, std, best_curve, best_idx = curve_stats(trials, grid_dt_s)
    return GoalResult(goal_id=goal.goal_id, trials=trials, grid=grid,
                      mean_curve=mean, std_band=std, best_curve=best_curve,
                      best_trial=best_idx)


def run_protocol(goal_class: str, catalog: AssemblyCatalog,
                 domains: tuple[SystemDescription, SystemDescription],
                 bridge: BridgeMap | None, config: SimConfig,
                 out_dir: str | Path, *, grid_dt_s: float = DEFAULT_GRID_DT_S,
                 parallel_goals: bool = False) -> BenchmarkReport:
    """Run the full protocol for one class: each of its three goals, five
    consecutive trials each, all under one config (hash-stamped on every
    trial). An unplannable goal contributes five 0%-completion trials."""
    config.validate()
    coarse_desc, fine_desc = domains
    goals = sorted(catalog.goals_in_class(goal_class), key=lambda g: g.goal_id)
    if not goals:
        raise ProtocolError(f"catalog has no goals in class {goal_class!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def job(goal):
        return _run_goal(goal, catalog, coarse_desc, fine_desc, bridge,
                         config, out_dir, grid_dt_s)

    if parallel_goals:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=len(goals)) as pool:
            results = list(pool.map(job, goals))
    else:
        results = [job(goal) for goal in goals]

    per_goal = {res.goal_id: res for res in results}
    goal_means = [float(np.mean([t.final_completion_pct for t in res.trials]))
                  for res in results]
    goal_times = [float(np.mean([t.total_time_s for t in res.trials]))
                  for res in results]
    report = BenchmarkReport(
        goal_class=goal_class,
        config_hash=config.content_hash(),
        base_seed=config.seed,
        grid_dt_s=grid_dt_s,
        per_goal=per_goal,
        summary_mean_success_pct=float(np.mean(goal_means)),
        summary_mean_time_s=float(np.mean(goal_times)),
    )
    emit_report(report, out_dir)
    return report


# --- report files ---------------------------------------------------------------

def report_as_dict(report: BenchmarkReport) -> dict:
    return {
        "class": report.goal_class,
        "config_hash": report.config_hash,
        "base_seed": report.base_seed,
        "grid_dt_s": report.grid_dt_s,
        "goals": {
            goal_id: {
                "best_trial": res.best_trial,
                "mean_final_pct": float(np.mean([t.final_completion_pct
                                                 for t in res.trials])),
                "std_final_pct": float(np.std([t.final_completion_pct
                                               for t in res.trials])),
                "mean_time_s": float(np.mean([t.total_time_s for t in res.trials])),
                "trials": [
                    {
                        "repeat_index": t.repeat_index,
                        "seed": t.trace.seed,
                        "final_completion_pct": t.final_completion_pct,
                        "total_time_s": t.total_time_s,
                        "planning_time_s": t.trace.planning_time_s,
                        "plan_failed": t.plan_failed,
                        "trace_file": f"goal-{goal_id}/trial-{t.repeat_index}.trace.jsonl",
                    }
                    for t in res.trials
                ],
            }
            for goal_id, res in sorted(report.per_goal.items())
        },
        "summary": {
            "mean_success_pct": report.summary_mean_success_pct,
            "mean_time_s": report.summary_mean_time_s,
        },
    }


def emit_report(report: BenchmarkReport, out_dir: str | Path) -> list[Path]:
    """Write report.json, summary.csv, and one curve CSV per goal.
    Byte-deterministic for a given report."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []

        path = out_dir / "report.json"
        path.write_text(json.dumps(report_as_dict(report), sort_keys=True,
                                   indent=2) + "\n", encoding="utf-8")
        written.append(path)

        lines = ["goal_id,mean_final_pct,std_final_pct,mean_time_s,"
                 "best_final_pct,best_time_s"]
        doc = report_as_dict(report)
        for goal_id, res in sorted(report.per_goal.items()):
            g = doc["goals"][goal_id]
            best = next(t for t in res.trials if t.repeat_index == res.best_trial)
            lines.append(f"{goal_id},{g['mean_final_pct']!r},{g['std_final_pct']!r},"
                         f"{g['mean_time_s']!r},{best.final_completion_pct!r},"
                         f"{best.total_time_s!r}")
        lines.append(f"class_mean,{report.summary_mean_success_pct!r},,"
                     f"{report.summary_mean_time_s!r},,")
        path = out_dir / "summary.csv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)

        for goal_id, res in sorted(report.per_goal.items()):
            lines = ["time_s,mean_pct,std_pct,best_pct"]
            for i, t in enumerate(res.grid):
                lines.append(f"{t!r},{res.mean_curve[i]!r},{res.std_band[i]!r},"
                             f"{res.best_curve[i]!r}")
            path = out_dir / f"curve-{goal_id}.csv"
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
            written.append(path)
        return written
    except OSError as exc:
        raise IOErrorWrapper(f"cannot write report files: {exc}") from exc
