"""Command-line interface.

    ramp plan   --goal <file> [--domains <dir>] [--catalog <dir>] --out <plan.json>
    ramp run    --class {easy|medium|hard} [--catalog <dir>] [--config <toml>]
                [--seed <u64>] --out <dir> [--domains <dir>] [--parallel-goals]
    ramp replay --trace <file> --goal <file>
    ramp report --in <dir> [--catalog <dir>]

Exit codes: 0 success, 1 validation error, 2 I/O error. RAMP_CATALOG sets
the default catalog directory; flags override it.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .action_language import parse_description
from .errors import CatalogError, IOErrorWrapper, RampError
from .goals import (
    default_catalog_dir,
    default_config_path,
    default_domains_dir,
    load_catalog,
    parse_goal,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _catalog_dir(arg: str | None) -> Path:
    if arg:
        return Path(arg)
    env = os.environ.get("RAMP_CATALOG")
    if env:
        return Path(env)
    return default_catalog_dir()


def _load_domains(domains_dir: str | None):
    base = Path(domains_dir) if domains_dir else default_domains_dir()
    coarse_path = base / "coarse.ald"
    fine_path = base / "fine.ald"
    for p in (coarse_path, fine_path):
        if not p.is_file():
            raise CatalogError(f"missing domain file {p}")
    coarse = parse_description(coarse_path.read_bytes(), "coarse")
    fine = parse_description(fine_path.read_bytes(), "fine")
    return coarse, fine


def cmd_plan(args) -> int:
    from .planning import plan, plan_to_json

    goal = parse_goal(Path(args.goal).read_bytes())
    catalog = load_catalog(_catalog_dir(args.catalog))
    coarse, fine = _load_domains(args.domains)
    fine_plan, _instance = plan(goal, catalog, coarse, fine)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(plan_to_json(fine_plan))
    print(f"wrote {out} ({fine_plan.stats.fine_actions} actions, "
          f"coarse horizon {fine_plan.stats.coarse_horizon})")
    return EXIT_OK


def cmd_run(args) -> int:
    from .harness import run_protocol
    from .simulator import load_config

    catalog = load_catalog(_catalog_dir(args.catalog))
    domains = _load_domains(args.domains)
    config = load_config(args.config or default_config_path())
    if args.seed is not None:
        config = config.with_seed(args.seed)
    report = run_protocol(args.goal_class, catalog, domains, None, config,
                          args.out, parallel_goals=args.parallel_goals)
    print(f"class {report.goal_class}: mean success "
          f"{report.summary_mean_success_pct:.1f}%, mean time "
          f"{report.summary_mean_time_s:.1f}s -> {args.out}")
    return EXIT_OK


def cmd_replay(args) -> int:
    from .simulator import read_trace, replay

    goal = parse_goal(Path(args.goal).read_bytes())
    catalog = load_catalog(_catalog_dir(args.catalog))
    trace = read_trace(args.trace, goal, catalog)
    timeline = replay(trace, goal, catalog)
    print("time_s,completion_pct")
    for t, pct in timeline:
        print(f"{t!r},{pct!r}")
    return EXIT_OK


def cmd_report(args) -> int:
    from .reporting import rebuild_report

    catalog = load_catalog(_catalog_dir(args.catalog))
    report = rebuild_report(Path(args.in_dir), catalog)
    print(f"rebuilt report for class {report.goal_class}: mean success "
          f"{report.summary_mean_success_pct:.1f}%, mean time "
          f"{report.summary_mean_time_s:.1f}s")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ramp",
                                     description="RAMP assembly benchmark toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan one goal and write the plan JSON")
    p.add_argument("--goal", required=True)
    p.add_argument("--domains", default=None)
    p.add_argument("--catalog", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("run", help="run the five-repeat protocol for a class")
    p.add_argument("--class", dest="goal_class", required=True,
                   choices=("easy", "medium", "hard"))
    p.add_argument("--catalog", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--domains", default=None)
    p.add_argument("--parallel-goals", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="print a trace's completion timeline")
    p.add_argument("--trace", required=True)
    p.add_argument("--goal", required=True)
    p.add_argument("--catalog", default=None)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("report", help="rebuild report files from raw traces")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--catalog", default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (IOErrorWrapper, CatalogError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except RampError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
