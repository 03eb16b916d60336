"""Parameter sweep used to freeze configs/baseline_emulation.toml.

Evaluates candidate skill parameters over many seeds and prints the
cross-assembly easy-class summary (mean success %, mean total time s) per
candidate, plus the per-seed spread, targeting ~84% / ~580 s with margin
inside 74-94% and 464-696 s on every seed.

Usage: python scripts/sweep_baseline.py [n_seeds]
"""

import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from ramp.action_language import parse_description  # noqa: E402
from ramp.goals import default_catalog_dir, default_domains_dir, load_catalog  # noqa: E402
from ramp.harness import run_protocol  # noqa: E402
from ramp.simulator import FailurePropagation, SimConfig, SkillModel  # noqa: E402


def make_config(seed, fasten_p, fasten_retry_p, sq_p, cap_p, fasten_dur, move_dur,
                drop_prob=1.0):
    models = {
        "move": SkillModel("move", base_duration_s=move_dur, duration_jitter_s=0.6),
        "pick_up": SkillModel("pick_up", base_duration_s=6.0, duration_jitter_s=1.0),
        "put_down": SkillModel("put_down", base_duration_s=4.0, duration_jitter_s=0.5),
        "assemble_square": SkillModel("assemble_square", base_duration_s=22.0,
                                      duration_jitter_s=4.0, success_prob=sq_p,
                                      retries=2, retry_duration_s=8.0,
                                      retry_success_prob=0.85),
        "assemble_cap": SkillModel("assemble_cap", base_duration_s=18.0,
                                   duration_jitter_s=3.0, success_prob=cap_p),
        "fasten": SkillModel("fasten", base_duration_s=fasten_dur,
                             duration_jitter_s=5.0, success_prob=fasten_p,
                             retries=2, retry_duration_s=10.0,
                             retry_success_prob=fasten_retry_p),
        "push": SkillModel("push", base_duration_s=8.0, duration_jitter_s=1.5),
    }
    return SimConfig(seed=seed, models=models,
                     failure_propagation=FailurePropagation.STRICT,
                     planning_time_override_s=190.0, peg_drop_prob=drop_prob)


def evaluate(candidate, seeds, cat, domains):
    succ, times = [], []
    for seed in seeds:
        cfg = make_config(seed, **candidate)
        with tempfile.TemporaryDirectory() as td:
            rep = run_protocol("easy", cat, domains, None, cfg, td)
        succ.append(rep.summary_mean_success_pct)
        times.append(rep.summary_mean_time_s)
    return succ, times


def main():
    n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 12
    seeds = [1000 * k for k in range(1, n_seeds + 1)]
    cat = load_catalog(default_catalog_dir())
    dd = default_domains_dir()
    domains = (parse_description((dd / "coarse.ald").read_bytes(), "coarse"),
               parse_description((dd / "fine.ald").read_bytes(), "fine"))

    candidates = [
        dict(fasten_p=0.53, fasten_retry_p=0.40, sq_p=0.95, cap_p=1.0,
             fasten_dur=28.0, move_dur=4.5),
        dict(fasten_p=0.55, fasten_retry_p=0.40, sq_p=0.95, cap_p=1.0,
             fasten_dur=28.0, move_dur=4.5),
        dict(fasten_p=0.55, fasten_retry_p=0.43, sq_p=0.95, cap_p=1.0,
             fasten_dur=28.0, move_dur=4.5),
        dict(fasten_p=0.57, fasten_retry_p=0.40, sq_p=0.95, cap_p=1.0,
             fasten_dur=28.0, move_dur=4.5),
    ]
    for cand in candidates:
        succ, times = evaluate(cand, seeds, cat, domains)
        mean_s = sum(succ) / len(succ)
        mean_t = sum(times) / len(times)
        print(f"{cand}")
        print(f"  success mean {mean_s:.1f}%  per-seed "
              f"{[round(s, 1) for s in succ]}")
        print(f"  time    mean {mean_t:.0f}s  range [{min(times):.0f}, {max(times):.0f}]")
        ok = all(74 <= s <= 94 for s in succ) and all(464 <= t <= 696 for t in times)
        print(f"  all-seeds in band: {ok}")


if __name__ == "__main__":
    main()
