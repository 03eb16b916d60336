"""Discrete-event execution of fine plans with parametric skill models.

Each skill draws a duration and a success from a deterministic per-attempt
stream derived from (seed, plan step, attempt index), so outcomes at one
step never shift the draws of another; lowering a success probability can
only turn successes into failures. Draw order within an attempt is
normative: duration first, then the success uniform. Failed fasten and
square-insertion attempts retry up to the configured budget (spiral search
plus re-estimation), each retry adding its fixed duration.

Failure propagation:
  strict       A failed skill leaves the symbolic state untouched; later
               actions whose preconditions no longer hold are skipped and
               logged failed (open-loop execution, no replanning). A failed
               fasten drops its peg with the configured probability,
               otherwise the peg stays in the gripper and blocks the hand.
  independent  Failures do not propagate: every skill except fasten always
               succeeds, and a failed fasten always drops its peg, so each
               peg insertion is an independent Bernoulli trial.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .action_language import GroundAction, SystemDescription, applicable_ids, successor_ids
from .errors import ConfigError, MalformedTrace, NotApplicable
from .events import EventKind, ExecutionEvent, check_monotone
from .goals import AssemblyCatalog
from .instance import FINE_START, build_instance
from .model import GoalConfiguration, WorldState, apply_event, initial_world_state

SKILLS = ("move", "pick_up", "put_down", "assemble_square", "assemble_cap",
          "fasten", "push")
RETRY_SKILLS = ("fasten", "assemble_square")


class FailurePropagation(Enum):
    STRICT = "strict"
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class SkillModel:
    skill: str
    base_duration_s: float
    duration_jitter_s: float = 0.0
    success_prob: float = 1.0
    retries: int = 0
    retry_duration_s: float = 1.0
    retry_success_prob: float = 0.0

    def validate(self) -> None:
        if self.skill not in SKILLS:
            raise ConfigError(f"unknown skill {self.skill!r}")
        if self.base_duration_s <= 0:
            raise ConfigError(f"{self.skill}: base_duration_s must be positive")
        if self.duration_jitter_s < 0:
            raise ConfigError(f"{self.skill}: duration_jitter_s must be >= 0")
        for name in ("success_prob", "retry_success_prob"):
            p = getattr(self, name)
            if not (0.0 <= p <= 1.0):
                raise ConfigError(f"{self.skill}: {name} must be in [0,1]")
        if self.retries < 0:
            raise ConfigError(f"{self.skill}: retries must be >= 0")
        if self.retries > 0 and self.skill not in RETRY_SKILLS:
            raise ConfigError(
                f"{self.skill}: only {RETRY_SKILLS} have search-based recovery")
        if self.retry_duration_s <= 0:
            raise ConfigError(f"{self.skill}: retry_duration_s must be positive")


@dataclass(frozen=True)
class SimConfig:
    seed: int
    models: dict[str, SkillModel]
    failure_propagation: FailurePropagation = FailurePropagation.STRICT
    planning_time_override_s: float | None = None
    peg_drop_prob: float = 0.5

    def validate(self) -> None:
        if not (0 <= self.seed < 2 ** 64):
            raise ConfigError("seed must be a 64-bit unsigned integer")
        missing = [s for s in SKILLS if s not in self.models]
        if missing:
            raise ConfigError(f"config missing skill models: {missing}")
        for model in self.models.values():
            model.validate()
        if self.planning_time_override_s is not None and self.planning_time_override_s <= 0:
            raise ConfigError("planning_time_override_s must be positive")
        if not (0.0 <= self.peg_drop_prob <= 1.0):
            raise ConfigError("peg_drop_prob must be in [0,1]")

    def with_seed(self, seed: int) -> "SimConfig":
        return SimConfig(seed=seed, models=self.models,
                         failure_propagation=self.failure_propagation,
                         planning_time_override_s=self.planning_time_override_s,
                         peg_drop_prob=self.peg_drop_prob)

    def canonical_json(self, include_seed: bool = True) -> str:
        obj = {
            "failure_propagation": self.failure_propagation.value,
            "planning_time_override_s": self.planning_time_override_s,
            "peg_drop_prob": self.peg_drop_prob,
            "models": {
                name: {
                    "base_duration_s": m.base_duration_s,
                    "duration_jitter_s": m.duration_jitter_s,
                    "success_prob": m.success_prob,
                    "retries": m.retries,
                    "retry_duration_s": m.retry_duration_s,
                    "retry_success_prob": m.retry_success_prob,
                }
                for name, m in sorted(self.models.items())
            },
        }
        if include_seed:
            obj["seed"] = self.seed
        return json.dumps(obj, sort_keys=True)

    def content_hash(self) -> str:
        """Identifies the configuration; the seed is run identity, not
        configuration, so reseeded copies hash identically."""
        payload = self.canonical_json(include_seed=False)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def load_config(path: str | Path) -> SimConfig:
    """Parse a TOML config: top-level seed / failure_propagation /
    planning_time_override_s / peg_drop_prob plus [models.<skill>] tables."""
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc

    known = {"seed", "failure_propagation", "planning_time_override_s",
             "peg_drop_prob", "models"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        prop = FailurePropagation(data.get("failure_propagation", "strict"))
    except ValueError:
        raise ConfigError(
            f"failure_propagation must be 'strict' or 'independent'") from None

    models = {}
    for skill, table in data.get("models", {}).items():
        allowed = {"base_duration_s", "duration_jitter_s", "success_prob",
                   "retries", "retry_duration_s", "retry_success_prob"}
        bad = set(table) - allowed
        if bad:
            raise ConfigError(f"models.{skill}: unknown keys {sorted(bad)}")
        models[skill] = SkillModel(skill=skill, **table)

    config = SimConfig(
        seed=int(data.get("seed", 0)),
        models=models,
        failure_propagation=prop,
        planning_time_override_s=data.get("planning_time_override_s"),
        peg_drop_prob=float(data.get("peg_drop_prob", 0.5)),
    )
    config.validate()
    return config


@dataclass
class ExecutionTrace:
    events: tuple[ExecutionEvent, ...]
    final_state: WorldState
    planning_time_s: float
    seed: int = 0
    config_hash: str = ""
    plan_hash: str = ""
    goal_id: str = ""
    repeat_index: int = 0


# --- deterministic per-attempt streams ----------------------------------------

_MASK = (1 << 64) - 1


def _splitmix(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def _attempt_rng(seed: int, step: int, attempt: int, purpose: int) -> random.Random:
    x = seed & _MASK
    for part in (step + 1, attempt + 1, purpose + 1):
        x = _splitmix((x ^ part) & _MASK)
    return random.Random(x)


# --- execution ----------------------------------------------------------------

def _event_payload(action: GroundAction, pre_ids, post_ids, domain) -> dict:
    """Effect payload for a success event, from the fine transition delta."""
    skill = action.name
    if skill == "move":
        return {"destination": action.args[1]}
    if skill in ("pick_up", "put_down"):
        part = action.args[1]
        thing = part
        for name, args in domain.statics_true:
            if name == "part_of" and args[0] == part:
                thing = args[1]
                break
        return {"part": part, "thing": thing}
    if skill in ("assemble_square", "assemble_cap"):
        joint = action.args[1]
        beam = joint
        mated = []
        for name, args in domain.statics_true:
            if name == "part_of" and args[0] == joint:
                beam = args[1]
        for atom, atom_id in domain.atom_id.items():
            if atom[0] == "mated" and atom_id in post_ids and atom_id not in pre_ids:
                mated.append(atom[1][0])
        return {"beam": beam, "mated": sorted(mated)}
    if skill == "fasten":
        peg = action.args[3]
        conn = None
        for name, args in domain.statics_true:
            if name == "conn_joints" and args[1:] == (action.args[1], action.args[2]):
                conn = args[0]
                break
        return {"peg": peg, "connection": conn}
    if skill == "push":
        return {"beam": action.args[1]}
    return {}


def execute(plan, goal: GoalConfiguration, catalog: AssemblyCatalog,
            config: SimConfig, *, fine_desc: SystemDescription | None = None,
            planning_time_s: float | None = None,
            instance=None) -> ExecutionTrace:
    """Run a fine plan open loop under the configured skill models.

    Runtime skill failures are trace content; only a bad config raises.
    Passing the plan's PlanningInstance skips regrounding the fine domain.
    """
    config.validate()
    if instance is None:
        if fine_desc is None:
            from .action_language import parse_description
            from .goals import default_domains_dir
            fine_desc = parse_description(
                (default_domains_dir() / "fine.ald").read_bytes(), "fine")
        coarse_desc = _coarse_desc_default()
        instance = build_instance(goal, list(catalog.beams), coarse_desc, fine_desc)
    fine = instance.fine
    fine_ids = instance.fine_init_state().true_ids

    if planning_time_s is None:
        planning_time_s = getattr(getattr(plan, "stats", None), "wall_s", 0.0) or 1e-9
    if config.planning_time_override_s is not None:
        planning_time_s = config.planning_time_override_s

    world = initial_world_state(goal, catalog.layout.slots,
                                list(catalog.layout.peg_slots), FINE_START)
    events: list[ExecutionEvent] = []
    t = planning_time_s
    seed = config.seed
    strict = config.failure_propagation == FailurePropagation.STRICT

    def emit(event: ExecutionEvent) -> None:
        nonlocal world
        events.append(event)
        world = apply_event(world, event)

    for step_index, (action, _coarse_idx) in enumerate(plan.flattened):
        skill = action.name
        model = config.models[skill]
        action_idx = fine.action_id[action]

        if strict and not applicable_ids(fine, fine_ids, action_idx):
            emit(ExecutionEvent(t_s=t, kind=EventKind.SKILL_STARTED, skill=skill,
                                args=action.args, attempt_index=0))
            emit(ExecutionEvent(t_s=t, kind=EventKind.SKILL_FAILED, skill=skill,
                                args=action.args, attempt_index=0,
                                payload={"reason": "precondition"}))
            continue

        attempts = model.retries + 1
        succeeded = False
        for attempt in range(attempts):
            rng = _attempt_rng(seed, step_index, attempt, 0)
            if attempt == 0:
                lo = model.base_duration_s - model.duration_jitter_s
                hi = model.base_duration_s + model.duration_jitter_s
            else:
                lo = hi = model.retry_duration_s
            duration = rng.uniform(lo, hi)
            success_u = rng.random()
            p = model.success_prob if attempt == 0 else model.retry_success_prob
            emit(ExecutionEvent(t_s=t, kind=EventKind.SKILL_STARTED, skill=skill,
                                args=action.args, attempt_index=attempt))
            t += duration
            if not strict and skill != "fasten":
                succeeded = True  # independent mode: failures do not propagate
            else:
                succeeded = success_u < p
            if succeeded:
                break

        if succeeded:
            try:
                post = successor_ids(fine, fine_ids, action_idx)
            except NotApplicable:
                # independent mode has no gate up front; an inapplicable
                # action is trace content, not a crash
                emit(ExecutionEvent(t_s=t, kind=EventKind.SKILL_FAILED,
                                    skill=skill, args=action.args,
                                    attempt_index=attempt,
                                    payload={"reason": "precondition"}))
                continue
            payload = _event_payload(action, fine_ids, post, fine)
            fine_ids = post
            emit(ExecutionEvent(t_s=t, kind=EventKind.SKILL_SUCCEEDED, skill=skill,
                                args=action.args, attempt_index=attempt,
                                payload=payload))
            if skill == "fasten":
                emit(ExecutionEvent(t_s=t, kind=EventKind.PEG_INSERTED, skill=skill,
                                    args=action.args, attempt_index=attempt,
                                    payload=payload))
        else:
            emit(ExecutionEvent(t_s=t, kind=EventKind.SKILL_FAILED, skill=skill,
                                args=action.args, attempt_index=attempts - 1,
                                payload={"reason": "exhausted_retries"}))
            if skill == "fasten":
                peg = action.args[3]
                drop_u = _attempt_rng(seed, step_index, 0, 1).random()
                if not strict or drop_u < config.peg_drop_prob:
                    emit(ExecutionEvent(t_s=t, kind=EventKind.PEG_DROPPED,
                                        skill=skill, args=action.args,
                                        attempt_index=attempts - 1,
                                        payload={"peg": peg}))
                    fine_ids = _drop_peg(fine, fine_ids, peg)

    emit(ExecutionEvent(t_s=t, kind=EventKind.RUN_ENDED))
    trace = ExecutionTrace(events=tuple(events), final_state=world,
                           planning_time_s=planning_time_s, seed=seed,
                           config_hash=config.content_hash(),
                           plan_hash=_plan_hash(plan), goal_id=goal.goal_id)
    return trace


def _coarse_desc_default() -> SystemDescription:
    from .action_language import parse_description
    from .goals import default_domains_dir
    return parse_description(
        (default_domains_dir() / "coarse.ald").read_bytes(), "coarse")


def _plan_hash(plan) -> str:
    from .planning import plan_content_hash
    return plan_content_hash(plan)


def _drop_peg(fine, fine_ids: frozenset, peg: str) -> frozenset:
    """Exogenous update: a dropped peg leaves the gripper and is out of play.
    Touches exactly the hand and spent atoms, which no constraint rederives."""
    ids = set(fine_ids)
    for atom, atom_id in fine.atom_id.items():
        name, args = atom
        if name == "in_hand" and args[1] == peg:
            ids.discard(atom_id)
        elif name == "holding" and args[0] == peg:
            ids.discard(atom_id)
        elif name == "spent" and args[0] == peg:
            ids.add(atom_id)
    return frozenset(ids)


# --- traces on disk -----------------------------------------------------------

def write_trace(trace: ExecutionTrace, path: str | Path) -> None:
    path = Path(path)
    header = {
        "seed": trace.seed,
        "config_hash": trace.config_hash,
        "plan_hash": trace.plan_hash,
        "goal_id": trace.goal_id,
        "repeat_index": trace.repeat_index,
        "planning_time_s": trace.planning_time_s,
    }
    lines = [json.dumps(header, sort_keys=True)]
    lines.extend(ev.to_json() for ev in trace.events)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_trace(path: str | Path, goal: GoalConfiguration,
               catalog: AssemblyCatalog) -> ExecutionTrace:
    """Load a trace file and rebuild its final state by folding the events;
    any inconsistency raises MALFORMED_TRACE."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise MalformedTrace(f"{path}: empty trace file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise MalformedTrace(f"{path}: bad header: {exc}") from exc
    events = tuple(ExecutionEvent.from_json(line) for line in lines[1:] if line)
    check_monotone(list(events))
    world = initial_world_state(goal, catalog.layout.slots,
                                list(catalog.layout.peg_slots), FINE_START)
    from .errors import IllegalEvent
    for ev in events:
        try:
            world = apply_event(world, ev)
        except IllegalEvent as exc:
            raise MalformedTrace(f"{path}: inconsistent event stream: {exc}") from exc
    return ExecutionTrace(
        events=events, final_state=world,
        planning_time_s=float(header.get("planning_time_s", 0.0)),
        seed=int(header.get("seed", 0)),
        config_hash=header.get("config_hash", ""),
        plan_hash=header.get("plan_hash", ""),
        goal_id=header.get("goal_id", ""),
        repeat_index=int(header.get("repeat_index", 0)),
    )


# --- completion timeline --------------------------------------------------------

def replay(trace: ExecutionTrace, goal: GoalConfiguration,
           catalog: AssemblyCatalog | None = None) -> list[tuple[float, float]]:
    """Completion percentage over time: a step function with one breakpoint
    per peg insertion, starting at (0.0, 0.0)."""
    from .model import satisfaction

    check_monotone(list(trace.events))
    if catalog is not None:
        world = initial_world_state(goal, catalog.layout.slots,
                                    list(catalog.layout.peg_slots), FINE_START)
    else:
        world = initial_world_state(goal, {}, [], FINE_START)
    timeline: list[tuple[float, float]] = [(0.0, 0.0)]
    from .errors import IllegalEvent
    for ev in trace.events:
        try:
            world = apply_event(world, ev)
        except IllegalEvent as exc:
            raise MalformedTrace(f"inconsistent event stream: {exc}") from exc
        if ev.kind == EventKind.PEG_INSERTED:
            pct = satisfaction(world, goal).completion_pct
            timeline.append((ev.t_s, pct))
    return timeline


def completion_at(timeline: list[tuple[float, float]], t: float) -> float:
    value = 0.0
    for ts, pct in timeline:
        if ts <= t:
            value = pct
        else:
            break
    return value
