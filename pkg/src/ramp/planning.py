"""Two-resolution planning: minimal coarse plans by iterative deepening,
then per-transition refinement into fine skill sequences via zooming.

The coarse search returns the lexicographically least plan among the
minimal-horizon ones (actions are tried in sorted order, so the first plan
found at the minimal depth is the least). Refinement restricts the fine
description to the constants relevant to one coarse transition, searches for
the shortest fine sequence whose end state abstracts to the coarse
post-state, and then replays that sequence in the full fine domain, checking
the bridge abstraction exactly after every segment.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

from .action_language import (
    GroundAction,
    GroundedDomain,
    SymbolicState,
    SystemDescription,
    applicable_ids,
    build_state,
    ground,
    successor_ids,
)
from .errors import NoPlan, NotApplicable, RefinementFailed, StateSpaceTooLarge, ValidationFailure
from .goals import AssemblyCatalog
from .instance import ROBOT, BridgeMap, PlanningInstance, build_instance, make_assembly_heuristic
from .model import GoalConfiguration, validate_goal

DEFAULT_COARSE_HORIZON = 40
DEFAULT_FINE_HORIZON = 10


@dataclass(frozen=True)
class History:
    """Initial-state knowledge: ground fluent literals fixed at step zero.
    Static facts live in the grounded domain; `statics` may echo them for
    cross-checking."""

    init: tuple
    statics: frozenset = frozenset()


@dataclass(frozen=True)
class CoarseStep:
    action: GroundAction
    pre: SymbolicState
    post: SymbolicState


@dataclass(frozen=True)
class CoarsePlan:
    steps: tuple[CoarseStep, ...]

    @property
    def horizon(self) -> int:
        return len(self.steps)

    def action_names(self) -> list[str]:
        return [s.action.full_name for s in self.steps]


@dataclass
class PlanningStats:
    wall_s: float = 0.0
    nodes_expanded: int = 0
    coarse_horizon: int = 0
    fine_actions: int = 0


@dataclass(frozen=True)
class FinePlan:
    goal_id: str
    segments: tuple  # ((coarse_step_index, (GroundAction, ...)), ...)
    flattened: tuple  # ((GroundAction, coarse_step_index), ...)
    coarse: CoarsePlan
    stats: PlanningStats

    def actions(self) -> list[GroundAction]:
        return [a for a, _i in self.flattened]

    def fasten_count(self) -> int:
        return sum(1 for a, _i in self.flattened if a.name == "fasten")


# --- goal handling -----------------------------------------------------------

def _goal_ids(domain: GroundedDomain, goal_literals) -> list | None:
    """Translate goal literals to (atom_id, value); None when some atom does
    not exist in this grounding (the goal is then trivially unreachable)."""
    out = []
    for atom, value in goal_literals:
        atom = (atom[0], tuple(atom[1]))
        atom_id = domain.atom_id.get(atom)
        if atom_id is None:
            return None
        out.append((atom_id, bool(value)))
    return out


def _goal_holds(goal_ids, true_ids: frozenset) -> bool:
    return all((atom_id in true_ids) == value for atom_id, value in goal_ids)


def relevant_actions(domain: GroundedDomain, goal_ids) -> list[int]:
    """Goal cone of influence: action indices whose effects can matter.

    Atoms grow backward from the goal through causal-law bodies,
    executability bodies, and state-constraint bodies; an action is kept iff
    one of its causal heads touches a relevant atom.
    """
    relevant: set[int] = {atom_id for atom_id, _v in goal_ids}
    kept: set[int] = set()
    changed = True
    while changed:
        changed = False
        for head_id, _val, body in domain.constraints:
            if head_id in relevant:
                for atom_id, _p in body:
                    if atom_id not in relevant:
                        relevant.add(atom_id)
                        changed = True
        for idx in range(len(domain.ground_actions)):
            if idx in kept or idx in domain.statically_blocked:
                continue
            if any(h in relevant for h, _v, _b in domain.causal_laws[idx]):
                kept.add(idx)
                changed = True
                for _h, _v, body in domain.causal_laws[idx]:
                    for atom_id, _p in body:
                        if atom_id not in relevant:
                            relevant.add(atom_id)
                for ebody in domain.exec_bodies[idx]:
                    for atom_id, _p in ebody:
                        if atom_id not in relevant:
                            relevant.add(atom_id)
    return sorted(kept, key=lambda i: domain.ground_actions[i].full_name)


class _TransitionGraph:
    """Interns states and lazily expands each one exactly once: per state a
    row of (action_index, successor_state) pairs in lexicographic action
    order, plus memoized heuristic and goal values."""

    def __init__(self, domain: GroundedDomain, action_order, goal_check, heuristic):
        self.domain = domain
        self.action_order = list(action_order)
        self.goal_check = goal_check
        self.heuristic = heuristic or (lambda _ids: 0)
        self.state_index: dict[frozenset, int] = {}
        self.states: list[frozenset] = []
        self.rows: list = []
        self.h: list[int] = []
        self.is_goal: list[bool] = []

    def intern(self, ids: frozenset) -> int:
        got = self.state_index.get(ids)
        if got is not None:
            return got
        sid = len(self.states)
        self.state_index[ids] = sid
        self.states.append(ids)
        self.rows.append(None)
        self.h.append(self.heuristic(ids))
        self.is_goal.append(self.goal_check(ids))
        return sid

    def row(self, sid: int):
        cached = self.rows[sid]
        if cached is not None:
            return cached
        ids = self.states[sid]
        domain = self.domain
        out = []
        for idx in self.action_order:
            if not applicable_ids(domain, ids, idx):
                continue
            out.append((idx, self.intern(successor_ids(domain, ids, idx))))
        self.rows[sid] = out
        return out


def _search_minimal(graph: _TransitionGraph, init_ids: frozenset,
                    max_horizon: int, stats: PlanningStats | None = None):
    """Iterative-deepening DFS for the lexicographically least minimal plan.

    Returns a list of action indices. Raises NoPlan, reporting the deepest
    horizon actually searched; if some iteration exhausts the whole
    reachable space without hitting its depth bound, unreachability is
    definitive and the search stops early.
    """
    root = graph.intern(init_ids)
    h = graph.h
    is_goal = graph.is_goal
    row = graph.row
    counter = [0]

    for horizon in range(max_horizon + 1):
        if h[root] > horizon:
            continue
        visited: dict[int, int] = {}
        cutoff = False

        def dfs(sid: int, remaining: int):
            nonlocal cutoff
            counter[0] += 1
            if is_goal[sid]:
                return []
            if remaining == 0 or h[sid] > remaining:
                cutoff = True
                return None
            if visited.get(sid, -1) >= remaining:
                return None
            visited[sid] = remaining
            for idx, nxt in row(sid):
                sub = dfs(nxt, remaining - 1)
                if sub is not None:
                    return [idx] + sub
            return None

        result = dfs(root, horizon)
        if result is not None:
            if stats is not None:
                stats.nodes_expanded += counter[0]
            return result
        if not cutoff:
            if stats is not None:
                stats.nodes_expanded += counter[0]
            raise NoPlan(
                f"goal unreachable: reachable space exhausted at horizon {horizon}",
                horizon_searched=horizon)
    if stats is not None:
        stats.nodes_expanded += counter[0]
    raise NoPlan(f"no plan within horizon {max_horizon}", horizon_searched=max_horizon)


def plan_coarse(domain: GroundedDomain, history: History, goal_literals,
                max_horizon: int = DEFAULT_COARSE_HORIZON, *, heuristic=None,
                prune: bool = True,
                stats: PlanningStats | None = None) -> CoarsePlan:
    """Minimal-horizon coarse plan with deterministic lexicographic
    tie-breaking. Raises NO_PLAN / INVALID_INIT."""
    init = build_state(domain, history.init)
    goal_ids = _goal_ids(domain, goal_literals)
    if goal_ids is None:
        raise NoPlan("goal mentions atoms absent from this domain instance",
                     horizon_searched=max_horizon)
    if prune:
        order = relevant_actions(domain, goal_ids)
    else:
        order = sorted((i for i in range(len(domain.ground_actions))
                        if i not in domain.statically_blocked),
                       key=lambda i: domain.ground_actions[i].full_name)
    graph = _TransitionGraph(domain, order,
                             lambda ids: _goal_holds(goal_ids, ids), heuristic)
    indices = _search_minimal(graph, init.true_ids, max_horizon, stats=stats)
    steps = []
    current = init.true_ids
    for idx in indices:
        nxt = successor_ids(domain, current, idx)
        steps.append(CoarseStep(action=domain.ground_actions[idx],
                                pre=SymbolicState(domain, current),
                                post=SymbolicState(domain, nxt)))
        current = nxt
    plan = CoarsePlan(steps=tuple(steps))
    if stats is not None:
        stats.coarse_horizon = plan.horizon
    return plan


def bfs_oracle(domain: GroundedDomain, init: SymbolicState, goal_literals,
               state_cap: int = 10 ** 6) -> int:
    """Test oracle: exact minimal horizon by exhaustive breadth-first search
    over the full ground transition graph. Independent of the planner's
    pruning, ordering, and heuristics."""
    goal_ids = _goal_ids(domain, goal_literals)
    if goal_ids is None:
        raise NoPlan("goal mentions atoms absent from this domain instance",
                     horizon_searched=0)
    if _goal_holds(goal_ids, init.true_ids):
        return 0
    indices = [i for i in range(len(domain.ground_actions))
               if i not in domain.statically_blocked]
    seen = {init.true_ids}
    frontier = [init.true_ids]
    depth = 0
    while frontier:
        depth += 1
        nxt_frontier = []
        for ids in frontier:
            for idx in indices:
                if not applicable_ids(domain, ids, idx):
                    continue
                succ = successor_ids(domain, ids, idx)
                if succ in seen:
                    continue
                if _goal_holds(goal_ids, succ):
                    return depth
                seen.add(succ)
                if len(seen) > state_cap:
                    raise StateSpaceTooLarge(
                        f"more than {state_cap} states during oracle search")
                nxt_frontier.append(succ)
        frontier = nxt_frontier
    raise NoPlan("goal unreachable (oracle exhausted the state space)",
                 horizon_searched=depth)


# --- zooming and refinement ---------------------------------------------------

def zoom(transition: CoarseStep, fine_desc: SystemDescription,
         bridge: BridgeMap) -> GroundedDomain:
    """Ground the fine description restricted to the constants relevant to
    one coarse transition: the robot, things named by the action, their
    parts, partner beams/joints across the named things' connections, and
    the fine poses refining the coarse places involved."""
    action = transition.action
    coarse_dom = transition.pre.domain
    arg_sorts = coarse_dom.description.actions[action.name]

    beams: set[str] = set()
    pegs: set[str] = set()
    conns: set[str] = set()
    places: set[str] = set()

    all_beams = set(bridge.beam_conns)
    all_pegs = {p for p, parts in bridge.parts.items() if parts == (p,)}
    for const, sort in zip(action.args, arg_sorts):
        if const in all_beams:
            beams.add(const)
        elif const in all_pegs:
            pegs.add(const)
        elif const in bridge.conn_beams:
            conns.add(const)
        elif sort == "place":
            places.add(const)

    # connections incident to named beams, plus their endpoints
    for b in sorted(beams):
        conns.update(bridge.beam_conns[b])
    joints: set[str] = set()
    for b in sorted(beams):
        joints.update(bridge.parts[b])
    partner_beams: set[str] = set()
    for c in sorted(conns):
        b1, b2 = bridge.conn_beams[c]
        for b in (b1, b2):
            if b not in beams:
                partner_beams.add(b)
        joints.update(bridge.conn_joints[c])

    # coarse places where the robot or the named things sit, before and after
    tracked = {ROBOT} | beams | pegs
    for state in (transition.pre, transition.post):
        for atom in state.true_atoms():
            if atom[0] == "loc" and atom[1][0] in tracked:
                places.add(atom[1][1])
    fine_places: list[str] = []
    for p in sorted(places):
        fine_places.extend(bridge.place_map[p])

    members = {
        "robot": [ROBOT],
        "beam": sorted(beams | partner_beams),
        "peg": sorted(pegs),
        "joint": sorted(joints),
        "connection": sorted(conns),
        "place": fine_places,
    }
    zoom_consts = {c for vals in members.values() for c in vals}
    statics = frozenset((name, args) for name, args in bridge.fine_statics
                        if all(a in zoom_consts for a in args))
    return ground(fine_desc, members, statics, allow_empty=True, strict=False)


def _refinement_targets(transition: CoarseStep, zoomed: GroundedDomain,
                        bridge: BridgeMap):
    """Bridge rules fully evaluable inside the zoomed grounding, paired with
    the value the coarse post-state requires."""
    coarse_dom = transition.pre.domain
    targets = []
    for coarse_atom, dnf in sorted(bridge.rules.items()):
        evaluable = all(atom in zoomed.atom_id
                        for conj in dnf for atom, _p in conj)
        if not evaluable:
            continue
        atom_id = coarse_dom.atom_id[coarse_atom]
        targets.append((dnf, atom_id in transition.post.true_ids))
    return targets


def _eval_dnf(dnf, zoomed: GroundedDomain, true_ids: frozenset) -> bool:
    for conj in dnf:
        if all((zoomed.atom_id[atom] in true_ids) == positive
               for atom, positive in conj):
            return True
    return False


def refine_transition(transition: CoarseStep, zoomed: GroundedDomain,
                      bridge: BridgeMap, max_horizon: int = DEFAULT_FINE_HORIZON,
                      fine_init_ids: frozenset | None = None,
                      full_fine: GroundedDomain | None = None,
                      stats: PlanningStats | None = None) -> list[GroundAction]:
    """Minimal fine action sequence (inside the zoomed grounding) whose end
    state abstracts to the coarse post-state. The initial fine values are
    projected from the running fine state when given, else from the bridge
    image of the coarse pre-state."""
    if fine_init_ids is not None and full_fine is not None:
        init_true = set()
        for atom, atom_id in zoomed.atom_id.items():
            full_id = full_fine.atom_id.get(atom)
            if full_id is not None and full_id in fine_init_ids:
                init_true.add(atom_id)
        init_ids = frozenset(init_true)
    else:
        raise RefinementFailed(
            "refinement requires the running fine state for projection")

    targets = _refinement_targets(transition, zoomed, bridge)

    def goal_check(true_ids: frozenset) -> bool:
        return all(_eval_dnf(dnf, zoomed, true_ids) == want
                   for dnf, want in targets)

    action_order = sorted(
        (i for i in range(len(zoomed.ground_actions))
         if i not in zoomed.statically_blocked),
        key=lambda i: zoomed.ground_actions[i].full_name)
    graph = _TransitionGraph(zoomed, action_order, goal_check, None)
    try:
        indices = _search_minimal(graph, init_ids, max_horizon, stats=stats)
    except NoPlan as exc:
        raise RefinementFailed(
            f"no fine sequence within horizon {exc.horizon_searched} realizes "
            f"coarse step {transition.action.full_name}; the fine action set "
            "cannot execute this abstract transition") from exc
    return [zoomed.ground_actions[i] for i in indices]


def plan(goal: GoalConfiguration, catalog: AssemblyCatalog,
         coarse_desc: SystemDescription, fine_desc: SystemDescription,
         bridge: BridgeMap | None = None, *,
         coarse_horizon: int = DEFAULT_COARSE_HORIZON,
         fine_horizon: int = DEFAULT_FINE_HORIZON) -> tuple[FinePlan, PlanningInstance]:
    """Full pipeline: validate, plan at coarse resolution, then zoom and
    refine every abstract step. Checks the bridge abstraction of the fine
    end state against the coarse post-state after every segment."""
    t0 = time.perf_counter()
    report = validate_goal(goal, list(catalog.beams))
    if not report.ok:
        issues = "; ".join(f"{e.code}: {e.message}" for e in report.errors)
        raise ValidationFailure(f"goal {goal.goal_id} invalid: {issues}")

    instance = build_instance(goal, list(catalog.beams), coarse_desc, fine_desc)
    if bridge is None:
        bridge = instance.bridge
    stats = PlanningStats()

    heuristic = make_assembly_heuristic(instance)
    history = History(init=instance.coarse_init_literals)
    coarse_plan = plan_coarse(instance.coarse, history, instance.coarse_goal,
                              coarse_horizon, heuristic=heuristic, stats=stats)

    fine_state = instance.fine_init_state().true_ids
    segments = []
    flattened = []
    for step_index, step in enumerate(coarse_plan.steps):
        zoomed = zoom(step, fine_desc, bridge)
        seq = refine_transition(step, zoomed, bridge, fine_horizon,
                                fine_init_ids=fine_state,
                                full_fine=instance.fine, stats=stats)
        if not seq:
            raise RefinementFailed(
                f"coarse step {step.action.full_name} refined to an empty "
                "sequence; bridge targets must distinguish pre from post")
        for action in seq:
            idx = instance.fine.action_id.get(action)
            if idx is None:
                raise RefinementFailed(
                    f"zoomed action {action.full_name} does not exist in the "
                    "full fine grounding")
            try:
                fine_state = successor_ids(instance.fine, fine_state, idx)
            except NotApplicable as exc:
                raise RefinementFailed(
                    f"refined action {action.full_name} is blocked in the "
                    f"full fine domain: {exc}") from exc
            flattened.append((action, step_index))
        segments.append((step_index, tuple(seq)))

        abstraction = bridge.abstraction(fine_state, instance.fine)
        coarse_dom = instance.coarse
        for coarse_atom, value in abstraction.items():
            want = coarse_dom.atom_id[coarse_atom] in step.post.true_ids
            if value != want:
                from .action_language import atom_str
                raise RefinementFailed(
                    f"after refining {step.action.full_name}, fine state "
                    f"abstracts {atom_str(coarse_atom)}={value} but the coarse "
                    f"post-state requires {want}")

    stats.fine_actions = len(flattened)
    stats.wall_s = time.perf_counter() - t0

    fine_plan = FinePlan(goal_id=goal.goal_id, segments=tuple(segments),
                         flattened=tuple(flattened), coarse=coarse_plan,
                         stats=stats)
    expected_fastens = len(goal.peg_connections)
    if fine_plan.fasten_count() != expected_fastens:
        raise RefinementFailed(
            f"plan contains {fine_plan.fasten_count()} fasten actions, goal "
            f"requires {expected_fastens}")
    return fine_plan, instance


# --- plan serialization --------------------------------------------------------

def plan_to_json(plan: FinePlan, *, planning_time_override_s: float | None = None) -> bytes:
    wall = plan.stats.wall_s if planning_time_override_s is None else planning_time_override_s
    obj = {
        "goal_id": plan.goal_id,
        "actions": [
            {"index": i, "name": a.name, "args": list(a.args), "coarse_step": ci}
            for i, (a, ci) in enumerate(plan.flattened)
        ],
        "coarse_plan": [
            {"index": i, "action": s.action.full_name}
            for i, s in enumerate(plan.coarse.steps)
        ],
        "stats": {
            "wall_s": wall,
            "nodes_expanded": plan.stats.nodes_expanded,
            "coarse_horizon": plan.stats.coarse_horizon,
            "fine_actions": plan.stats.fine_actions,
        },
    }
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode("utf-8")


def plan_content_hash(plan: FinePlan) -> str:
    import hashlib
    payload = json.dumps(
        [[a.name, list(a.args), ci] for a, ci in plan.flattened],
        sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:16]
