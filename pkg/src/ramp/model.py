"""Core world model: beams, joints, connections, goals, and symbolic world state.

Everything here is an immutable value; the operations are pure functions.
Completion is measured exclusively in correct peg insertions: a goal is
100% complete when every peg-requiring connection holds a fully inserted peg.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction

from .errors import IllegalEvent
from .events import EventKind, ExecutionEvent

IDENT_RE = re.compile(r"^[a-z0-9_-]+$")

MAX_PEGS = 15
CLASS_PEG_RANGE = {"easy": (3, 4), "medium": (4, 8), "hard": (1, MAX_PEGS)}


class JointKind(Enum):
    SOCKET = "socket"
    TAB = "tab"
    CAP = "cap"


@dataclass(frozen=True)
class JointSpec:
    index: int
    kind: JointKind
    peg_hole: bool


@dataclass(frozen=True)
class BeamSpec:
    beam_id: str
    joints: tuple[JointSpec, ...]
    fixed: bool = False

    def joint(self, index: int) -> JointSpec | None:
        for j in self.joints:
            if j.index == index:
                return j
        return None


@dataclass(frozen=True, order=True)
class JointRef:
    beam_id: str
    joint_index: int


@dataclass(frozen=True)
class Connection:
    """An undirected joint-to-joint link, stored with endpoints sorted."""

    joint_a: JointRef
    joint_b: JointRef
    requires_peg: bool

    def __post_init__(self):
        if self.joint_b < self.joint_a:
            a, b = self.joint_b, self.joint_a
            object.__setattr__(self, "joint_a", a)
            object.__setattr__(self, "joint_b", b)

    @property
    def key(self) -> str:
        a, b = self.joint_a, self.joint_b
        return f"c_{a.beam_id}_{a.joint_index}_{b.beam_id}_{b.joint_index}"

    @property
    def beams(self) -> tuple[str, str]:
        return (self.joint_a.beam_id, self.joint_b.beam_id)


@dataclass(frozen=True)
class GoalConfiguration:
    goal_id: str
    goal_class: str
    connections: frozenset[Connection]
    beams_used: frozenset[str]
    # Beam specs embedded in the goal file, keyed by id; makes a parsed goal
    # self-contained for planning.
    beams: tuple[BeamSpec, ...] = ()

    @property
    def peg_connections(self) -> list[Connection]:
        return sorted((c for c in self.connections if c.requires_peg),
                      key=lambda c: c.key)

    def beam_spec(self, beam_id: str) -> BeamSpec | None:
        for b in self.beams:
            if b.beam_id == beam_id:
                return b
        return None


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[ValidationIssue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def codes(self) -> list[str]:
        return [e.code for e in self.errors]


def _connection_kinds(conn: Connection, beams: dict[str, BeamSpec]) -> set[JointKind] | None:
    kinds = set()
    for ref in (conn.joint_a, conn.joint_b):
        spec = beams.get(ref.beam_id)
        if spec is None:
            return None
        joint = spec.joint(ref.joint_index)
        if joint is None:
            return None
        kinds.add(joint.kind)
    return kinds


def connection_is_cap(conn: Connection, beams: dict[str, BeamSpec]) -> bool:
    """A connection mates by capping iff either joint has the cap kind."""
    kinds = _connection_kinds(conn, beams)
    return kinds is not None and JointKind.CAP in kinds


def validate_goal(goal: GoalConfiguration, catalog: list[BeamSpec]) -> ValidationReport:
    """Check every goal invariant against the beam catalog.

    Returns an empty error list iff the goal is well formed. Each violation
    is itemized with a stable code so tests and the CLI can match on it.
    """
    errors: list[ValidationIssue] = []

    def err(code: str, msg: str) -> None:
        errors.append(ValidationIssue(code, msg))

    if not catalog:
        raise ValueError("catalog must be non-empty")
    by_id = {b.beam_id: b for b in catalog}

    if not IDENT_RE.match(goal.goal_id):
        err("BAD_IDENTIFIER", f"goal id {goal.goal_id!r} is not [a-z0-9_-]+")
    if goal.goal_class not in CLASS_PEG_RANGE:
        err("CLASS_RANGE", f"unknown class {goal.goal_class!r}")

    for beam_id in sorted(goal.beams_used):
        if beam_id not in by_id:
            err("UNKNOWN_BEAM", f"beam {beam_id!r} not in catalog")

    # Beam specs embedded in the goal must agree with the catalog.
    for spec in goal.beams:
        cat = by_id.get(spec.beam_id)
        if cat is not None and cat != spec:
            err("BEAM_MISMATCH",
                f"beam {spec.beam_id!r} differs from the catalog definition")

    for conn in sorted(goal.connections, key=lambda c: c.key):
        a, b = conn.joint_a, conn.joint_b
        if a.beam_id == b.beam_id:
            err("SELF_CONNECTION", f"{conn.key}: joints on the same beam")
            continue
        bad_ref = False
        for ref in (a, b):
            if ref.beam_id not in goal.beams_used:
                err("UNKNOWN_BEAM", f"{conn.key}: beam {ref.beam_id!r} not in goal")
                bad_ref = True
            spec = by_id.get(ref.beam_id)
            if spec is not None and spec.joint(ref.joint_index) is None:
                err("UNKNOWN_JOINT",
                    f"{conn.key}: beam {ref.beam_id!r} has no joint {ref.joint_index}")
                bad_ref = True
        if bad_ref:
            continue
        if conn.requires_peg:
            for ref in (a, b):
                joint = by_id[ref.beam_id].joint(ref.joint_index)
                if not joint.peg_hole:
                    err("PEG_HOLE",
                        f"{conn.key}: joint {ref.beam_id}/{ref.joint_index} has no peg hole")
        kinds = _connection_kinds(conn, by_id)
        if kinds is not None and JointKind.CAP not in kinds and kinds != {JointKind.SOCKET, JointKind.TAB}:
            err("KIND_MISMATCH",
                f"{conn.key}: kinds {sorted(k.value for k in kinds)} cannot mate "
                "(need socket+tab or a cap joint)")

    fixed = [b for b in sorted(goal.beams_used) if b in by_id and by_id[b].fixed]
    if not fixed:
        err("NO_FIXED_BEAM", "goal uses no beam fixed to the table")
    elif len(fixed) > 1:
        err("MULTIPLE_FIXED_BEAM", f"goal uses {len(fixed)} fixed beams: {fixed}")

    # Connectivity over the goal graph, anchored at the fixed beam.
    if goal.beams_used:
        adj: dict[str, set[str]] = {b: set() for b in goal.beams_used}
        for conn in goal.connections:
            a, b = conn.beams
            if a in adj and b in adj:
                adj[a].add(b)
                adj[b].add(a)
        start = fixed[0] if fixed else sorted(goal.beams_used)[0]
        seen = {start}
        stack = [start]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if seen != set(goal.beams_used):
            missing = sorted(set(goal.beams_used) - seen)
            err("DISCONNECTED", f"beams unreachable from the fixed beam: {missing}")
    else:
        err("DISCONNECTED", "goal uses no beams")

    n_pegs = len(goal.peg_connections)
    if n_pegs > MAX_PEGS:
        err("PEG_LIMIT", f"{n_pegs} peg connections exceeds the {MAX_PEGS}-peg supply")
    if goal.goal_class in CLASS_PEG_RANGE:
        lo, hi = CLASS_PEG_RANGE[goal.goal_class]
        if not (lo <= n_pegs <= hi):
            err("CLASS_RANGE",
                f"class {goal.goal_class!r} requires {lo}-{hi} peg connections, got {n_pegs}")

    return ValidationReport(tuple(errors))


# --- World state ------------------------------------------------------------

class BeamState(Enum):
    ON_TEMPLATE = "on_template"
    IN_HAND = "in_hand"
    ASSEMBLED = "assembled"


class PegState(Enum):
    IN_HOLDER = "in_holder"
    IN_HAND = "in_hand"
    INSERTED = "inserted"
    DROPPED = "dropped"


@dataclass(frozen=True)
class BeamAt:
    state: BeamState
    slot: str | None = None


@dataclass(frozen=True)
class PegAt:
    state: PegState
    slot: str | None = None
    connection: str | None = None  # Connection key when inserted


@dataclass(frozen=True)
class WorldState:
    beam_at: dict[str, BeamAt]
    peg_at: dict[str, PegAt]
    robot_loc: str
    hand: str | None  # id of the held thing, None when empty
    mated: frozenset[str]  # connection keys with joints mated
    step: int = 0

    def holding(self) -> str | None:
        return self.hand


def initial_world_state(goal: GoalConfiguration, beam_slots: dict[str, str],
                        peg_slots: list[str], robot_loc: str) -> WorldState:
    """All movable beams on their template slots, pegs in holders, hand empty."""
    beams = {}
    for beam_id in sorted(goal.beams_used):
        spec = goal.beam_spec(beam_id)
        if spec is not None and spec.fixed:
            beams[beam_id] = BeamAt(BeamState.ASSEMBLED)
        else:
            beams[beam_id] = BeamAt(BeamState.ON_TEMPLATE, slot=beam_slots.get(beam_id))
    pegs = {}
    for i, _conn in enumerate(goal.peg_connections):
        peg_id = f"p{i + 1}"
        slot = peg_slots[i] if i < len(peg_slots) else None
        pegs[peg_id] = PegAt(PegState.IN_HOLDER, slot=slot)
    return WorldState(beam_at=beams, peg_at=pegs, robot_loc=robot_loc,
                      hand=None, mated=frozenset(), step=0)


class ConnStatus(Enum):
    UNSATISFIED = "unsatisfied"
    MATED_ONLY = "mated_only"
    FASTENED = "fastened"


@dataclass(frozen=True)
class SatisfactionReport:
    per_connection: dict[Connection, ConnStatus]
    completion_pct: float


def satisfaction(state: WorldState, goal: GoalConfiguration) -> SatisfactionReport:
    """Score the state against the goal: fastened iff a peg is inserted there."""
    inserted = {p.connection for p in state.peg_at.values()
                if p.state == PegState.INSERTED}
    per: dict[Connection, ConnStatus] = {}
    for conn in sorted(goal.connections, key=lambda c: c.key):
        if conn.key in inserted:
            per[conn] = ConnStatus.FASTENED
        elif conn.key in state.mated:
            per[conn] = ConnStatus.MATED_ONLY
        else:
            per[conn] = ConnStatus.UNSATISFIED
    required = goal.peg_connections
    if required:
        done = sum(1 for c in required if per[c] == ConnStatus.FASTENED)
        pct = float(100 * Fraction(done, len(required)))
    else:
        pct = 0.0
    return SatisfactionReport(per_connection=per, completion_pct=pct)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise IllegalEvent(msg)


def apply_event(state: WorldState, event: ExecutionEvent) -> WorldState:
    """Fold one event into the world state.

    Returns a new state; raises IllegalEvent when the event's precondition
    does not hold (e.g. a pick-up while the hand is occupied). Failure events
    other than peg_dropped leave the state unchanged.
    """
    nxt = replace(state, step=state.step + 1)
    kind = event.kind

    if kind in (EventKind.SKILL_STARTED, EventKind.RUN_ENDED):
        return nxt
    if kind == EventKind.SKILL_FAILED:
        return nxt

    if kind == EventKind.SKILL_SUCCEEDED:
        skill = event.skill
        if skill == "move":
            dest = event.payload.get("destination")
            _require(bool(dest), "move success without destination")
            return replace(nxt, robot_loc=dest)
        if skill == "pick_up":
            thing = event.payload.get("thing")
            _require(bool(thing), "pick_up success without thing")
            _require(state.hand is None, f"pick_up {thing} with occupied hand")
            if thing in state.beam_at:
                _require(state.beam_at[thing].state == BeamState.ON_TEMPLATE,
                         f"pick_up {thing} not on template")
                beams = dict(state.beam_at)
                beams[thing] = BeamAt(BeamState.IN_HAND)
                return replace(nxt, beam_at=beams, hand=thing)
            if thing in state.peg_at:
                _require(state.peg_at[thing].state == PegState.IN_HOLDER,
                         f"pick_up {thing} not in holder")
                pegs = dict(state.peg_at)
                pegs[thing] = PegAt(PegState.IN_HAND)
                return replace(nxt, peg_at=pegs, hand=thing)
            raise IllegalEvent(f"pick_up of unknown thing {thing!r}")
        if skill == "put_down":
            thing = event.payload.get("thing")
            _require(state.hand == thing, f"put_down {thing} not in hand")
            slot = event.payload.get("slot")
            if thing in state.beam_at:
                beams = dict(state.beam_at)
                beams[thing] = BeamAt(BeamState.ON_TEMPLATE, slot=slot)
                return replace(nxt, beam_at=beams, hand=None)
            pegs = dict(state.peg_at)
            pegs[thing] = PegAt(PegState.IN_HOLDER, slot=slot)
            return replace(nxt, peg_at=pegs, hand=None)
        if skill in ("assemble_square", "assemble_cap"):
            beam = event.payload.get("beam")
            _require(state.hand == beam, f"assemble of {beam} not in hand")
            beams = dict(state.beam_at)
            beams[beam] = BeamAt(BeamState.ASSEMBLED)
            mated = set(state.mated)
            mated.update(event.payload.get("mated", ()))
            return replace(nxt, beam_at=beams, hand=None, mated=frozenset(mated))
        if skill == "push":
            return nxt
        if skill == "fasten":
            # State change arrives via the paired peg_inserted event.
            return nxt
        raise IllegalEvent(f"success event for unknown skill {skill!r}")

    if kind == EventKind.PEG_INSERTED:
        peg = event.payload.get("peg")
        conn = event.payload.get("connection")
        _require(bool(peg) and bool(conn), "peg_inserted without peg/connection")
        _require(state.hand == peg, f"peg_inserted but {peg} not in hand")
        _require(conn in state.mated, f"peg_inserted into unmated {conn}")
        already = {p.connection for p in state.peg_at.values()
                   if p.state == PegState.INSERTED}
        _require(conn not in already, f"peg_inserted into already-fastened {conn}")
        pegs = dict(state.peg_at)
        pegs[peg] = PegAt(PegState.INSERTED, connection=conn)
        return replace(nxt, peg_at=pegs, hand=None)

    if kind == EventKind.PEG_DROPPED:
        peg = event.payload.get("peg")
        _require(state.hand == peg, f"peg_dropped but {peg} not in hand")
        pegs = dict(state.peg_at)
        pegs[peg] = PegAt(PegState.DROPPED)
        return replace(nxt, peg_at=pegs, hand=None)

    raise IllegalEvent(f"unknown event kind {kind!r}")


def check_world_invariants(state: WorldState, goal: GoalConfiguration | None = None) -> None:
    """Assert the structural invariants of a world state; for tests and audits."""
    in_hand_things = [b for b, at in state.beam_at.items() if at.state == BeamState.IN_HAND]
    in_hand_things += [p for p, at in state.peg_at.items() if at.state == PegState.IN_HAND]
    if state.hand is None:
        assert not in_hand_things, f"hand empty but {in_hand_things} marked in hand"
    else:
        assert in_hand_things == [state.hand], (
            f"hand holds {state.hand} but in-hand markers are {in_hand_things}")
    inserted = [p.connection for p in state.peg_at.values() if p.state == PegState.INSERTED]
    assert len(inserted) == len(set(inserted)), "two pegs inserted into one connection"
    for conn_key in inserted:
        assert conn_key in state.mated, f"peg inserted into unmated {conn_key}"
    if goal is not None:
        by_key = {c.key: c for c in goal.connections}
        for conn_key in state.mated:
            conn = by_key.get(conn_key)
            assert conn is not None, f"mated connection {conn_key} not in goal"
            for beam_id in conn.beams:
                at = state.beam_at.get(beam_id)
                assert at is not None and at.state == BeamState.ASSEMBLED, (
                    f"mated {conn_key} but beam {beam_id} not assembled")
