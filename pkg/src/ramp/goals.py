"""Goal-file XML parsing and canonical serialization, plus catalog loading.

The schema is deliberately flat and strict: unknown elements or attributes
are rejected, booleans must be literal "true"/"false", and identifiers are
lowercase [a-z0-9_-]+. Serialization is canonical (sorted elements, fixed
attribute order, two-space indent) so equal goals produce byte-equal files.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path

from .errors import CatalogError, GoalFileError, SchemaError, SemanticError
from .model import (
    IDENT_RE,
    BeamSpec,
    Connection,
    GoalConfiguration,
    JointKind,
    JointRef,
    JointSpec,
    validate_goal,
)

GOAL_CLASSES = ("easy", "medium", "hard")
CATALOG_GOAL_FILES = [f"{cls}-{i}" for cls in GOAL_CLASSES for i in (1, 2, 3)]


@dataclass(frozen=True)
class LayoutTemplate:
    slots: dict[str, str]       # beam_id -> slot identifier
    peg_slots: tuple[str, ...]  # holder slot identifiers, at most 15


@dataclass(frozen=True)
class AssemblyCatalog:
    beams: tuple[BeamSpec, ...]
    goals: tuple[GoalConfiguration, ...]
    layout: LayoutTemplate

    def goal(self, goal_id: str) -> GoalConfiguration:
        for g in self.goals:
            if g.goal_id == goal_id:
                return g
        raise KeyError(goal_id)

    def goals_in_class(self, goal_class: str) -> list[GoalConfiguration]:
        return [g for g in self.goals if g.goal_class == goal_class]


# --- strict element readers --------------------------------------------------

def _attrs(elem: ET.Element, required: tuple[str, ...],
           optional: tuple[str, ...] = ()) -> dict[str, str]:
    got = dict(elem.attrib)
    for name in required:
        if name not in got:
            raise SchemaError(f"<{elem.tag}> missing required attribute {name!r}")
    unknown = set(got) - set(required) - set(optional)
    if unknown:
        raise SchemaError(f"<{elem.tag}> has unknown attribute(s) {sorted(unknown)}")
    return got


def _no_text(elem: ET.Element) -> None:
    if (elem.text and elem.text.strip()) or (elem.tail and elem.tail.strip()):
        raise SchemaError(f"<{elem.tag}> must not contain text")


def _boolean(raw: str, where: str) -> bool:
    if raw == "true":
        return True
    if raw == "false":
        return False
    raise SchemaError(f"{where}: boolean must be 'true' or 'false', got {raw!r}")


def _identifier(raw: str, where: str) -> str:
    if not IDENT_RE.match(raw):
        raise SchemaError(f"{where}: identifier {raw!r} is not [a-z0-9_-]+")
    return raw


def _int(raw: str, where: str) -> int:
    if not raw.isdigit():
        raise SchemaError(f"{where}: expected nonnegative integer, got {raw!r}")
    return int(raw)


def _parse_beam(elem: ET.Element) -> BeamSpec:
    _no_text(elem)
    attrs = _attrs(elem, required=("id",), optional=("fixed",))
    beam_id = _identifier(attrs["id"], "<beam id>")
    fixed = _boolean(attrs.get("fixed", "false"), f"beam {beam_id} fixed")
    joints = []
    seen_idx = set()
    for child in elem:
        if child.tag != "joint":
            raise SchemaError(f"<beam> may only contain <joint>, got <{child.tag}>")
        _no_text(child)
        if len(child):
            raise SchemaError("<joint> must be empty")
        ja = _attrs(child, required=("index", "kind", "peg_hole"))
        idx = _int(ja["index"], f"beam {beam_id} joint index")
        if idx in seen_idx:
            raise SchemaError(f"beam {beam_id}: duplicate joint index {idx}")
        seen_idx.add(idx)
        try:
            kind = JointKind(ja["kind"])
        except ValueError:
            raise SchemaError(
                f"beam {beam_id} joint {idx}: unknown kind {ja['kind']!r}") from None
        joints.append(JointSpec(index=idx, kind=kind,
                                peg_hole=_boolean(ja["peg_hole"],
                                                  f"beam {beam_id} joint {idx} peg_hole")))
    if len(joints) < 2:
        raise SchemaError(f"beam {beam_id}: needs at least 2 joints, got {len(joints)}")
    return BeamSpec(beam_id=beam_id, joints=tuple(sorted(joints, key=lambda j: j.index)),
                    fixed=fixed)


def _parse_connection(elem: ET.Element) -> Connection:
    _no_text(elem)
    if len(elem):
        raise SchemaError("<connection> must be empty")
    attrs = _attrs(elem, required=("beam_a", "joint_a", "beam_b", "joint_b", "requires_peg"))
    return Connection(
        joint_a=JointRef(_identifier(attrs["beam_a"], "connection beam_a"),
                         _int(attrs["joint_a"], "connection joint_a")),
        joint_b=JointRef(_identifier(attrs["beam_b"], "connection beam_b"),
                         _int(attrs["joint_b"], "connection joint_b")),
        requires_peg=_boolean(attrs["requires_peg"], "connection requires_peg"),
    )


def _parse_root(data: bytes) -> ET.Element:
    try:
        return ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise GoalFileError(f"malformed XML at line {line}, column {col}: {exc.msg}") from exc


def parse_goal(data: bytes) -> GoalConfiguration:
    """Parse one goal file. Schema violations raise SCHEMA_ERROR; structural
    problems (dangling references, class ranges, ...) raise SEMANTIC_ERROR."""
    root = _parse_root(data)
    if root.tag != "assembly":
        raise SchemaError(f"root element must be <assembly>, got <{root.tag}>")
    _no_text(root)
    attrs = _attrs(root, required=("id", "class"))
    goal_id = _identifier(attrs["id"], "<assembly id>")
    goal_class = attrs["class"]
    if goal_class not in GOAL_CLASSES:
        raise SchemaError(f"assembly class must be one of {GOAL_CLASSES}, got {goal_class!r}")

    beams: list[BeamSpec] = []
    connections: list[Connection] = []
    for child in root:
        if child.tag == "beam":
            beams.append(_parse_beam(child))
        elif child.tag == "connection":
            connections.append(_parse_connection(child))
        else:
            raise SchemaError(f"<assembly> may not contain <{child.tag}>")

    ids = [b.beam_id for b in beams]
    if len(ids) != len(set(ids)):
        raise SchemaError(f"goal {goal_id}: duplicate beam definitions")

    goal = GoalConfiguration(
        goal_id=goal_id,
        goal_class=goal_class,
        connections=frozenset(connections),
        beams_used=frozenset(ids),
        beams=tuple(sorted(beams, key=lambda b: b.beam_id)),
    )
    report = validate_goal(goal, list(goal.beams) if goal.beams else [])
    if not report.ok:
        issues = "; ".join(f"{e.code}: {e.message}" for e in report.errors)
        raise SemanticError(f"goal {goal_id} invalid: {issues}")
    return goal


def serialize_goal(goal: GoalConfiguration) -> bytes:
    """Canonical goal-file bytes: beams sorted by id, joints by index,
    connections by key, fixed attribute order, two-space indent."""
    if goal.beams:
        report = validate_goal(goal, list(goal.beams))
        if not report.ok:
            issues = "; ".join(f"{e.code}: {e.message}" for e in report.errors)
            raise SemanticError(f"goal {goal.goal_id} invalid: {issues}")
    else:
        raise SemanticError(f"goal {goal.goal_id} has no embedded beam definitions")

    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    lines.append(f'<assembly id="{goal.goal_id}" class="{goal.goal_class}">')
    for beam in sorted(goal.beams, key=lambda b: b.beam_id):
        fixed = ' fixed="true"' if beam.fixed else ""
        lines.append(f'  <beam id="{beam.beam_id}"{fixed}>')
        for joint in sorted(beam.joints, key=lambda j: j.index):
            hole = "true" if joint.peg_hole else "false"
            lines.append(f'    <joint index="{joint.index}" kind="{joint.kind.value}" '
                         f'peg_hole="{hole}"/>')
        lines.append("  </beam>")
    for conn in sorted(goal.connections, key=lambda c: c.key):
        peg = "true" if conn.requires_peg else "false"
        lines.append(f'  <connection beam_a="{conn.joint_a.beam_id}" '
                     f'joint_a="{conn.joint_a.joint_index}" '
                     f'beam_b="{conn.joint_b.beam_id}" '
                     f'joint_b="{conn.joint_b.joint_index}" '
                     f'requires_peg="{peg}"/>')
    lines.append("</assembly>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_beams_file(data: bytes) -> tuple[BeamSpec, ...]:
    root = _parse_root(data)
    if root.tag != "beams":
        raise SchemaError(f"root element must be <beams>, got <{root.tag}>")
    _no_text(root)
    _attrs(root, required=())
    beams = []
    for child in root:
        if child.tag != "beam":
            raise SchemaError(f"<beams> may only contain <beam>, got <{child.tag}>")
        beams.append(_parse_beam(child))
    ids = [b.beam_id for b in beams]
    if len(ids) != len(set(ids)):
        raise SchemaError("duplicate beam ids in beams file")
    return tuple(sorted(beams, key=lambda b: b.beam_id))


def parse_layout_file(data: bytes) -> LayoutTemplate:
    root = _parse_root(data)
    if root.tag != "layout":
        raise SchemaError(f"root element must be <layout>, got <{root.tag}>")
    _no_text(root)
    _attrs(root, required=())
    slots: dict[str, str] = {}
    peg_slots: list[str] = []
    names_seen: set[str] = set()
    for child in root:
        _no_text(child)
        if len(child):
            raise SchemaError(f"<{child.tag}> must be empty")
        if child.tag == "slot":
            attrs = _attrs(child, required=("beam", "name"))
            beam = _identifier(attrs["beam"], "slot beam")
            name = _identifier(attrs["name"], "slot name")
            if beam in slots:
                raise SchemaError(f"beam {beam!r} has two layout slots")
            if name in names_seen:
                raise SchemaError(f"duplicate slot identifier {name!r}")
            names_seen.add(name)
            slots[beam] = name
        elif child.tag == "peg_slot":
            attrs = _attrs(child, required=("name",))
            name = _identifier(attrs["name"], "peg_slot name")
            if name in names_seen:
                raise SchemaError(f"duplicate slot identifier {name!r}")
            names_seen.add(name)
            peg_slots.append(name)
        else:
            raise SchemaError(f"<layout> may not contain <{child.tag}>")
    if len(peg_slots) > 15:
        raise SemanticError(f"layout declares {len(peg_slots)} peg slots, limit is 15")
    return LayoutTemplate(slots=slots, peg_slots=tuple(peg_slots))


def load_catalog(directory: str | Path) -> AssemblyCatalog:
    """Load beams.xml, goals/{easy,medium,hard}-{1,2,3}.xml, and layout.xml,
    then check every catalog invariant."""
    directory = Path(directory)

    def read(rel: str) -> bytes:
        path = directory / rel
        if not path.is_file():
            raise CatalogError(f"missing catalog file {rel!r} in {directory}")
        return path.read_bytes()

    def fail(rel: str, exc: Exception) -> CatalogError:
        return CatalogError(f"{rel}: {exc}", code=getattr(exc, "code", "PARSE_ERROR"))

    try:
        beams = parse_beams_file(read("beams.xml"))
    except GoalFileError as exc:
        raise fail("beams.xml", exc) from exc
    try:
        layout = parse_layout_file(read("layout.xml"))
    except GoalFileError as exc:
        raise fail("layout.xml", exc) from exc

    goals = []
    for name in CATALOG_GOAL_FILES:
        rel = f"goals/{name}.xml"
        try:
            goal = parse_goal(read(rel))
        except GoalFileError as exc:
            raise fail(rel, exc) from exc
        if goal.goal_id != name:
            raise CatalogError(f"{rel}: goal id {goal.goal_id!r} does not match filename",
                               code="SEMANTIC_ERROR")
        goals.append(goal)

    if len(beams) != 9:
        raise CatalogError(f"catalog must define exactly 9 beams, got {len(beams)}",
                           code="SEMANTIC_ERROR")
    for cls in GOAL_CLASSES:
        n = sum(1 for g in goals if g.goal_class == cls)
        if n != 3:
            raise CatalogError(f"catalog must have 3 {cls} goals, got {n}",
                               code="SEMANTIC_ERROR")
    for goal in goals:
        report = validate_goal(goal, list(beams))
        if not report.ok:
            issues = "; ".join(f"{e.code}: {e.message}" for e in report.errors)
            raise CatalogError(f"goal {goal.goal_id} fails catalog validation: {issues}",
                               code="SEMANTIC_ERROR")
    missing_slots = [b.beam_id for b in beams if b.beam_id not in layout.slots]
    if missing_slots:
        raise CatalogError(f"layout missing slots for beams {missing_slots}",
                           code="SEMANTIC_ERROR")

    return AssemblyCatalog(beams=beams, goals=tuple(goals), layout=layout)


def default_catalog_dir() -> Path:
    """The catalog shipped inside the package."""
    return Path(__file__).parent / "data" / "catalog"


def default_domains_dir() -> Path:
    return Path(__file__).parent / "data" / "domains"


def default_config_path() -> Path:
    return Path(__file__).parent / "data" / "configs" / "baseline_emulation.toml"
