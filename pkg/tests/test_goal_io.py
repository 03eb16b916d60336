import shutil
from pathlib import Path

import pytest

from ramp.errors import CatalogError, GoalFileError, SchemaError, SemanticError
from ramp.goals import (
    default_catalog_dir,
    load_catalog,
    parse_beams_file,
    parse_goal,
    parse_layout_file,
    serialize_goal,
)

DATA = Path(__file__).parent / "data"

MINI_GOAL = b"""<?xml version="1.0" encoding="UTF-8"?>
<assembly id="mini" class="easy">
  <beam id="base" fixed="true">
    <joint index="0" kind="tab" peg_hole="true"/>
    <joint index="1" kind="tab" peg_hole="true"/>
    <joint index="2" kind="tab" peg_hole="true"/>
  </beam>
  <beam id="bx">
    <joint index="0" kind="socket" peg_hole="true"/>
    <joint index="1" kind="socket" peg_hole="true"/>
    <joint index="2" kind="socket" peg_hole="true"/>
  </beam>
  <connection beam_a="base" joint_a="0" beam_b="bx" joint_b="0" requires_peg="true"/>
  <connection beam_a="base" joint_a="1" beam_b="bx" joint_b="1" requires_peg="true"/>
  <connection beam_a="base" joint_a="2" beam_b="bx" joint_b="2" requires_peg="true"/>
</assembly>
"""


class TestParseGoal:
    def test_counts_peg_connections(self):
        goal = parse_goal(MINI_GOAL)
        assert goal.goal_id == "mini"
        assert goal.goal_class == "easy"
        assert len(goal.peg_connections) == 3

    def test_missing_class_attribute(self):
        bad = MINI_GOAL.replace(b' class="easy"', b"")
        with pytest.raises(SchemaError):
            parse_goal(bad)

    def test_unknown_attribute_rejected(self):
        bad = MINI_GOAL.replace(b'<assembly id="mini"',
                                b'<assembly id="mini" color="red"')
        with pytest.raises(SchemaError):
            parse_goal(bad)

    def test_unknown_element_rejected(self):
        bad = MINI_GOAL.replace(b"</assembly>", b"<note/></assembly>")
        with pytest.raises(SchemaError):
            parse_goal(bad)

    def test_malformed_xml_reports_position(self):
        with pytest.raises(GoalFileError) as err:
            parse_goal(b"<assembly id='x' class='easy'><beam</assembly>")
        assert "line" in str(err.value)

    def test_bad_boolean_rejected(self):
        bad = MINI_GOAL.replace(b'requires_peg="true"', b'requires_peg="yes"', 1)
        with pytest.raises(SchemaError):
            parse_goal(bad)

    def test_semantic_error_for_dangling_joint(self):
        bad = MINI_GOAL.replace(b'joint_b="2" requires_peg="true"',
                                b'joint_b="9" requires_peg="true"')
        with pytest.raises(SemanticError):
            parse_goal(bad)


class TestSerializeGoal:
    def test_round_trip_identity(self):
        goal = parse_goal(MINI_GOAL)
        again = parse_goal(serialize_goal(goal))
        assert again == goal

    def test_byte_deterministic(self):
        a = serialize_goal(parse_goal(MINI_GOAL))
        b = serialize_goal(parse_goal(a))
        assert a == b

    def test_golden_easy_1(self, catalog):
        golden = (DATA / "golden_easy-1.xml").read_bytes()
        assert serialize_goal(catalog.goal("easy-1")) == golden

    def test_shipped_files_are_canonical(self, catalog):
        for goal in catalog.goals:
            shipped = (default_catalog_dir() / "goals" / f"{goal.goal_id}.xml").read_bytes()
            assert serialize_goal(goal) == shipped

    def test_goal_without_beams_rejected(self):
        goal = parse_goal(MINI_GOAL)
        stripped = type(goal)(goal_id=goal.goal_id, goal_class=goal.goal_class,
                              connections=goal.connections,
                              beams_used=goal.beams_used, beams=())
        with pytest.raises(SemanticError):
            serialize_goal(stripped)


class TestLoadCatalog:
    def test_shipped_catalog(self, catalog):
        assert len(catalog.beams) == 9
        for cls in ("easy", "medium", "hard"):
            assert len(catalog.goals_in_class(cls)) == 3

    def test_easy_peg_ranges(self, catalog):
        for goal in catalog.goals_in_class("easy"):
            assert 3 <= len(goal.peg_connections) <= 4
        for goal in catalog.goals_in_class("medium"):
            assert 4 <= len(goal.peg_connections) <= 8
        for goal in catalog.goals_in_class("hard"):
            assert len(goal.peg_connections) <= 15

    def test_missing_goal_file(self, tmp_path):
        shutil.copytree(default_catalog_dir(), tmp_path / "cat")
        (tmp_path / "cat" / "goals" / "hard-2.xml").unlink()
        with pytest.raises(CatalogError) as err:
            load_catalog(tmp_path / "cat")
        assert "hard-2" in str(err.value)

    def test_layout_covers_all_beams(self, catalog):
        for beam in catalog.beams:
            assert beam.beam_id in catalog.layout.slots
        assert len(catalog.layout.peg_slots) == 15

    def test_beams_file_strictness(self):
        with pytest.raises(SchemaError):
            parse_beams_file(b'<beams><girder id="g"/></beams>')

    def test_layout_duplicate_slot(self):
        bad = (b'<layout><slot beam="b1" name="t1"/>'
               b'<slot beam="b2" name="t1"/></layout>')
        with pytest.raises(SchemaError):
            parse_layout_file(bad)
