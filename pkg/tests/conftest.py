import pytest

from ramp.action_language import parse_description
from ramp.goals import (
    default_catalog_dir,
    default_config_path,
    default_domains_dir,
    load_catalog,
)
from ramp.model import BeamSpec, Connection, GoalConfiguration, JointKind, JointRef, JointSpec
from ramp.simulator import load_config


@pytest.fixture(scope="session")
def catalog():
    return load_catalog(default_catalog_dir())


@pytest.fixture(scope="session")
def coarse_desc():
    return parse_description(
        (default_domains_dir() / "coarse.ald").read_bytes(), "coarse")


@pytest.fixture(scope="session")
def fine_desc():
    return parse_description(
        (default_domains_dir() / "fine.ald").read_bytes(), "fine")


@pytest.fixture(scope="session")
def baseline_config():
    return load_config(default_config_path())


def make_beam(beam_id, kinds, fixed=False, peg_holes=None):
    joints = []
    for i, kind in enumerate(kinds):
        hole = True if peg_holes is None else peg_holes[i]
        joints.append(JointSpec(index=i, kind=JointKind(kind), peg_hole=hole))
    return BeamSpec(beam_id=beam_id, joints=tuple(joints), fixed=fixed)


def make_goal(goal_id, goal_class, beams, connections):
    conns = frozenset(
        Connection(JointRef(a, ja), JointRef(b, jb), requires_peg=peg)
        for a, ja, b, jb, peg in connections)
    return GoalConfiguration(
        goal_id=goal_id,
        goal_class=goal_class,
        connections=conns,
        beams_used=frozenset(b.beam_id for b in beams),
        beams=tuple(sorted(beams, key=lambda b: b.beam_id)),
    )


# Toy worlds for oracle-equivalence and semantics tests: at most two movable
# beams and two pegs each, so exhaustive search stays trivial.

def toy_worlds():
    base2 = make_beam("base", ["tab", "tab"], fixed=True)
    base3 = make_beam("base", ["tab", "tab", "tab"], fixed=True)
    worlds = {}

    worlds["one_beam_one_peg"] = make_goal(
        "toy1", "easy", [base2, make_beam("bx", ["socket", "socket"])],
        [("base", 0, "bx", 0, True)])

    worlds["one_beam_two_pegs"] = make_goal(
        "toy2", "easy", [base2, make_beam("bx", ["socket", "socket"])],
        [("base", 0, "bx", 0, True), ("base", 1, "bx", 1, True)])

    worlds["two_beams_star"] = make_goal(
        "toy3", "easy", [base2,
                         make_beam("bx", ["socket", "socket"]),
                         make_beam("by", ["socket", "socket"])],
        [("base", 0, "bx", 0, True), ("base", 1, "by", 0, True)])

    worlds["two_beams_chain"] = make_goal(
        "toy4", "easy", [base2,
                         make_beam("bx", ["socket", "tab"]),
                         make_beam("by", ["socket", "socket"])],
        [("base", 0, "bx", 0, True), ("bx", 1, "by", 0, True)])

    worlds["cap_and_push"] = make_goal(
        "toy5", "easy", [base2, make_beam("bc", ["cap", "cap"])],
        [("base", 0, "bc", 0, True), ("base", 1, "bc", 1, True)])

    worlds["mated_only"] = make_goal(
        "toy6", "easy", [base2, make_beam("bx", ["socket", "socket"])],
        [("base", 0, "bx", 0, False)])

    return worlds


@pytest.fixture(scope="session", params=sorted(toy_worlds()))
def toy_goal(request):
    return toy_worlds()[request.param]
