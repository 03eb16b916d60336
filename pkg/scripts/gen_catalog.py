"""Regenerates the shipped catalog XML from the definitions below.

Run from the repo root:  python scripts/gen_catalog.py
Files are written through the canonical serializer so that the shipped bytes
are exactly what serialize_goal produces for the parsed goals.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from ramp.goals import serialize_goal  # noqa: E402
from ramp.model import (  # noqa: E402
    BeamSpec,
    Connection,
    GoalConfiguration,
    JointKind,
    JointRef,
    JointSpec,
)

S, T, C = JointKind.SOCKET, JointKind.TAB, JointKind.CAP


def beam(bid, kinds, fixed=False):
    joints = tuple(JointSpec(index=i, kind=k, peg_hole=True)
                   for i, k in enumerate(kinds))
    return BeamSpec(beam_id=bid, joints=joints, fixed=fixed)


BEAMS = [
    beam("b1", [T, T, T, T], fixed=True),   # long base, fixed to the table
    beam("b2", [S, S, T]),
    beam("b3", [S, T, S]),
    beam("b4", [C, C]),                     # two-joint capping beam
    beam("b5", [S, S]),
    beam("b6", [C, C, C]),                  # three-joint capping beam
    beam("b7", [T, S]),
    beam("b8", [C, C]),
    beam("b9", [S, S, T, S]),
]
BY_ID = {b.beam_id: b for b in BEAMS}


def conn(ba, ja, bb, jb, peg=True):
    return Connection(JointRef(ba, ja), JointRef(bb, jb), requires_peg=peg)


GOALS = {
    # easy: 3-4 pegs, a chain of square insertions closed by one cap + push
    "easy-1": ("easy", ["b1", "b2", "b4"], [
        conn("b1", 0, "b2", 0),
        conn("b2", 2, "b4", 0),
        conn("b1", 1, "b4", 1),
    ]),
    "easy-2": ("easy", ["b1", "b3", "b7", "b8"], [
        conn("b1", 0, "b3", 0),
        conn("b1", 1, "b7", 1),
        conn("b3", 1, "b8", 0),
        conn("b7", 0, "b8", 1),
    ]),
    "easy-3": ("easy", ["b1", "b2", "b5", "b4"], [
        conn("b1", 0, "b2", 0),
        conn("b1", 1, "b5", 0),
        conn("b2", 1, "b4", 0),
        conn("b5", 1, "b4", 1),
    ]),
    # medium: 4-8 pegs; every goal contains a pure square cycle, so the last
    # beam closing the cycle would need an angled slide the baseline skills
    # cannot perform
    "medium-1": ("medium", ["b1", "b2", "b7", "b9"], [
        conn("b1", 0, "b2", 0),
        conn("b1", 1, "b7", 1),
        conn("b2", 2, "b9", 0),
        conn("b7", 0, "b9", 1),
    ]),
    "medium-2": ("medium", ["b1", "b3", "b5", "b9", "b4"], [
        conn("b1", 0, "b3", 0),
        conn("b1", 1, "b5", 0),
        conn("b3", 1, "b9", 0),
        conn("b5", 1, "b9", 2),
        conn("b9", 1, "b4", 0),
    ]),
    "medium-3": ("medium", ["b1", "b2", "b3", "b5", "b7", "b9"], [
        conn("b1", 0, "b2", 0),
        conn("b1", 1, "b3", 0),
        conn("b1", 2, "b5", 0),
        conn("b2", 2, "b9", 0),
        conn("b3", 1, "b9", 1),
        conn("b9", 2, "b7", 1),
        conn("b7", 0, "b5", 1),
    ]),
    # hard: free-form designs with long sequences; beyond the baseline both
    # in required skills and in plan length
    "hard-1": ("hard", ["b1", "b2", "b3", "b5", "b7", "b9", "b4"], [
        conn("b1", 0, "b2", 0),
        conn("b1", 1, "b3", 0),
        conn("b1", 2, "b5", 0),
        conn("b1", 3, "b7", 1),
        conn("b2", 2, "b9", 0),
        conn("b3", 1, "b9", 1),
        conn("b7", 0, "b9", 3),
        conn("b2", 1, "b4", 0),
        conn("b5", 1, "b4", 1),
        conn("b3", 2, "b9", 2),
    ]),
    "hard-2": ("hard", ["b1", "b2", "b3", "b5", "b7", "b9", "b6"], [
        conn("b1", 0, "b2", 0),
        conn("b1", 1, "b3", 0),
        conn("b1", 2, "b5", 0),
        conn("b2", 2, "b9", 0),
        conn("b3", 1, "b9", 1),
        conn("b7", 0, "b9", 3),
        conn("b7", 1, "b1", 3),
        conn("b5", 1, "b9", 2),
        conn("b6", 0, "b2", 1),
        conn("b6", 1, "b3", 2),
    ]),
    "hard-3": ("hard", ["b1", "b2", "b3", "b5", "b7", "b9", "b4", "b6", "b8"], [
        conn("b1", 0, "b2", 0),
        conn("b1", 1, "b3", 0),
        conn("b1", 2, "b5", 0),
        conn("b2", 2, "b9", 0),
        conn("b3", 1, "b9", 1),
        conn("b7", 0, "b9", 3),
        conn("b1", 3, "b7", 1),
        conn("b6", 0, "b5", 1),
        conn("b4", 0, "b2", 1),
        conn("b4", 1, "b3", 2),
        conn("b8", 0, "b9", 2),
        conn("b8", 1, "b6", 1),
    ]),
}


def main():
    out = Path(__file__).resolve().parents[1] / "src" / "ramp" / "data" / "catalog"
    (out / "goals").mkdir(parents=True, exist_ok=True)

    lines = ['<?xml version="1.0" encoding="UTF-8"?>', "<beams>"]
    for b in sorted(BEAMS, key=lambda b: b.beam_id):
        fixed = ' fixed="true"' if b.fixed else ""
        lines.append(f'  <beam id="{b.beam_id}"{fixed}>')
        for j in b.joints:
            hole = "true" if j.peg_hole else "false"
            lines.append(f'    <joint index="{j.index}" kind="{j.kind.value}" '
                         f'peg_hole="{hole}"/>')
        lines.append("  </beam>")
    lines.append("</beams>")
    (out / "beams.xml").write_bytes(("\n".join(lines) + "\n").encode())

    lay = ['<?xml version="1.0" encoding="UTF-8"?>', "<layout>"]
    for i, b in enumerate(sorted(BY_ID), start=1):
        lay.append(f'  <slot beam="{b}" name="t{i}"/>')
    for i in range(1, 16):
        lay.append(f'  <peg_slot name="ps{i}"/>')
    lay.append("</layout>")
    (out / "layout.xml").write_bytes(("\n".join(lay) + "\n").encode())

    for goal_id, (cls, used, conns) in GOALS.items():
        goal = GoalConfiguration(
            goal_id=goal_id,
            goal_class=cls,
            connections=frozenset(conns),
            beams_used=frozenset(used),
            beams=tuple(sorted((BY_ID[b] for b in used), key=lambda b: b.beam_id)),
        )
        (out / "goals" / f"{goal_id}.xml").write_bytes(serialize_goal(goal))
    print(f"wrote catalog to {out}")


if __name__ == "__main__":
    main()
