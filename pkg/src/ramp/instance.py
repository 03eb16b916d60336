"""Builds planning instances: grounds the coarse and fine descriptions over a
goal's beams, pegs, and connections, derives the static facts from the beam
catalog, and constructs the bridge map tying coarse fluents to fine ones.

Naming scheme for generated constants: the robot is `rob`, joint constants
are `<beam>_j<index>`, pegs are `p1..pN` (one per peg-requiring connection),
and connection constants reuse `Connection.key`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .action_language import (
    GroundedDomain,
    SymbolicState,
    SystemDescription,
    build_state,
    ground,
)
from .model import BeamSpec, Connection, GoalConfiguration, JointKind, connection_is_cap

ROBOT = "rob"

COARSE_PLACES = ("near_template", "near_pegs", "near_assembly")
TEMPLATE, PEGS_AREA, ASSEMBLY = COARSE_PLACES

PLACE_MAP = {p: (f"{p}_appr", f"{p}_eng") for p in COARSE_PLACES}

FINE_START = PLACE_MAP[TEMPLATE][0]


def joint_const(beam_id: str, joint_index: int) -> str:
    return f"{beam_id}_j{joint_index}"


Dnf = tuple  # tuple of conjunctions; conjunction = tuple[(atom, positive)]


@dataclass
class BridgeMap:
    """Maps every coarse ground fluent atom to a DNF over fine ground atoms.

    Also carries the instance relations (parts, connections, place
    refinements) that zooming needs to identify the constants relevant to a
    coarse transition.
    """

    rules: dict[tuple, Dnf]
    place_map: dict[str, tuple[str, str]]
    parts: dict[str, tuple[str, ...]]          # object -> graspable parts
    conn_beams: dict[str, tuple[str, str]]
    conn_joints: dict[str, tuple[str, str]]
    beam_conns: dict[str, tuple[str, ...]]
    fine_members: dict[str, list[str]]         # instance membership map (fine)
    fine_statics: frozenset

    def abstraction(self, fine_true_ids: frozenset, fine_domain: GroundedDomain) -> dict:
        """Evaluate every bridge rule against a fine state."""
        out = {}
        for coarse_atom, dnf in self.rules.items():
            out[coarse_atom] = self.eval_atom(coarse_atom, fine_true_ids, fine_domain)
        return out

    def eval_atom(self, coarse_atom: tuple, fine_true_ids: frozenset,
                  fine_domain: GroundedDomain) -> bool:
        dnf = self.rules[coarse_atom]
        for conj in dnf:
            ok = True
            for atom, positive in conj:
                atom_id = fine_domain.atom_id.get(atom)
                if atom_id is None:
                    ok = False
                    break
                if (atom_id in fine_true_ids) != positive:
                    ok = False
                    break
            if ok:
                return True
        return False


@dataclass
class PlanningInstance:
    goal: GoalConfiguration
    coarse: GroundedDomain
    fine: GroundedDomain
    fine_desc: SystemDescription
    bridge: BridgeMap
    coarse_init_literals: tuple
    fine_init_literals: tuple
    coarse_goal: tuple  # ((atom, value), ...)
    peg_ids: tuple[str, ...]

    def coarse_init_state(self) -> SymbolicState:
        return build_state(self.coarse, self.coarse_init_literals)

    def fine_init_state(self) -> SymbolicState:
        return build_state(self.fine, self.fine_init_literals)


def _beam_specs(goal: GoalConfiguration, catalog_beams: list[BeamSpec]) -> dict[str, BeamSpec]:
    by_id = {b.beam_id: b for b in catalog_beams}
    specs = {}
    for beam_id in goal.beams_used:
        spec = goal.beam_spec(beam_id) or by_id.get(beam_id)
        if spec is None:
            raise KeyError(f"no beam spec for {beam_id!r}")
        specs[beam_id] = spec
    return specs


def cap_beams(goal: GoalConfiguration, specs: dict[str, BeamSpec]) -> set[str]:
    """Beams inserted by capping: those with any cap-kind joint."""
    return {bid for bid, spec in specs.items()
            if any(j.kind == JointKind.CAP for j in spec.joints)}


def build_instance(goal: GoalConfiguration, catalog_beams: list[BeamSpec],
                   coarse_desc: SystemDescription,
                   fine_desc: SystemDescription) -> PlanningInstance:
    specs = _beam_specs(goal, list(catalog_beams))
    beams = sorted(goal.beams_used)
    movable = [b for b in beams if not specs[b].fixed]
    fixed = [b for b in beams if specs[b].fixed]
    conns = sorted(goal.connections, key=lambda c: c.key)
    peg_conns = goal.peg_connections
    # one peg per peg-requiring connection; at least one so the sort is
    # inhabited even for peg-free goals (spare pegs exist in the holder)
    pegs = [f"p{i + 1}" for i in range(max(1, len(peg_conns)))]
    caps = cap_beams(goal, specs)

    conn_beams = {c.key: (c.joint_a.beam_id, c.joint_b.beam_id) for c in conns}
    conn_joints = {c.key: (joint_const(c.joint_a.beam_id, c.joint_a.joint_index),
                           joint_const(c.joint_b.beam_id, c.joint_b.joint_index))
                   for c in conns}
    beam_conns: dict[str, list[str]] = {b: [] for b in beams}
    for c in conns:
        for b in c.beams:
            beam_conns[b].append(c.key)

    joints = [joint_const(b, j.index) for b in beams for j in specs[b].joints]

    # --- coarse instance
    coarse_members = {
        "robot": [ROBOT],
        "beam": beams,
        "peg": pegs,
        "place": list(COARSE_PLACES),
        "connection": [c.key for c in conns],
    }
    coarse_statics = set()
    for p in COARSE_PLACES:
        for q in COARSE_PLACES:
            if p != q:
                coarse_statics.add(("next_to", (p, q)))
    for c in conns:
        coarse_statics.add(("joins", (c.key, *conn_beams[c.key])))
        if c.requires_peg:
            coarse_statics.add(("needs_peg", (c.key,)))
    for b in sorted(caps):
        coarse_statics.add(("cap_beam", (b,)))

    coarse = ground(coarse_desc, coarse_members, frozenset(coarse_statics))

    coarse_init = [(("loc", (ROBOT, TEMPLATE)), True)]
    for b in movable:
        coarse_init.append((("loc", (b, TEMPLATE)), True))
    for b in fixed:
        coarse_init.append((("loc", (b, ASSEMBLY)), True))
        coarse_init.append((("assembled", (b,)), True))
    for p in pegs:
        coarse_init.append((("loc", (p, PEGS_AREA)), True))

    coarse_goal = []
    for c in conns:
        coarse_goal.append((("mated", (c.key,)), True))
    for c in peg_conns:
        coarse_goal.append((("fastened", (c.key,)), True))
    for b in beams:
        coarse_goal.append((("misaligned", (b,)), False))

    # --- fine instance
    fine_members = {
        "robot": [ROBOT],
        "beam": beams,
        "peg": pegs,
        "joint": joints,
        "place": [fp for p in COARSE_PLACES for fp in PLACE_MAP[p]],
        "connection": [c.key for c in conns],
    }
    fine_statics = set()
    for p, (appr, eng) in PLACE_MAP.items():
        fine_statics.add(("next_to", (appr, eng)))
        fine_statics.add(("next_to", (eng, appr)))
    appr_poses = [PLACE_MAP[p][0] for p in COARSE_PLACES]
    for a in appr_poses:
        for b2 in appr_poses:
            if a != b2:
                fine_statics.add(("next_to", (a, b2)))
    for b in beams:
        for j in specs[b].joints:
            fine_statics.add(("part_of", (joint_const(b, j.index), b)))
    for p in pegs:
        fine_statics.add(("part_of", (p, p)))
    for c in conns:
        fine_statics.add(("conn_beams", (c.key, *conn_beams[c.key])))
        fine_statics.add(("conn_joints", (c.key, *conn_joints[c.key])))
        if c.requires_peg:
            fine_statics.add(("needs_peg", (c.key,)))
            fine_statics.add(("pinnable", conn_joints[c.key]))
        if connection_is_cap(c, specs):
            for side, bid in enumerate(conn_beams[c.key]):
                if bid in caps:
                    fine_statics.add(("cap_mate", (conn_joints[c.key][side], c.key)))
        else:
            for jc in conn_joints[c.key]:
                fine_statics.add(("sq_mate", (jc, c.key)))
    for b in sorted(caps):
        fine_statics.add(("cap_beam", (b,)))

    fine = ground(fine_desc, fine_members, frozenset(fine_statics))

    fine_init = [(("loc", (ROBOT, FINE_START)), True)]
    for b in movable:
        fine_init.append((("loc", (b, PLACE_MAP[TEMPLATE][1])), True))
    for b in fixed:
        fine_init.append((("loc", (b, PLACE_MAP[ASSEMBLY][1])), True))
        fine_init.append((("assembled", (b,)), True))
    for p in pegs:
        fine_init.append((("loc", (p, PLACE_MAP[PEGS_AREA][1])), True))

    bridge = _build_bridge(coarse, conn_beams, conn_joints, beam_conns,
                           {b: tuple(joint_const(b, j.index) for j in specs[b].joints)
                            for b in beams},
                           pegs, fine_members, frozenset(fine_statics))

    return PlanningInstance(
        goal=goal, coarse=coarse, fine=fine, fine_desc=fine_desc, bridge=bridge,
        coarse_init_literals=tuple(coarse_init),
        fine_init_literals=tuple(fine_init),
        coarse_goal=tuple(coarse_goal),
        peg_ids=tuple(pegs),
    )


def _build_bridge(coarse: GroundedDomain, conn_beams, conn_joints, beam_conns,
                  beam_parts: dict[str, tuple[str, ...]], pegs: list[str],
                  fine_members, fine_statics) -> BridgeMap:
    rules: dict[tuple, Dnf] = {}
    parts = dict(beam_parts)
    for p in pegs:
        parts[p] = (p,)

    def identity(atom: tuple) -> Dnf:
        return (((atom, True),),)

    for atom in coarse.atoms:
        name, args = atom
        if name == "loc":
            thing, place = args
            appr, eng = PLACE_MAP[place]
            rules[atom] = (((("loc", (thing, appr)), True),),
                           ((("loc", (thing, eng)), True),))
        elif name == "in_hand":
            _rob, obj = args
            rules[atom] = tuple(((("in_hand", (ROBOT, part)), True),)
                                for part in parts[obj])
        elif name == "attachable":
            beam = args[0]
            disjuncts = []
            for ckey in beam_conns[beam]:
                b1, b2 = conn_beams[ckey]
                partner = b2 if b1 == beam else b1
                disjuncts.append(((("assembled", (partner,)), True),))
            rules[atom] = tuple(disjuncts)
        else:
            # assembled, mated, fastened, misaligned, spent: same atom at
            # fine resolution
            rules[atom] = identity(atom)

    return BridgeMap(rules=rules, place_map=dict(PLACE_MAP), parts=parts,
                     conn_beams=dict(conn_beams), conn_joints=dict(conn_joints),
                     beam_conns={b: tuple(v) for b, v in beam_conns.items()},
                     fine_members={k: list(v) for k, v in fine_members.items()},
                     fine_statics=fine_statics)


def make_assembly_heuristic(instance: PlanningInstance):
    """Admissible lower bound on remaining coarse actions.

    Counts, per unsatisfied goal component, actions that no plan can avoid:
    one fasten and one peg pick-up per unfastened peg connection, one
    assemble and one beam pick-up per not-yet-assembled beam referenced by
    an unsatisfied connection, one push per pending misalignment, and the
    unavoidable holder/assembly round trips between consecutive fastens.
    Holding a needed item saves at most one pick-up, which is credited.
    """
    dom = instance.coarse
    aid = dom.atom_id

    fasten_goals = []          # (fastened_id, conn_key)
    mated_goals = []           # (mated_id, conn_key)
    push_goals = []            # (misaligned_id, beam)
    for atom, value in instance.coarse_goal:
        name = atom[0]
        if name == "fastened" and value:
            fasten_goals.append((aid[atom], atom[1][0]))
        elif name == "mated" and value:
            mated_goals.append((aid[atom], atom[1][0]))
        elif name == "misaligned" and not value:
            push_goals.append((aid[atom], atom[1][0]))

    assembled_id = {b: aid[("assembled", (b,))]
                    for b in instance.bridge.beam_conns}
    conn_beams = instance.bridge.conn_beams
    cap_set = {args[0] for (nm, args) in dom.statics_true if nm == "cap_beam"}
    beam_conns = instance.bridge.beam_conns

    hand_ids = {}
    for atom in dom.atoms:
        if atom[0] == "in_hand":
            hand_ids[aid[atom]] = atom[1][1]
    peg_set = set(instance.peg_ids)
    spent_id = {p: aid[("spent", (p,))] for p in peg_set}
    peg_home_id = {p: aid[("loc", (p, PEGS_AREA))] for p in peg_set}
    beam_home_id = {b: aid[("loc", (b, TEMPLATE))]
                    for b in instance.bridge.beam_conns}
    robot_at_assembly = aid[("loc", (ROBOT, ASSEMBLY))]

    def heuristic(true_ids: frozenset) -> int:
        unsat_fasten = [c for fid, c in fasten_goals if fid not in true_ids]
        f = len(unsat_fasten)
        needed_beams = set()
        for mid, c in mated_goals:
            if mid not in true_ids:
                needed_beams.update(conn_beams[c])
        for c in unsat_fasten:
            needed_beams.update(conn_beams[c])
        a_beams = {b for b in needed_beams if assembled_id[b] not in true_ids}
        a = len(a_beams)

        pushes = 0
        for pid, b in push_goals:
            if pid in true_ids:
                pushes += 1
            elif b in cap_set and assembled_id[b] not in true_ids:
                # the beam still has to be capped in, which misaligns it
                if any(aid[("mated", (ck,))] not in true_ids for ck in beam_conns[b]):
                    pushes += 1

        held = None
        for hid, obj in hand_ids.items():
            if hid in true_ids:
                held = obj
                break
        picks = f + a
        if held is not None:
            if held in a_beams:
                picks -= 1
            elif held in peg_set and f > 0 and spent_id[held] not in true_ids:
                picks -= 1

        # Ferrying lower bound: every needed item still at its source must be
        # carried to the assembly (one outbound move each, hand holds one
        # item), with a return move between consecutive ferries.
        pegs_out = sum(1 for p in peg_set
                       if spent_id[p] not in true_ids
                       and peg_home_id[p] not in true_ids)
        deliveries = max(0, f - pegs_out)
        deliveries += sum(1 for b in a_beams
                          if beam_home_id[b] in true_ids and b != held)
        moves = 2 * (deliveries - 1) if deliveries > 1 else 0
        if (f or a or pushes) and robot_at_assembly not in true_ids:
            moves += 1
        return f + a + picks + pushes + moves

    return heuristic
