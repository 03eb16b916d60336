"""Action-language descriptions and their transition-system semantics.

A description has five sections (sorts, statics, fluents, actions, axioms)
with one `.`-terminated statement per line. Axioms come in three forms:

    action(..) causes literal [if literal, ...].     dynamic causal law
    literal if literal, ...                          state constraint
    impossible action(..) if literal, ...            executability condition

Variables are uppercase, constants lowercase, `-` negates, `X != Y` filters
substitutions at grounding time. Statics are fixed facts supplied with the
domain instance; fluents are inertial.

Semantics are a deterministic transition function rather than a general
answer-set solver: direct effects are applied, the state is completed by
inertia, then closed under the state constraints. Closure runs in two
priority tiers (rules supported by established facts fire before rules
resting on inertial values), and every transition is verified against the
fixpoint equation  new_state = Cn(effects ∪ (old ∩ new))  afterwards, so an
ambiguous or unsupported closure is always reported, never silently
resolved. Descriptions whose constraints feed a literal back into its own
complement are rejected at parse time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from itertools import product

from .errors import (
    AmbiguousClosure,
    DescriptionError,
    GroundingError,
    InconsistentState,
    InvalidInit,
    NotApplicable,
    SortError,
    UndeclaredSymbol,
)

GroundAtom = tuple  # (name, (arg, ...))


def atom_str(atom: GroundAtom) -> str:
    name, args = atom
    return f"{name}({','.join(args)})" if args else name


# --- syntax ------------------------------------------------------------------

class AxiomKind(Enum):
    CAUSAL_LAW = "causal_law"
    STATE_CONSTRAINT = "state_constraint"
    EXECUTABILITY = "executability"


@dataclass(frozen=True)
class Literal:
    name: str
    args: tuple[str, ...]
    positive: bool = True

    def __str__(self) -> str:
        sign = "" if self.positive else "-"
        if self.args:
            return f"{sign}{self.name}({','.join(self.args)})"
        return f"{sign}{self.name}"


@dataclass(frozen=True)
class Inequality:
    left: str
    right: str

    def __str__(self) -> str:
        return f"{self.left} != {self.right}"


@dataclass(frozen=True)
class Axiom:
    kind: AxiomKind
    trigger: Literal | None
    head: Literal | None
    body: tuple = ()
    line: int = 0

    def __str__(self) -> str:
        body = ", ".join(str(b) for b in self.body)
        if self.kind == AxiomKind.CAUSAL_LAW:
            s = f"{self.trigger} causes {self.head}"
            return f"{s} if {body}" if body else s
        if self.kind == AxiomKind.STATE_CONSTRAINT:
            return f"{self.head} if {body}"
        return f"impossible {self.trigger}" + (f" if {body}" if body else "")


@dataclass
class SortDecl:
    name: str
    parents: tuple[str, ...] = ()
    members: tuple[str, ...] = ()


@dataclass
class SystemDescription:
    resolution: str
    sorts: dict[str, SortDecl]
    statics: dict[str, tuple[str, ...]]
    fluents: dict[str, tuple[str, ...]]
    actions: dict[str, tuple[str, ...]]
    axioms: tuple[Axiom, ...]

    def children(self, sort: str) -> list[str]:
        return [s.name for s in self.sorts.values() if sort in s.parents]

    def descendants_or_self(self, sort: str) -> set[str]:
        out = {sort}
        stack = [sort]
        while stack:
            for child in self.children(stack.pop()):
                if child not in out:
                    out.add(child)
                    stack.append(child)
        return out


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<var>[A-Z][A-Za-z0-9_]*)"
    r"|(?P<name>[a-z][a-z0-9_-]*)"
    r"|(?P<neq>!=)"
    r"|(?P<punct>[(),.{}=<-]))"
)

_SECTIONS = ("sorts", "statics", "fluents", "actions", "axioms")


def _tokenize(line: str, lineno: int) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if m is None:
            if line[pos:].strip() == "":
                break
            raise DescriptionError(
                f"line {lineno}: cannot tokenize {line[pos:].strip()!r}")
        tokens.append(m.group(m.lastgroup))
        pos = m.end()
    return tokens


def is_variable(term: str) -> bool:
    return term[0].isupper()


class _Parser:
    def __init__(self, resolution: str):
        self.desc = SystemDescription(resolution=resolution, sorts={}, statics={},
                                      fluents={}, actions={}, axioms=())
        self.axioms: list[Axiom] = []

    # one statement = one token list (already '.'-terminated)
    def statement(self, section: str, tokens: list[str], lineno: int) -> None:
        if tokens[-1] != ".":
            raise DescriptionError(f"line {lineno}: statement must end with '.'")
        toks = tokens[:-1]
        if not toks:
            raise DescriptionError(f"line {lineno}: empty statement")
        if section == "sorts":
            self._sort_stmt(toks, lineno)
        elif section in ("statics", "fluents", "actions"):
            self._decl_stmt(section, toks, lineno)
        elif section == "axioms":
            self._axiom_stmt(toks, lineno)
        else:
            raise DescriptionError(f"line {lineno}: statement outside any section")

    def _sort_stmt(self, toks: list[str], lineno: int) -> None:
        i = 0
        name = toks[i]
        if is_variable(name):
            raise DescriptionError(f"line {lineno}: sort name must be lowercase")
        i += 1
        parents: list[str] = []
        members: list[str] = []
        while i < len(toks) and toks[i] == "<":
            parents.append(toks[i + 1])
            i += 2
        if i < len(toks) and toks[i] == "=":
            if toks[i + 1] != "{" or toks[-1] != "}":
                raise DescriptionError(f"line {lineno}: malformed member set")
            body = toks[i + 2:-1]
            expect_name = True
            for t in body:
                if expect_name:
                    if t == "," or is_variable(t):
                        raise DescriptionError(f"line {lineno}: malformed member set")
                    members.append(t)
                    expect_name = False
                else:
                    if t != ",":
                        raise DescriptionError(f"line {lineno}: malformed member set")
                    expect_name = True
            i = len(toks)
        if i != len(toks):
            raise DescriptionError(f"line {lineno}: trailing tokens in sort declaration")
        decl = self.desc.sorts.get(name)
        if decl is None:
            decl = SortDecl(name=name)
            self.desc.sorts[name] = decl
        decl.parents = tuple(dict.fromkeys(decl.parents + tuple(parents)))
        decl.members = tuple(dict.fromkeys(decl.members + tuple(members)))
        for parent in parents:
            if parent not in self.desc.sorts:
                self.desc.sorts[parent] = SortDecl(name=parent)

    def _decl_stmt(self, section: str, toks: list[str], lineno: int) -> None:
        name = toks[0]
        if is_variable(name):
            raise DescriptionError(f"line {lineno}: predicate names are lowercase")
        args: list[str] = []
        if len(toks) > 1:
            if toks[1] != "(" or toks[-1] != ")":
                raise DescriptionError(f"line {lineno}: malformed declaration")
            expect = "name"
            for t in toks[2:-1]:
                if expect == "name":
                    if t == "," or is_variable(t):
                        raise DescriptionError(f"line {lineno}: malformed declaration")
                    args.append(t)
                    expect = "comma"
                else:
                    if t != ",":
                        raise DescriptionError(f"line {lineno}: malformed declaration")
                    expect = "name"
        table = getattr(self.desc, section)
        if name in self.desc.statics or name in self.desc.fluents or name in self.desc.actions:
            raise DescriptionError(f"line {lineno}: {name!r} declared twice")
        table[name] = tuple(args)

    # -- axiom parsing

    def _parse_atom(self, toks: list[str], pos: int, lineno: int) -> tuple[Literal, int]:
        positive = True
        if toks[pos] == "-":
            positive = False
            pos += 1
        name = toks[pos]
        if is_variable(name) or name in ("(", ")", ","):
            raise DescriptionError(f"line {lineno}: expected atom, got {name!r}")
        pos += 1
        args: list[str] = []
        if pos < len(toks) and toks[pos] == "(":
            pos += 1
            expect = "term"
            while pos < len(toks):
                t = toks[pos]
                if t == ")":
                    pos += 1
                    break
                if expect == "term":
                    args.append(t)
                    expect = "sep"
                else:
                    if t != ",":
                        raise DescriptionError(f"line {lineno}: malformed argument list")
                    expect = "term"
                pos += 1
            else:
                raise DescriptionError(f"line {lineno}: unterminated argument list")
        return Literal(name=name, args=tuple(args), positive=positive), pos

    def _parse_body(self, toks: list[str], pos: int, lineno: int) -> list:
        items: list = []
        while pos < len(toks):
            # inequality: TERM != TERM
            if pos + 2 < len(toks) and toks[pos + 1] == "!=":
                items.append(Inequality(toks[pos], toks[pos + 2]))
                pos += 3
            else:
                lit, pos = self._parse_atom(toks, pos, lineno)
                items.append(lit)
            if pos < len(toks):
                if toks[pos] != ",":
                    raise DescriptionError(f"line {lineno}: expected ',' in body")
                pos += 1
        return items

    def _axiom_stmt(self, toks: list[str], lineno: int) -> None:
        if toks[0] == "impossible":
            trigger, pos = self._parse_atom(toks, 1, lineno)
            if not trigger.positive:
                raise DescriptionError(f"line {lineno}: action atom cannot be negated")
            body: list = []
            if pos < len(toks):
                if toks[pos] != "if":
                    raise DescriptionError(f"line {lineno}: expected 'if'")
                body = self._parse_body(toks, pos + 1, lineno)
            self.axioms.append(Axiom(AxiomKind.EXECUTABILITY, trigger=trigger,
                                     head=None, body=tuple(body), line=lineno))
            return

        first, pos = self._parse_atom(toks, 0, lineno)
        if pos < len(toks) and toks[pos] == "causes":
            if not first.positive:
                raise DescriptionError(f"line {lineno}: action atom cannot be negated")
            head, pos = self._parse_atom(toks, pos + 1, lineno)
            body = []
            if pos < len(toks):
                if toks[pos] != "if":
                    raise DescriptionError(f"line {lineno}: expected 'if'")
                body = self._parse_body(toks, pos + 1, lineno)
            self.axioms.append(Axiom(AxiomKind.CAUSAL_LAW, trigger=first, head=head,
                                     body=tuple(body), line=lineno))
            return
        if pos < len(toks) and toks[pos] == "if":
            body = self._parse_body(toks, pos + 1, lineno)
            if not body:
                raise DescriptionError(f"line {lineno}: state constraint needs a body")
            self.axioms.append(Axiom(AxiomKind.STATE_CONSTRAINT, trigger=None,
                                     head=first, body=tuple(body), line=lineno))
            return
        raise DescriptionError(f"line {lineno}: unrecognized axiom form")


def _check_sort_dag(desc: SystemDescription) -> None:
    visiting: set[str] = set()
    done: set[str] = set()

    def visit(name: str) -> None:
        if name in done:
            return
        if name in visiting:
            raise DescriptionError(f"sort hierarchy has a cycle through {name!r}")
        visiting.add(name)
        for parent in desc.sorts[name].parents:
            if parent not in desc.sorts:
                raise UndeclaredSymbol(f"sort {name!r} has undeclared parent {parent!r}")
            visit(parent)
        visiting.discard(name)
        done.add(name)

    for name in desc.sorts:
        visit(name)


def _sorts_compatible(desc: SystemDescription, a: str, b: str) -> bool:
    return bool(desc.descendants_or_self(a) & desc.descendants_or_self(b))


def _check_axiom_symbols(desc: SystemDescription, axiom: Axiom) -> None:
    """Arity, declaredness, and variable sort coherence for one axiom."""

    var_sorts: dict[str, list[str]] = {}

    def note_positions(lit: Literal, table: dict[str, tuple[str, ...]], role: str) -> None:
        decl = table.get(lit.name)
        if decl is None:
            raise UndeclaredSymbol(
                f"line {axiom.line}: {role} {lit.name!r} is not declared")
        if len(decl) != len(lit.args):
            raise SortError(
                f"line {axiom.line}: {lit.name!r} takes {len(decl)} arguments, "
                f"got {len(lit.args)}")
        for term, sort in zip(lit.args, decl):
            if is_variable(term):
                var_sorts.setdefault(term, []).append(sort)

    if axiom.trigger is not None:
        note_positions(axiom.trigger, desc.actions, "action")
    if axiom.head is not None:
        if axiom.head.name not in desc.fluents:
            raise UndeclaredSymbol(
                f"line {axiom.line}: head {axiom.head.name!r} is not a declared fluent")
        note_positions(axiom.head, desc.fluents, "fluent")
    for item in axiom.body:
        if isinstance(item, Inequality):
            continue
        if item.name in desc.fluents:
            note_positions(item, desc.fluents, "fluent")
        elif item.name in desc.statics:
            note_positions(item, desc.statics, "static")
        else:
            raise UndeclaredSymbol(
                f"line {axiom.line}: body symbol {item.name!r} is not a declared "
                "fluent or static")

    for var, sorts in var_sorts.items():
        for other in sorts[1:]:
            if not _sorts_compatible(desc, sorts[0], other):
                raise SortError(
                    f"line {axiom.line}: variable {var} used at incompatible sorts "
                    f"{sorts[0]!r} and {other!r}")

    for item in axiom.body:
        if isinstance(item, Inequality):
            for term in (item.left, item.right):
                if is_variable(term) and term not in var_sorts:
                    raise SortError(
                        f"line {axiom.line}: variable {term} appears only in an "
                        "inequality, so its sort is unknown")

    # Direct self-feeding through negation is never admitted.
    if axiom.kind == AxiomKind.STATE_CONSTRAINT:
        for item in axiom.body:
            if (isinstance(item, Literal) and item.name == axiom.head.name
                    and item.args == axiom.head.args
                    and item.positive != axiom.head.positive):
                raise DescriptionError(
                    f"line {axiom.line}: constraint head feeds on its own negation")


def _same_atom_possible(body_lit: Literal, head: Literal, axiom: Axiom) -> bool:
    """Can this body literal and the head ever ground to the same atom?
    The rule's inequalities count: loc(T,P) vs loc(T,Q) with P != Q cannot."""
    classes: dict[str, str] = {}

    def find(t: str) -> str:
        while classes.get(t, t) != t:
            t = classes[t]
        return t

    for a, b in zip(body_lit.args, head.args):
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        if not is_variable(ra) and not is_variable(rb):
            return False  # two distinct constants
        if is_variable(ra):
            classes[ra] = rb
        else:
            classes[rb] = ra
    for item in axiom.body:
        if isinstance(item, Inequality) and find(item.left) == find(item.right):
            return False  # unification would violate the inequality filter
    return True


def _check_stratified(desc: SystemDescription, axioms: list[Axiom]) -> None:
    """Reject descriptions where deriving one sign of a predicate can rest,
    through constraint chains, on the opposite sign of the same predicate
    (the closure would not be uniquely determined). Same-predicate edges
    whose instances are provably distinct atoms (inequality-guarded, as in
    location uniqueness) do not count."""
    edges: dict[tuple[str, bool], set[tuple[str, bool]]] = {}
    for ax in axioms:
        if ax.kind != AxiomKind.STATE_CONSTRAINT:
            continue
        head = (ax.head.name, ax.head.positive)
        for item in ax.body:
            if not isinstance(item, Literal) or item.name not in desc.fluents:
                continue
            if (item.name == ax.head.name
                    and not _same_atom_possible(item, ax.head, ax)):
                continue
            edges.setdefault((item.name, item.positive), set()).add(head)

    def reaches(src: tuple[str, bool], dst: tuple[str, bool]) -> bool:
        seen = {src}
        stack = [src]
        while stack:
            for nxt in edges.get(stack.pop(), ()):
                if nxt == dst:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    preds = {name for (name, _sign) in edges}
    for ax in axioms:
        if ax.kind == AxiomKind.STATE_CONSTRAINT:
            preds.add(ax.head.name)
    for name in sorted(preds):
        pos, neg = (name, True), (name, False)
        if reaches(pos, neg) or reaches(neg, pos):
            raise DescriptionError(
                f"state constraints on {name!r} are not stratified: one sign "
                "of the predicate feeds the derivation of the other")


def parse_description(text: str | bytes, resolution: str = "coarse") -> SystemDescription:
    """Parse a description file. Raises PARSE_ERROR / SORT_ERROR /
    UNDECLARED_SYMBOL with the offending line number."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    parser = _Parser(resolution)
    section: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.rstrip(":") in _SECTIONS and line.endswith(":"):
            section = line.rstrip(":")
            continue
        if section is None:
            raise DescriptionError(f"line {lineno}: statement before any section header")
        tokens = _tokenize(line, lineno)
        parser.statement(section, tokens, lineno)

    desc = parser.desc
    _check_sort_dag(desc)
    for axiom in parser.axioms:
        _check_axiom_symbols(desc, axiom)
    _check_stratified(desc, parser.axioms)
    desc.axioms = tuple(parser.axioms)
    return desc


# --- grounding ---------------------------------------------------------------

@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]

    @property
    def full_name(self) -> str:
        return f"{self.name}({','.join(self.args)})" if self.args else self.name

    def __str__(self) -> str:
        return self.full_name


@dataclass(frozen=True)
class GroundAxiom:
    kind: AxiomKind
    trigger: GroundAtom | None
    head: tuple | None  # (atom, positive)
    body: tuple         # ((atom, positive), ...), fluent literals only
    source_line: int = 0


class GroundedDomain:
    """A variable-free domain: enumerated atoms, actions, and axioms, plus a
    compiled form used by the transition function.

    Ground axioms are the sort-exhaustive instances that can still fire:
    instances whose body contains a static literal false in this instance are
    elided, and true static body literals are consumed, so remaining bodies
    mention only fluent atoms.
    """

    def __init__(self, description: SystemDescription,
                 members: dict[str, tuple[str, ...]],
                 statics_true: frozenset,
                 atoms: tuple, ground_actions: tuple, ground_axioms: tuple):
        self.description = description
        self.members = members
        self.statics_true = statics_true
        self.atoms = atoms
        self.ground_actions = ground_actions
        self.ground_axioms = ground_axioms
        self._compile()

    def _compile(self) -> None:
        self.atom_id = {atom: i for i, atom in enumerate(self.atoms)}
        self.action_id = {a: i for i, a in enumerate(self.ground_actions)}
        n_actions = len(self.ground_actions)
        self.exec_bodies: list[list[tuple]] = [[] for _ in range(n_actions)]
        self.causal_laws: list[list[tuple]] = [[] for _ in range(n_actions)]
        self.constraints: list[tuple] = []  # (head_id, val, body_ids)

        def body_ids(body) -> tuple:
            return tuple((self.atom_id[atom], pos) for atom, pos in body)

        for gax in self.ground_axioms:
            if gax.kind == AxiomKind.EXECUTABILITY:
                idx = self.action_id[GroundAction(*gax.trigger)]
                self.exec_bodies[idx].append(body_ids(gax.body))
            elif gax.kind == AxiomKind.CAUSAL_LAW:
                idx = self.action_id[GroundAction(*gax.trigger)]
                atom, val = gax.head
                self.causal_laws[idx].append((self.atom_id[atom], val, body_ids(gax.body)))
            else:
                atom, val = gax.head
                self.constraints.append((self.atom_id[atom], val, body_ids(gax.body)))

        self.rules_by_atom: dict[int, list[int]] = {}
        for rule_idx, (head_id, _val, body) in enumerate(self.constraints):
            touched = {head_id} | {atom_id for atom_id, _p in body}
            for atom_id in touched:
                self.rules_by_atom.setdefault(atom_id, []).append(rule_idx)

        self.statically_blocked = frozenset(
            idx for idx in range(n_actions)
            if any(len(body) == 0 for body in self.exec_bodies[idx]))

    def actions_sorted(self) -> list[GroundAction]:
        return sorted(self.ground_actions, key=lambda a: a.full_name)


def _closed_members(desc: SystemDescription,
                    constants: dict[str, list[str]]) -> dict[str, tuple[str, ...]]:
    base: dict[str, set[str]] = {name: set(decl.members)
                                 for name, decl in desc.sorts.items()}
    for sort, consts in constants.items():
        if sort not in base:
            raise UndeclaredSymbol(f"membership given for undeclared sort {sort!r}")
        base[sort].update(consts)
    # propagate members upward through the DAG
    changed = True
    while changed:
        changed = False
        for name, decl in desc.sorts.items():
            for parent in decl.parents:
                before = len(base[parent])
                base[parent].update(base[name])
                changed = changed or len(base[parent]) != before
    return {name: tuple(sorted(vals)) for name, vals in base.items()}


def ground(desc: SystemDescription, constants: dict[str, list[str]],
           statics: frozenset | set | list = (), *,
           allow_empty: bool = False, strict: bool = True) -> GroundedDomain:
    """Instantiate a description over concrete sort memberships and static
    facts. Every sort must be inhabited unless allow_empty is set (restricted
    groundings produced by zooming legitimately empty some sorts).

    With strict=False, axiom constants outside the given memberships are not
    an error: atoms over absent constants read as false, so positive body
    literals over them kill their instance and negative ones are trivially
    satisfied. Zooming uses this to restrict a description to the constants
    relevant to one transition.
    """
    members = _closed_members(desc, constants)
    if not allow_empty:
        for name, vals in members.items():
            if not vals:
                raise GroundingError(f"sort {name!r} has no constants")

    statics_true = frozenset((name, tuple(args)) for name, args in statics)
    for name, args in statics_true:
        decl = desc.statics.get(name)
        if decl is None:
            raise UndeclaredSymbol(f"static fact {name!r} is not declared")
        if len(args) != len(decl):
            raise SortError(f"static {name!r} takes {len(decl)} arguments")
        for const, sort in zip(args, decl):
            if const not in members.get(sort, ()):
                raise UndeclaredSymbol(
                    f"static {atom_str((name, args))}: {const!r} is not in sort {sort!r}")

    atoms = []
    for name in sorted(desc.fluents):
        arg_sorts = desc.fluents[name]
        for combo in product(*(members[s] for s in arg_sorts)):
            atoms.append((name, tuple(combo)))
    atoms_t = tuple(atoms)
    atom_set = set(atoms_t)

    ground_actions = []
    for name in sorted(desc.actions):
        arg_sorts = desc.actions[name]
        for combo in product(*(members[s] for s in arg_sorts)):
            ground_actions.append(GroundAction(name, tuple(combo)))
    ground_actions_t = tuple(ground_actions)
    action_set = {(a.name, a.args) for a in ground_actions_t}

    ground_axioms: list[GroundAxiom] = []
    for axiom in desc.axioms:
        ground_axioms.extend(
            _ground_axiom(desc, axiom, members, statics_true, atom_set,
                          action_set, strict=strict))

    return GroundedDomain(desc, members, statics_true, atoms_t,
                          ground_actions_t, tuple(ground_axioms))


def _term_sorts(desc: SystemDescription, axiom: Axiom) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}

    def note(lit: Literal, table: dict[str, tuple[str, ...]]) -> None:
        for term, sort in zip(lit.args, table[lit.name]):
            out.setdefault(term, []).append(sort)

    if axiom.trigger is not None:
        note(axiom.trigger, desc.actions)
    if axiom.head is not None:
        note(axiom.head, desc.fluents)
    for item in axiom.body:
        if isinstance(item, Literal):
            note(item, desc.fluents if item.name in desc.fluents else desc.statics)
    return out


def _ground_axiom(desc: SystemDescription, axiom: Axiom,
                  members: dict[str, tuple[str, ...]],
                  statics_true: frozenset, atom_set: set, action_set: set,
                  strict: bool = True):
    term_sorts = _term_sorts(desc, axiom)

    # constants appearing in the axiom must inhabit their positions
    candidates: dict[str, tuple[str, ...]] = {}
    for term, sorts in term_sorts.items():
        pools = [set(members[s]) for s in sorts]
        allowed = set.intersection(*pools)
        if is_variable(term):
            candidates[term] = tuple(sorted(allowed))
        elif strict and term not in allowed:
            raise UndeclaredSymbol(
                f"line {axiom.line}: constant {term!r} does not inhabit "
                f"sort(s) {sorted(set(sorts))}")

    variables = sorted(v for v in candidates)

    statics_by_name: dict[str, list[tuple[str, ...]]] = {}
    for name, args in sorted(statics_true):
        statics_by_name.setdefault(name, []).append(args)

    # Join-style enumeration: positive static body literals bind variables
    # first, the rest are enumerated over their candidate pools.
    pos_statics = [it for it in axiom.body
                   if isinstance(it, Literal) and it.positive and it.name in desc.statics]

    def unify(lit: Literal, fact: tuple[str, ...], subst: dict) -> dict | None:
        new = dict(subst)
        for term, value in zip(lit.args, fact):
            if is_variable(term):
                if new.get(term, value) != value:
                    return None
                if value not in candidates[term]:
                    return None
                new[term] = value
            elif term != value:
                return None
        return new

    substs: list[dict] = [{}]
    for lit in pos_statics:
        next_substs = []
        for subst in substs:
            for fact in statics_by_name.get(lit.name, ()):
                ext = unify(lit, fact, subst)
                if ext is not None:
                    next_substs.append(ext)
        substs = next_substs
        if not substs:
            return

    def resolve(term: str, subst: dict) -> str:
        return subst[term] if is_variable(term) else term

    for subst in substs:
        free = [v for v in variables if v not in subst]
        for combo in product(*(candidates[v] for v in free)):
            full = dict(subst)
            full.update(zip(free, combo))
            ok = True
            body_out = []
            for item in axiom.body:
                if isinstance(item, Inequality):
                    if resolve(item.left, full) == resolve(item.right, full):
                        ok = False
                        break
                    continue
                args = tuple(resolve(t, full) for t in item.args)
                ground = (item.name, args)
                if item.name in desc.statics:
                    holds = ground in statics_true
                    if holds != item.positive:
                        ok = False
                        break
                    continue  # satisfied static literal is consumed
                body_out.append((ground, item.positive))
            if not ok:
                continue
            trigger = None
            if axiom.trigger is not None:
                targs = tuple(resolve(t, full) for t in axiom.trigger.args)
                trigger = (axiom.trigger.name, targs)
                if trigger not in action_set:
                    continue  # outside this instance's action space
            head = None
            if axiom.head is not None:
                hargs = tuple(resolve(t, full) for t in axiom.head.args)
                hatom = (axiom.head.name, hargs)
                if hatom not in atom_set:
                    continue
                head = (hatom, axiom.head.positive)
            final_body = []
            for atom, positive in body_out:
                if atom in atom_set:
                    final_body.append((atom, positive))
                elif positive:
                    ok = False  # absent atoms read as false
                    break
                # a negative literal over an absent atom is trivially true
            if not ok:
                continue
            yield GroundAxiom(kind=axiom.kind, trigger=trigger, head=head,
                              body=tuple(final_body), source_line=axiom.line)


# --- states and transitions --------------------------------------------------

class SymbolicState:
    """A complete truth assignment over a domain's ground fluent atoms,
    stored as the set of true atom ids."""

    __slots__ = ("domain", "true_ids")

    def __init__(self, domain: GroundedDomain, true_ids: frozenset):
        self.domain = domain
        self.true_ids = true_ids

    def holds(self, name: str, *args: str) -> bool:
        atom_id = self.domain.atom_id.get((name, tuple(args)))
        if atom_id is None:
            raise KeyError(f"unknown atom {name}({','.join(args)})")
        return atom_id in self.true_ids

    def true_atoms(self) -> list[GroundAtom]:
        return sorted(self.domain.atoms[i] for i in self.true_ids)

    def __eq__(self, other) -> bool:
        return (isinstance(other, SymbolicState)
                and self.domain is other.domain
                and self.true_ids == other.true_ids)

    def __hash__(self) -> int:
        return hash((id(self.domain), self.true_ids))

    def __repr__(self) -> str:
        shown = ", ".join(atom_str(a) for a in self.true_atoms()[:8])
        return f"<SymbolicState {len(self.true_ids)} true: {shown} ...>"


def _body_true(body: tuple, true_ids) -> bool:
    return all((atom_id in true_ids) == positive for atom_id, positive in body)


def applicable_ids(domain: GroundedDomain, true_ids: frozenset, action_idx: int) -> bool:
    return not any(_body_true(body, true_ids)
                   for body in domain.exec_bodies[action_idx])


def applicable(state: SymbolicState, action: GroundAction,
               domain: GroundedDomain) -> bool:
    """False iff some executability condition for this action holds in state."""
    idx = domain.action_id.get(action)
    if idx is None:
        raise KeyError(f"unknown ground action {action.full_name}")
    return applicable_ids(domain, state.true_ids, idx)


def successor_ids(domain: GroundedDomain, true_ids: frozenset,
                  action_idx: int) -> frozenset:
    """Core transition: direct effects, inertia, then prioritized closure
    under the state constraints, verified against the fixpoint equation."""
    for body in domain.exec_bodies[action_idx]:
        for atom_id, positive in body:
            if (atom_id in true_ids) != positive:
                break
        else:
            action = domain.ground_actions[action_idx]
            raise NotApplicable(f"{action.full_name} is blocked in this state")

    effects: dict[int, bool] = {}
    for head_id, val, body in domain.causal_laws[action_idx]:
        if _body_true(body, true_ids):
            if effects.get(head_id, val) != val:
                action = domain.ground_actions[action_idx]
                raise InconsistentState(
                    f"{action.full_name}: contradictory direct effects on "
                    f"{atom_str(domain.atoms[head_id])}")
            effects[head_id] = val

    current = set(true_ids)
    tier: dict[int, int] = {}
    changed: set[int] = set()
    for atom_id, val in effects.items():
        tier[atom_id] = 2
        if (atom_id in current) != val:
            changed.add(atom_id)
        if val:
            current.add(atom_id)
        else:
            current.discard(atom_id)

    fired: list[tuple[int, int, bool]] = []  # (rule_idx, head_id, val)
    constraints = domain.constraints
    rules_by_atom = domain.rules_by_atom

    def fireable(rule_idx: int) -> bool:
        head_id, val, body = constraints[rule_idx]
        if (head_id in current) == val:
            return False
        for atom_id, positive in body:
            if (atom_id in current) != positive:
                return False
        return True

    def apply_head(rule_idx: int) -> None:
        head_id, val, _body = constraints[rule_idx]
        if tier.get(head_id, 0) >= 1:
            # the head already has an established value and it disagrees
            raise (InconsistentState if tier[head_id] == 2 else AmbiguousClosure)(
                f"constraint closure forces both values of "
                f"{atom_str(domain.atoms[head_id])}")
        tier[head_id] = 1
        changed.add(head_id)
        if val:
            current.add(head_id)
        else:
            current.discard(head_id)
        fired.append((rule_idx, head_id, val))

    agenda: set[int] = set()
    for atom_id in changed:
        agenda.update(rules_by_atom.get(atom_id, ()))

    guard = 0
    limit = 4 * (len(domain.atoms) + len(constraints) + 4)
    while True:
        guard += 1
        if guard > limit:
            raise AmbiguousClosure("constraint closure did not stabilize")
        progressed = False
        # certain phase: rules supported entirely by established atoms
        for rule_idx in sorted(agenda):
            if not fireable(rule_idx):
                continue
            head_id, _val, body = constraints[rule_idx]
            certain = True
            for atom_id, _p in body:
                if tier.get(atom_id, 0) < 1:
                    certain = False
                    break
            if certain:
                apply_head(rule_idx)
                agenda.update(rules_by_atom.get(head_id, ()))
                progressed = True
        if progressed:
            continue
        # inertial phase: all remaining fireable rules applied simultaneously
        batch = [idx for idx in sorted(agenda) if fireable(idx)]
        if not batch:
            break
        pending: dict[int, bool] = {}
        for rule_idx in batch:
            head_id, val, _body = constraints[rule_idx]
            if pending.get(head_id, val) != val:
                raise AmbiguousClosure(
                    f"simultaneous constraints disagree on "
                    f"{atom_str(domain.atoms[head_id])}")
            pending[head_id] = val
        for rule_idx in batch:
            if fireable(rule_idx):
                apply_head(rule_idx)
                head_id = constraints[rule_idx][0]
                agenda.update(rules_by_atom.get(head_id, ()))
        for rule_idx in batch:
            _h, _v, body = constraints[rule_idx]
            if not _body_true(body, current):
                raise AmbiguousClosure(
                    "constraint applications undermine each other's support")

    result = frozenset(current)

    # Verification against new = Cn(effects ∪ (old ∩ new)):
    # (1) every fired rule keeps its support in the final state;
    for rule_idx, head_id, val in fired:
        _h, _v, body = domain.constraints[rule_idx]
        if not _body_true(body, result):
            raise AmbiguousClosure(
                f"derived value of {atom_str(domain.atoms[head_id])} lost its "
                "support; closure is not uniquely determined")
    # (2) every constraint touching a changed atom is satisfied (the rest
    #     held in the closed pre-state and saw no relevant change).
    checked: set[int] = set()
    for atom_id in changed:
        for rule_idx in domain.rules_by_atom.get(atom_id, ()):
            if rule_idx in checked:
                continue
            checked.add(rule_idx)
            head_id, val, body = domain.constraints[rule_idx]
            if _body_true(body, result) and (head_id in result) != val:
                raise InconsistentState(
                    f"state constraint violated after transition "
                    f"(head {atom_str(domain.atoms[head_id])})")
    # (3) direct effects survived.
    for atom_id, val in effects.items():
        if (atom_id in result) != val:
            raise InconsistentState("a direct effect was overridden by closure")

    return result


def successor(state: SymbolicState, action: GroundAction,
              domain: GroundedDomain) -> SymbolicState:
    idx = domain.action_id.get(action)
    if idx is None:
        raise KeyError(f"unknown ground action {action.full_name}")
    return SymbolicState(domain, successor_ids(domain, state.true_ids, idx))


def closed_under_constraints(domain: GroundedDomain, true_ids: frozenset) -> bool:
    return all(not _body_true(body, true_ids) or (head_id in true_ids) == val
               for head_id, val, body in domain.constraints)


def build_state(domain: GroundedDomain, init_literals) -> SymbolicState:
    """Complete an initial literal set into a state: explicit facts, their
    constraint closure, then closed-world false for the rest.

    Closure at this stage fires only from grounded values (explicit facts
    and what they derive), never from closed-world assumptions. If the
    completed state still violates a constraint, the closed-world completion
    would have to guess which assumption to retract, so the init is rejected
    as ambiguous rather than resolved silently.
    """
    grounded: dict[int, bool] = {}
    for item in init_literals:
        if isinstance(item, tuple) and len(item) == 2 and isinstance(item[1], bool):
            (name, args), val = item
        else:
            (name, args), val = item, True
        atom_id = domain.atom_id.get((name, tuple(args)))
        if atom_id is None:
            raise InvalidInit(f"unknown init atom {atom_str((name, tuple(args)))}")
        if grounded.get(atom_id, val) != val:
            raise InvalidInit(f"contradictory init values for "
                              f"{atom_str(domain.atoms[atom_id])}")
        grounded[atom_id] = val

    for _round in range(len(domain.atoms) + 2):
        progressed = False
        for head_id, val, body in domain.constraints:
            if all(grounded.get(atom_id) == positive for atom_id, positive in body):
                if grounded.get(head_id, val) != val:
                    raise InvalidInit(
                        f"init facts contradict constraint closure on "
                        f"{atom_str(domain.atoms[head_id])}")
                if head_id not in grounded:
                    grounded[head_id] = val
                    progressed = True
        if not progressed:
            break

    result = frozenset(atom_id for atom_id, val in grounded.items() if val)
    if not closed_under_constraints(domain, result):
        raise InvalidInit(
            "closed-world completion of the init violates a state "
            "constraint; the initial state is ambiguous or inconsistent")
    return SymbolicState(domain, result)
