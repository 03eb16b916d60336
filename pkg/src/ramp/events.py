"""Execution events: the timestamped record emitted by the skill simulator.

Events are the single interface between the simulator and the world model:
`ramp.model.apply_event` folds them into a `WorldState`, and the metrics
pipeline reads peg insertions off them. Success events carry their full
effect payload (destination, mated connections, ...) so that applying an
event never needs to consult the goal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .errors import MalformedTrace


class EventKind(Enum):
    SKILL_STARTED = "skill_started"
    SKILL_SUCCEEDED = "skill_succeeded"
    SKILL_FAILED = "skill_failed"
    PEG_INSERTED = "peg_inserted"
    PEG_DROPPED = "peg_dropped"
    RUN_ENDED = "run_ended"


@dataclass(frozen=True)
class ExecutionEvent:
    """One timestamped simulator event.

    `args` are the skill's ground arguments. `payload` holds effect details
    keyed by event kind:
      move success     -> {"destination": place}
      pick_up success  -> {"part": part, "thing": beam_or_peg}
      assemble success -> {"beam": id, "mated": [connection keys]}
      peg_inserted     -> {"connection": key, "peg": id}
      peg_dropped      -> {"peg": id}
      skill_failed     -> {"reason": "exhausted_retries" | "precondition"}
    """

    t_s: float
    kind: EventKind
    skill: str = ""
    args: tuple[str, ...] = ()
    attempt_index: int = 0
    payload: dict = field(default_factory=dict)

    def to_json(self) -> str:
        obj = {
            "t_s": self.t_s,
            "kind": self.kind.value,
            "skill": self.skill,
            "args": list(self.args),
            "attempt_index": self.attempt_index,
            "payload": self.payload,
        }
        return json.dumps(obj, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "ExecutionEvent":
        try:
            obj = json.loads(line)
            return cls(
                t_s=float(obj["t_s"]),
                kind=EventKind(obj["kind"]),
                skill=obj.get("skill", ""),
                args=tuple(obj.get("args", ())),
                attempt_index=int(obj.get("attempt_index", 0)),
                payload=obj.get("payload", {}),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise MalformedTrace(f"bad event line: {exc}") from exc


def check_monotone(events: list[ExecutionEvent]) -> None:
    """Raise MalformedTrace unless timestamps are nondecreasing."""
    last = 0.0
    for ev in events:
        if ev.t_s < last - 1e-12:
            raise MalformedTrace(
                f"timestamp regression at {ev.kind.value}: {ev.t_s} < {last}"
            )
        last = max(last, ev.t_s)
