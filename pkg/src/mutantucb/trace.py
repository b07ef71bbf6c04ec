"""Event traces: recording, JSONL serialization, replay and validation.

A trace file is line-delimited JSON. The first line is the header::

    {"type": "header", "schema": 1, "algorithm": "mutant-ucb",
     "params": {...}, "seed": 7, "space": {...}}

Every following line is one event. Event types and their fields:

``init_train``      arm, reward, epoch, config, origin, parent
                    First sub-train of a newly created arm. ``origin`` is
                    ``sample`` (fresh draw), ``offspring`` (EA child) or
                    ``promote`` (a Hyperband survivor retrained from scratch,
                    same config as ``parent``).
``select``          t, arm, index -- optimistic choice at round t.
``sub_train``       arm, reward, epoch
``mutate``          parent, child, child_reward, config, start
                    Mutant created from ``parent`` and trained once; ``start``
                    is the training progress it inherited (warm start).
``finalize_train``  arm, reward, epoch
``bracket``         s, n, r -- Hyperband bracket marker (informational).
``replace``         removed, added -- EA population replacement (informational).
``select_final``    arm, consumed, warnings -- always the last event.

``epoch`` is the arm's ``trains`` counter after the reward. Rewards are
written with ``repr`` precision so a replay reproduces means bit-for-bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .core import ucb_index
from .errors import InconsistentTrace, SchemaMismatch, TraceError, TruncatedTrace

SCHEMA_VERSION = 1

REWARD_EVENTS = ("init_train", "sub_train", "mutate", "finalize_train")
EVENT_TYPES = REWARD_EVENTS + ("select", "bracket", "replace", "select_final")

# Algorithms whose arms may never exceed N trains.
CAPPED = ("mutant-ucb", "hyperband")


@dataclass
class RunResult:
    algorithm: str
    seed: int
    selected: int
    config: Any
    trains: int
    mean: float
    tested_models: int
    n_arms: int
    consumed: int
    incumbent: list[float] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    trace: "EventTrace | None" = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict:
        data = asdict(self)
        data.pop("trace")
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "RunResult":
        return cls(**data)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> "RunResult":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class EventTrace:
    header: dict
    events: list[dict] = field(default_factory=list)

    def append(self, type_: str, **fields: Any) -> None:
        self.events.append({"type": type_, **fields})

    def dumps(self) -> str:
        lines = [json.dumps(self.header, separators=(",", ":"))]
        lines.extend(json.dumps(e, separators=(",", ":")) for e in self.events)
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "EventTrace":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise TruncatedTrace("trace has no header")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise TraceError(f"header is not valid JSON: {exc}") from None
        if not isinstance(header, dict) or header.get("type") != "header":
            raise TraceError("first line is not a header object")
        if header.get("schema") != SCHEMA_VERSION:
            raise SchemaMismatch(
                f"trace schema {header.get('schema')!r} is not supported (expected {SCHEMA_VERSION})"
            )
        events = []
        for i, line in enumerate(lines[1:]):
            try:
                events.append(json.loads(line))
            except json.JSONDecodeError:
                raise TruncatedTrace("line is not valid JSON", index=i) from None
        return cls(header=header, events=events)

    @classmethod
    def load(cls, path: str | Path) -> "EventTrace":
        return cls.loads(Path(path).read_text())


class _ArmState:
    __slots__ = ("total", "trains", "pulls", "progress", "parent", "config", "origin", "mutants")

    def __init__(self, config: Any, parent: int | None, origin: str, progress: int) -> None:
        self.total = 0.0
        self.trains = 0
        self.pulls = 0
        self.progress = progress
        self.parent = parent
        self.config = config
        self.origin = origin
        self.mutants = 0

    @property
    def mean(self) -> float:
        return self.total / self.trains


@dataclass
class Replay:
    """Outcome of replaying a trace: the result plus every arm's final state."""

    result: RunResult
    arms: list[dict]
    counts: dict[str, int]


def _reward(event: dict, key: str, i: int) -> float:
    value = event.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise InconsistentTrace(f"{event.get('type')} has non-numeric {key} {value!r}", i)
    if not 0.0 <= value <= 1.0:
        raise InconsistentTrace(f"{event.get('type')} {key}={value} outside [0, 1]", i)
    return float(value)


def replay(trace: EventTrace) -> Replay:
    """Rebuild arm records and the run result from a trace alone.

    Checks every trace invariant on the way and raises a ``TraceError``
    subclass naming the first offending event.
    """
    header = trace.header
    events = trace.events
    if not events:
        raise TruncatedTrace("no events after header")
    params = header.get("params", {})
    algorithm = header.get("algorithm")
    E = params.get("E")
    cap = params.get("N") if algorithm in CAPPED and not params.get("scripted_bernoulli") else None

    arms: list[_ArmState] = []
    counts: dict[str, int] = {}
    incumbent: list[float] = []
    best = -math.inf
    rewards = 0
    pending_select: int | None = None
    final: dict | None = None

    def arm_at(i: int, key: str, event: dict) -> _ArmState:
        k = event.get(key)
        if not isinstance(k, int) or not 0 <= k < len(arms):
            raise InconsistentTrace(f"{event['type']} refers to unknown arm {k!r}", i)
        return arms[k]

    def credit(i: int, arm_id: int, state: _ArmState, reward: float) -> None:
        nonlocal best, rewards
        state.total += reward
        state.trains += 1
        state.pulls += 1
        state.progress += 1
        if cap is not None and state.trains > cap:
            raise InconsistentTrace(f"arm {arm_id} trained {state.trains} times, cap is {cap}", i)
        best = max(best, state.mean)
        incumbent.append(best)
        rewards += 1

    for i, event in enumerate(events):
        if final is not None:
            raise InconsistentTrace("event after select_final", i)
        kind = event.get("type") if isinstance(event, dict) else None
        if kind not in EVENT_TYPES:
            raise InconsistentTrace(f"unknown event type {kind!r}", i)
        counts[kind] = counts.get(kind, 0) + 1

        if pending_select is not None:
            target = event.get("parent") if kind == "mutate" else event.get("arm")
            if kind not in ("sub_train", "mutate") or target != pending_select:
                raise InconsistentTrace(f"select of arm {pending_select} not followed by its pull", i)
            pending_select = None

        if kind == "init_train":
            if event.get("arm") != len(arms):
                raise InconsistentTrace(f"new arm id {event.get('arm')!r}, expected {len(arms)}", i)
            parent = event.get("parent")
            if parent is not None and not (isinstance(parent, int) and 0 <= parent < len(arms)):
                raise InconsistentTrace(f"unknown parent {parent!r}", i)
            state = _ArmState(event.get("config"), parent, event.get("origin", "sample"), 0)
            arms.append(state)
            credit(i, len(arms) - 1, state, _reward(event, "reward", i))
            if event.get("epoch") != state.trains:
                raise InconsistentTrace(f"epoch {event.get('epoch')!r} != trains {state.trains}", i)
        elif kind in ("sub_train", "finalize_train"):
            state = arm_at(i, "arm", event)
            credit(i, event["arm"], state, _reward(event, "reward", i))
            if event.get("epoch") != state.trains:
                raise InconsistentTrace(f"epoch {event.get('epoch')!r} != trains {state.trains}", i)
        elif kind == "mutate":
            parent = arm_at(i, "parent", event)
            if event.get("child") != len(arms):
                raise InconsistentTrace(f"mutant id {event.get('child')!r}, expected {len(arms)}", i)
            before = parent.mean
            parent.pulls += 1
            parent.mutants += 1
            state = _ArmState(event.get("config"), event["parent"], "mutate", int(event.get("start", 0)))
            arms.append(state)
            credit(i, len(arms) - 1, state, _reward(event, "child_reward", i))
            if parent.mean != before:
                raise InconsistentTrace("mutation changed the parent's mean", i)
        elif kind == "select":
            state = arm_at(i, "arm", event)
            if E is not None:
                expected = ucb_index(state.mean, state.pulls, E)
                if event.get("index") != expected:
                    raise InconsistentTrace(
                        f"index {event.get('index')!r} for arm {event['arm']} does not match {expected!r}", i
                    )
            pending_select = event["arm"]
        elif kind == "replace":
            arm_at(i, "removed", event)
            arm_at(i, "added", event)
        elif kind == "select_final":
            arm_at(i, "arm", event)
            if event.get("consumed") != rewards:
                raise InconsistentTrace(
                    f"ledger says {event.get('consumed')!r} sub-trains but trace holds {rewards} rewards", i
                )
            final = event

    if pending_select is not None:
        raise TruncatedTrace("trace ends after a select event")
    if final is None:
        raise TruncatedTrace("trace has no select_final event")

    for k, state in enumerate(arms):
        if state.pulls - state.trains != state.mutants:
            raise InconsistentTrace(f"arm {k}: pulls - trains != mutant count")
    chosen = arms[final["arm"]]
    if algorithm == "mutant-ucb" and cap is not None and chosen.trains != cap:
        raise InconsistentTrace(f"finalized arm {final['arm']} ends with {chosen.trains} trains, expected {cap}")

    result = RunResult(
        algorithm=algorithm,
        seed=header.get("seed"),
        selected=final["arm"],
        config=chosen.config,
        trains=chosen.trains,
        mean=chosen.mean,
        tested_models=sum(1 for a in arms if a.origin != "promote"),
        n_arms=len(arms),
        consumed=rewards,
        incumbent=incumbent,
        warnings=list(final.get("warnings", [])),
    )
    arm_rows = [
        {
            "arm": k,
            "mean": a.mean,
            "pulls": a.pulls,
            "trains": a.trains,
            "mutants": a.mutants,
            "parent": a.parent,
            "origin": a.origin,
            "train_progress": a.progress,
            "config": a.config,
        }
        for k, a in enumerate(arms)
    ]
    return Replay(result=result, arms=arm_rows, counts=counts)


def replay_trace(path: str | Path) -> RunResult:
    """Load a trace file and reconstruct its ``RunResult`` without the landscape."""
    return replay(EventTrace.load(path)).result


def mutant_children(events: Iterable[dict]) -> dict[int, int]:
    out: dict[int, int] = {}
    for e in events:
        if e.get("type") == "mutate":
            out[e["parent"]] = out.get(e["parent"], 0) + 1
    return out
