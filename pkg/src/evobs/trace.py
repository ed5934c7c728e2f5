"""Observation data model: entities, states, traces and their persistence.

A trace is the observer's view of one run. Each state holds uniquely tagged
entity snapshots; cross-state identity only exists through the recognition
relation built later, never by reusing an :class:`EntityRef`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Any, Iterable, Iterator

FORMAT_VERSION = 1

ORDER_TOTAL = "total"
ORDER_DISCRETE = "discrete"
ORDER_NONE = "none"
_ORDERS = (ORDER_TOTAL, ORDER_DISCRETE, ORDER_NONE)


class TraceFormatError(ValueError):
    """Raised when a trace file cannot be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def freeze(value: Any) -> Any:
    """Turn JSON-ish values into hashable ones (lists become tuples)."""
    if isinstance(value, (list, tuple)):
        return tuple(freeze(v) for v in value)
    return value


def thaw(value: Any) -> Any:
    if isinstance(value, tuple):
        return [thaw(v) for v in value]
    return value


@dataclass(frozen=True, order=True)
class EntityRef:
    state_index: int
    local_id: str

    def __str__(self) -> str:
        return f"{self.state_index}:{self.local_id}"


@dataclass(frozen=True)
class EntitySnapshot:
    ref: EntityRef
    tag: tuple
    chars: tuple

    def __post_init__(self):
        object.__setattr__(self, "tag", freeze(self.tag))
        object.__setattr__(self, "chars", freeze(self.chars))


@dataclass(frozen=True)
class Dimension:
    """One characteristic of the character space.

    ``order`` is ``"total"`` for numerically ordered values, ``"discrete"``
    for a partial order in which distinct values are incomparable (only the
    zero element sits below everything), and ``"none"`` for orderless
    characteristics.
    """

    name: str
    domain: str
    order: str = ORDER_TOTAL
    zero: Any = 0

    def __post_init__(self):
        if self.order not in _ORDERS:
            raise ValueError(f"unknown order kind {self.order!r} for dimension {self.name!r}")
        object.__setattr__(self, "zero", freeze(self.zero))

    @property
    def ordered(self) -> bool:
        return self.order != ORDER_NONE

    def lt(self, a: Any, b: Any) -> bool:
        """Strict ``a <_i b`` under this dimension's order."""
        if self.order == ORDER_TOTAL:
            return a < b
        if self.order == ORDER_DISCRETE:
            return a == self.zero and b != self.zero
        return False


@dataclass(frozen=True)
class CharSpaceSchema:
    dimensions: tuple[Dimension, ...]

    def __post_init__(self):
        object.__setattr__(self, "dimensions", tuple(self.dimensions))

    def __len__(self) -> int:
        return len(self.dimensions)

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.dimensions]

    def to_json(self) -> list[dict]:
        return [
            {"name": d.name, "domain": d.domain, "order": d.order, "zero": thaw(d.zero)}
            for d in self.dimensions
        ]

    @classmethod
    def from_json(cls, data: list[dict]) -> "CharSpaceSchema":
        return cls(tuple(Dimension(d["name"], d["domain"], d["order"], d["zero"]) for d in data))


@dataclass(frozen=True)
class State:
    index: int
    entities: tuple[EntitySnapshot, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entities", tuple(self.entities))


CausalEvent = tuple[EntityRef, EntityRef]


@dataclass
class Trace:
    """A temporally ordered sequence of observed states plus causal evidence."""

    states: list[State]
    causal_events: list[CausalEvent]
    model: str
    schema: CharSpaceSchema
    seed: int | None = None
    config_digest: str = ""
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.states = list(self.states)
        # canonical order: grouped by child state, stable within a state
        self.causal_events = sorted(
            ((p, c) for p, c in self.causal_events), key=lambda e: e[1].state_index
        )

    def __len__(self) -> int:
        return len(self.states)

    def entities(self) -> Iterator[EntitySnapshot]:
        for state in self.states:
            yield from state.entities

    def _build_index(self) -> dict:
        if self._index is None:
            self._index = {}
            for snap in self.entities():
                self._index.setdefault(snap.ref, snap)
        return self._index

    def snapshot(self, ref: EntityRef) -> EntitySnapshot:
        try:
            return self._build_index()[ref]
        except KeyError:
            raise UnknownEntityError(ref) from None

    def __contains__(self, ref: EntityRef) -> bool:
        return ref in self._build_index()

    @property
    def entity_count(self) -> int:
        return sum(len(s.entities) for s in self.states)


class UnknownEntityError(KeyError):
    def __str__(self) -> str:
        return f"unknown entity {self.args[0]}"


# --- validation -----------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    state_index: int | None = None

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


def validate_trace(trace: Trace) -> list[Violation]:
    """Return every well-formedness violation; an empty list means valid."""
    out: list[Violation] = []
    arity = len(trace.schema)
    known: set[EntityRef] = set()
    for pos, state in enumerate(trace.states):
        if state.index != pos:
            out.append(Violation("gapped index", f"state at position {pos} has index {state.index}", state.index))
        tags: dict = {}
        ids: set[str] = set()
        for snap in state.entities:
            ref = snap.ref
            if ref.state_index != state.index:
                out.append(Violation(
                    "misplaced entity", f"{ref} listed in state {state.index}", state.index))
            if ref.local_id in ids:
                out.append(Violation("duplicate id", f"id {ref.local_id!r} repeated", state.index))
            ids.add(ref.local_id)
            if snap.tag in tags:
                out.append(Violation(
                    "duplicate tag",
                    f"{tags[snap.tag]} and {ref} share tag {thaw(snap.tag)}",
                    state.index,
                ))
            else:
                tags[snap.tag] = ref
            if len(snap.chars) != arity:
                out.append(Violation(
                    "arity mismatch", f"{ref} has {len(snap.chars)} chars, schema has {arity}", state.index))
            known.add(ref)
    for parent, child in trace.causal_events:
        for ref in (parent, child):
            if ref not in known:
                out.append(Violation("dangling causal ref", f"{ref} not in trace", ref.state_index))
        if child.state_index != parent.state_index + 1:
            out.append(Violation(
                "non-successive causal event", f"{parent} -> {child}", parent.state_index))
    return out


# --- persistence ----------------------------------------------------------


def _dumps(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def write_trace(trace: Trace, sink: IO[str]) -> None:
    """Write ``trace`` as one header line followed by one line per state."""
    header = {
        "format_version": FORMAT_VERSION,
        "model": trace.model,
        "schema": trace.schema.to_json(),
        "seed": trace.seed,
        "config_digest": trace.config_digest,
    }
    sink.write(_dumps(header) + "\n")
    causes: dict[int, list] = {}
    n = len(trace.states)
    for parent, child in trace.causal_events:
        if not 0 <= child.state_index < n:
            raise ValueError(f"causal event child {child} has no state record")
        causes.setdefault(child.state_index, []).append(
            [parent.state_index, parent.local_id, child.state_index, child.local_id])
    for state in trace.states:
        record = {
            "index": state.index,
            "entities": [
                {"id": s.ref.local_id, "tag": thaw(s.tag), "chars": thaw(s.chars)}
                for s in state.entities
            ],
            "causes": causes.get(state.index, []),
        }
        sink.write(_dumps(record) + "\n")


def _field(record: dict, key: str, lineno: int):
    try:
        return record[key]
    except (KeyError, TypeError):
        raise TraceFormatError(f"missing field {key!r}", lineno) from None


def read_trace(source: IO[str] | Iterable[str]) -> Trace:
    header = None
    states: list[State] = []
    events: list[CausalEvent] = []
    seen: set[int] = set()
    lineno = 0
    for lineno, line in enumerate(source, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            record = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"malformed record ({exc.msg})", lineno) from None
        if not isinstance(record, dict):
            raise TraceFormatError("record is not an object", lineno)
        if header is None:
            version = _field(record, "format_version", lineno)
            if version != FORMAT_VERSION:
                raise TraceFormatError(
                    f"schema version {version} not supported (expected {FORMAT_VERSION})", lineno)
            try:
                schema = CharSpaceSchema.from_json(_field(record, "schema", lineno))
            except (KeyError, TypeError, ValueError) as exc:
                raise TraceFormatError(f"bad schema ({exc})", lineno) from None
            header = {
                "model": _field(record, "model", lineno),
                "schema": schema,
                "seed": _field(record, "seed", lineno),
                "config_digest": _field(record, "config_digest", lineno),
            }
            continue
        index = _field(record, "index", lineno)
        if not isinstance(index, int):
            raise TraceFormatError("state index is not an integer", lineno)
        if index in seen:
            raise TraceFormatError(f"duplicate state index {index}", lineno)
        seen.add(index)
        snaps = []
        for ent in _field(record, "entities", lineno):
            local_id = _field(ent, "id", lineno)
            snaps.append(EntitySnapshot(
                EntityRef(index, str(local_id)), _field(ent, "tag", lineno), _field(ent, "chars", lineno)))
        for cause in _field(record, "causes", lineno):
            if not isinstance(cause, list) or len(cause) != 4:
                raise TraceFormatError("causal record must have four fields", lineno)
            ps, pid, cs, cid = cause
            events.append((EntityRef(ps, str(pid)), EntityRef(cs, str(cid))))
        states.append(State(index, tuple(snaps)))
    if header is None:
        raise TraceFormatError("missing header record", lineno or 1)
    return Trace(states, events, **header)


def load_trace(path) -> Trace:
    with open(path, encoding="utf-8") as fh:
        return read_trace(fh)


def save_trace(trace: Trace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_trace(trace, fh)
