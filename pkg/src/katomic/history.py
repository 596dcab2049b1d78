"""Operations, histories, trace ingestion, anomaly detection and normalization."""

from __future__ import annotations

import enum
import io
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Iterator


class Kind(str, enum.Enum):
    READ = "read"
    WRITE = "write"


@dataclass(frozen=True)
class Operation:
    """One timed read or write on a register.

    ``value`` is the value stored (write) or returned (read); ``start`` and
    ``finish`` are integer ticks.
    """

    id: str
    kind: Kind
    value: str
    start: int
    finish: int

    @property
    def is_write(self) -> bool:
        return self.kind is Kind.WRITE

    @property
    def is_read(self) -> bool:
        return self.kind is Kind.READ

    def __repr__(self) -> str:
        tag = "w" if self.is_write else "r"
        return f"{tag}:{self.id}[{self.start},{self.finish}]={self.value}"


def write(id: str, value: str, start: int, finish: int) -> Operation:
    return Operation(id, Kind.WRITE, value, start, finish)


def read(id: str, value: str, start: int, finish: int) -> Operation:
    return Operation(id, Kind.READ, value, start, finish)


def precedes(a: Operation, b: Operation) -> bool:
    """True iff ``a`` finishes before ``b`` starts."""
    return a.finish < b.start


@dataclass(frozen=True)
class History:
    """The operations applied to one register.

    Construction only enforces unique operation ids; everything else is
    reported by :func:`validate`.
    """

    ops: tuple[Operation, ...]
    key: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "ops", tuple(self.ops))
        ids = Counter(op.id for op in self.ops)
        dup = sorted(i for i, c in ids.items() if c > 1)
        if dup:
            raise ValueError(f"duplicate operation ids: {dup[:5]}")

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self) -> Iterator[Operation]:
        return iter(self.ops)

    @cached_property
    def by_id(self) -> dict[str, Operation]:
        return {op.id: op for op in self.ops}

    @cached_property
    def writes(self) -> tuple[Operation, ...]:
        return tuple(op for op in self.ops if op.is_write)

    @cached_property
    def reads(self) -> tuple[Operation, ...]:
        return tuple(op for op in self.ops if op.is_read)

    @cached_property
    def writer(self) -> dict[str, Operation]:
        """Map from value to the (first) write storing it."""
        out: dict[str, Operation] = {}
        for op in self.writes:
            out.setdefault(op.value, op)
        return out

    @cached_property
    def reads_of(self) -> dict[str, tuple[Operation, ...]]:
        """Map from value to its dictated reads, sorted by start time."""
        groups: dict[str, list[Operation]] = defaultdict(list)
        for op in self.reads:
            groups[op.value].append(op)
        return {v: tuple(sorted(rs, key=lambda o: o.start)) for v, rs in groups.items()}

    def dictating_write(self, op: Operation) -> Operation | None:
        return self.writer.get(op.value)

    def restrict(self, ids: Iterable[str]) -> "History":
        keep = set(ids)
        return History(tuple(op for op in self.ops if op.id in keep), self.key)


# ---------------------------------------------------------------------------
# Anomalies


class AnomalyKind(str, enum.Enum):
    READ_WITHOUT_DICTATING_WRITE = "ReadWithoutDictatingWrite"
    READ_PRECEDES_DICTATING_WRITE = "ReadPrecedesDictatingWrite"
    DUPLICATE_WRITE_VALUE = "DuplicateWriteValue"
    DUPLICATE_TIMESTAMP = "DuplicateTimestamp"
    INVERTED_INTERVAL = "InvertedInterval"


@dataclass(frozen=True)
class Anomaly:
    kind: AnomalyKind
    op_ids: tuple[str, ...]

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "ops": list(self.op_ids)}


def validate(h: History) -> list[Anomaly]:
    """Report every way ``h`` violates the history invariants.

    The normalization invariant (writes end before their dictated reads) is
    not checked here; :func:`normalize` establishes it.
    """
    out: list[Anomaly] = []
    for op in h.ops:
        if op.start >= op.finish:
            out.append(Anomaly(AnomalyKind.INVERTED_INTERVAL, (op.id,)))

    owners: dict[int, list[str]] = defaultdict(list)
    for op in h.ops:
        owners[op.start].append(op.id)
        owners[op.finish].append(op.id)
    for t in sorted(owners):
        ids = tuple(dict.fromkeys(owners[t]))
        if len(ids) > 1:
            out.append(Anomaly(AnomalyKind.DUPLICATE_TIMESTAMP, ids))

    by_value: dict[str, list[str]] = defaultdict(list)
    for op in h.writes:
        by_value[op.value].append(op.id)
    for v, ids in by_value.items():
        if len(ids) > 1:
            out.append(Anomaly(AnomalyKind.DUPLICATE_WRITE_VALUE, tuple(ids)))

    for r in h.reads:
        w = h.writer.get(r.value)
        if w is None:
            out.append(Anomaly(AnomalyKind.READ_WITHOUT_DICTATING_WRITE, (r.id,)))
        elif precedes(r, w):
            out.append(Anomaly(AnomalyKind.READ_PRECEDES_DICTATING_WRITE, (r.id, w.id)))
    return out


def drop_anomalous_reads(h: History, anomalies: list[Anomaly]) -> History:
    """Remove reads named by read-level anomalies (lenient mode)."""
    bad = {
        a.op_ids[0]
        for a in anomalies
        if a.kind
        in (AnomalyKind.READ_WITHOUT_DICTATING_WRITE, AnomalyKind.READ_PRECEDES_DICTATING_WRITE)
    }
    return History(tuple(op for op in h.ops if op.id not in bad), h.key)


def perturb_duplicates(h: History) -> History:
    """Break timestamp ties deterministically, preserving all strict orders.

    Endpoints are ranked by (time, op id, start-before-finish) and replaced by
    their rank, so equal raw timestamps become adjacent distinct ticks.
    """
    points = []
    for i, op in enumerate(h.ops):
        points.append((op.start, op.id, 0, i))
        points.append((op.finish, op.id, 1, i))
    points.sort()
    new = [[0, 0] for _ in h.ops]
    for rank, (_, _, side, i) in enumerate(points):
        new[i][side] = rank
    return History(
        tuple(
            Operation(op.id, op.kind, op.value, s, f) for op, (s, f) in zip(h.ops, new)
        ),
        h.key,
    )


def is_normalized(h: History) -> bool:
    """Distinct endpoints, proper intervals, and every write ends before its reads."""
    seen = set()
    for op in h.ops:
        if op.start >= op.finish or op.start in seen or op.finish in seen:
            return False
        seen.add(op.start)
        seen.add(op.finish)
    for r in h.reads:
        w = h.writer.get(r.value)
        if w is None or w.finish >= r.finish:
            return False
    return True


def normalize(h: History) -> History:
    """Remap endpoints to 0, 2, 4, ... and shorten writes to end before their reads.

    A write whose earliest-finishing dictated read finishes at ``t`` (after
    remapping) gets finish ``min(finish, t - 1)``. Odd ticks never collide
    with remapped endpoints. Requires ``validate(h) == []``.
    """
    times = sorted({t for op in h.ops for t in (op.start, op.finish)})
    remap = {t: 2 * i for i, t in enumerate(times)}
    min_read_finish: dict[str, int] = {}
    for r in h.reads:
        f = remap[r.finish]
        if f < min_read_finish.get(r.value, f + 1):
            min_read_finish[r.value] = f
    ops = []
    for op in h.ops:
        s, f = remap[op.start], remap[op.finish]
        if op.is_write and op.value in min_read_finish:
            f = min(f, min_read_finish[op.value] - 1)
        ops.append(Operation(op.id, op.kind, op.value, s, f))
    return History(tuple(ops), h.key)


def prepared(h: History) -> History:
    """Return ``h`` if already normalized, otherwise its normalization."""
    return h if is_normalized(h) else normalize(h)


# ---------------------------------------------------------------------------
# Traces


class TraceSyntaxError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class Record:
    key: str
    op: Operation
    weight: int | None = None


@dataclass(frozen=True)
class Trace:
    records: tuple[Record, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.records)


_REQUIRED = (("key", str), ("id", str), ("kind", str), ("value", str), ("start", int), ("finish", int))


def _parse_line(lineno: int, line: str) -> Record:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise TraceSyntaxError(lineno, f"invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise TraceSyntaxError(lineno, "record is not a JSON object")
    for name, typ in _REQUIRED:
        if name not in obj:
            raise TraceSyntaxError(lineno, f"missing field {name!r}")
        val = obj[name]
        if not isinstance(val, typ) or isinstance(val, bool):
            raise TraceSyntaxError(lineno, f"field {name!r} must be {typ.__name__}")
    try:
        kind = Kind(obj["kind"])
    except ValueError:
        raise TraceSyntaxError(lineno, f"kind must be 'read' or 'write', got {obj['kind']!r}") from None
    weight = obj.get("weight")
    if weight is not None and (not isinstance(weight, int) or isinstance(weight, bool) or weight < 1):
        raise TraceSyntaxError(lineno, "weight must be a positive integer")
    op = Operation(obj["id"], kind, obj["value"], obj["start"], obj["finish"])
    return Record(obj["key"], op, weight)


def parse_trace(stream: IO[bytes] | IO[str] | bytes | str) -> Trace:
    """Parse a JSON-lines trace. Blank lines are skipped; anything else must parse."""
    if isinstance(stream, (bytes, str)):
        stream = io.BytesIO(stream.encode() if isinstance(stream, str) else stream)
    records = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        if not line.strip():
            continue
        records.append(_parse_line(lineno, line))
    return Trace(tuple(records))


def record_to_json(rec: Record) -> str:
    obj = {
        "key": rec.key,
        "id": rec.op.id,
        "kind": rec.op.kind.value,
        "value": rec.op.value,
        "start": rec.op.start,
        "finish": rec.op.finish,
    }
    if rec.weight is not None:
        obj["weight"] = rec.weight
    return json.dumps(obj, ensure_ascii=False)


def dump_trace(records: Iterable[Record], stream: IO[str]) -> None:
    for rec in records:
        stream.write(record_to_json(rec))
        stream.write("\n")


def history_records(h: History) -> list[Record]:
    return [Record(h.key, op) for op in sorted(h.ops, key=lambda o: o.start)]


def partition_by_key(t: Trace) -> dict[str, History]:
    """Group trace records into one history per register key."""
    groups: dict[str, list[Operation]] = defaultdict(list)
    for rec in t.records:
        groups[rec.key].append(rec.op)
    return {k: History(tuple(ops), k) for k, ops in groups.items()}
