"""Verdicts and witness orders shared by all verifiers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .history import History


@dataclass(frozen=True)
class WriteSlot:
    write: str


@dataclass(frozen=True)
class ReadContainer:
    reads: tuple[str, ...]


Entry = WriteSlot | ReadContainer


@dataclass(frozen=True)
class WitnessOrder:
    """Write slots and read containers, front to back.

    Reads inside a container are kept sorted by start time, which always
    respects the precedes relation.
    """

    entries: tuple[Entry, ...]

    def flatten(self) -> list[str]:
        out: list[str] = []
        for e in self.entries:
            if isinstance(e, WriteSlot):
                out.append(e.write)
            else:
                out.extend(e.reads)
        return out

    def to_json(self) -> list[dict]:
        return [
            {"slot": e.write} if isinstance(e, WriteSlot) else {"container": list(e.reads)}
            for e in self.entries
        ]

    @classmethod
    def from_json(cls, data: Sequence[dict]) -> "WitnessOrder":
        entries: list[Entry] = []
        for item in data:
            if "slot" in item:
                entries.append(WriteSlot(item["slot"]))
            elif "container" in item:
                entries.append(ReadContainer(tuple(item["container"])))
            else:
                raise ValueError(f"bad witness entry: {item!r}")
        return cls(tuple(entries))

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_order(cls, h: History, order: Iterable[str]) -> "WitnessOrder":
        """Group a flat operation order into slots and maximal read runs."""
        entries: list[Entry] = []
        run: list[str] = []
        for oid in order:
            if h.by_id[oid].is_write:
                if run:
                    entries.append(ReadContainer(tuple(run)))
                    run = []
                entries.append(WriteSlot(oid))
            else:
                run.append(oid)
        if run:
            entries.append(ReadContainer(tuple(run)))
        return cls(tuple(entries))


@dataclass
class Verdict:
    """Outcome of a k-atomicity check.

    ``witness`` accompanies YES for algorithms that construct one;
    ``certificate`` explains a NO; ``stats`` holds instrumentation counters.
    """

    answer: bool
    witness: WitnessOrder | None = None
    certificate: Any = None
    stats: dict[str, int] = field(default_factory=dict)
    explain: list[dict] | None = None

    def __bool__(self) -> bool:
        return self.answer

    @property
    def label(self) -> str:
        return "YES" if self.answer else "NO"
