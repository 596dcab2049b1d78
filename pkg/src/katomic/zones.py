"""Clusters, zones, and the zone-based 1-atomicity test."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .history import History, Operation, prepared
from .witness import Verdict


class ZoneKind(str, enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class Cluster:
    write: Operation
    reads: tuple[Operation, ...] = ()

    @property
    def value(self) -> str:
        return self.write.value

    @property
    def ops(self) -> tuple[Operation, ...]:
        return (self.write, *self.reads)


@dataclass(frozen=True)
class Zone:
    """Interval from a cluster's earliest finish to its latest start."""

    value: str
    write_id: str
    min_finish: int
    max_start: int

    @property
    def kind(self) -> ZoneKind:
        return ZoneKind.FORWARD if self.min_finish < self.max_start else ZoneKind.BACKWARD

    @property
    def forward(self) -> bool:
        return self.min_finish < self.max_start

    @property
    def low(self) -> int:
        return min(self.min_finish, self.max_start)

    @property
    def high(self) -> int:
        return max(self.min_finish, self.max_start)

    def overlaps(self, other: "Zone") -> bool:
        return self.low <= other.high and other.low <= self.high

    def contains(self, other: "Zone") -> bool:
        return self.low < other.low and other.high < self.high

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "write": self.write_id,
            "kind": self.kind.value,
            "low": self.low,
            "high": self.high,
        }


def clusters(h: History) -> list[Cluster]:
    """One cluster per write, in write start order."""
    return [
        Cluster(w, h.reads_of.get(w.value, ()))
        for w in sorted(h.writes, key=lambda o: o.start)
    ]


def zone(c: Cluster) -> Zone:
    ops = c.ops
    return Zone(
        c.value,
        c.write.id,
        min(op.finish for op in ops),
        max(op.start for op in ops),
    )


def zones(h: History) -> list[Zone]:
    return [zone(c) for c in clusters(h)]


def check_1atomic(h: History) -> Verdict:
    """Decide 1-atomicity: no two forward zones overlap and no backward zone
    sits inside a forward zone.

    One sweep over zones sorted by low endpoint. On NO the certificate names
    the violated condition and the offending zone pair.
    """
    h = prepared(h)
    zs = sorted(zones(h), key=lambda z: z.low)
    widest: Zone | None = None  # forward zone with the largest high so far
    steps = len(zs)
    for z in zs:
        if z.forward:
            if widest is not None and z.low < widest.high:
                return Verdict(
                    False,
                    certificate={"condition": "forward-overlap", "zones": (widest, z)},
                    stats={"steps": steps},
                )
            if widest is None or z.high > widest.high:
                widest = z
        elif widest is not None and z.high < widest.high:
            return Verdict(
                False,
                certificate={"condition": "backward-in-forward", "zones": (widest, z)},
                stats={"steps": steps},
            )
    return Verdict(True, stats={"steps": steps})


def certificate_holds(cert: dict) -> bool:
    """Re-check a NO certificate from :func:`check_1atomic` on its own terms."""
    a, b = cert["zones"]
    if cert["condition"] == "forward-overlap":
        return a.forward and b.forward and a.overlaps(b)
    if cert["condition"] == "backward-in-forward":
        return a.forward and not b.forward and a.contains(b)
    return False
