"""Weighted k-atomicity and the bin-packing reduction instance generator."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .history import History, Record, Trace, partition_by_key, read, write
from .oracle import DEFAULT_CAP, CapExceeded
from .witness import Verdict, WitnessOrder


@dataclass(frozen=True)
class WeightedHistory:
    """A history whose writes carry positive integer weights (keyed by value)."""

    base: History
    weight: Mapping[str, int]

    def __post_init__(self) -> None:
        for w in self.base.writes:
            if self.weight.get(w.value, 0) < 1:
                raise ValueError(f"write {w.id} needs a positive weight")

    @classmethod
    def unit(cls, h: History) -> "WeightedHistory":
        return cls(h, {w.value: 1 for w in h.writes})

    def records(self) -> list[Record]:
        return [
            Record(self.base.key, op, self.weight[op.value] if op.is_write else None)
            for op in sorted(self.base.ops, key=lambda o: o.start)
        ]


def weighted_from_trace(t: Trace) -> dict[str, WeightedHistory]:
    """Rebuild weighted histories from a trace; unweighted writes get weight 1."""
    weights: dict[tuple[str, str], int] = {}
    for rec in t.records:
        if rec.op.is_write:
            weights[rec.key, rec.op.value] = rec.weight or 1
    return {
        k: WeightedHistory(h, {w.value: weights[k, w.value] for w in h.writes})
        for k, h in partition_by_key(t).items()
    }


def brute_force_weighted(wh: WeightedHistory, k: int, *, cap: int = DEFAULT_CAP) -> Verdict:
    """Exhaustive weighted check.

    A read is acceptable when its dictating write's weight plus the weights
    of all writes strictly between them is at most ``k``. The search state is
    the set of placed operations plus, for each write still owed reads, the
    weight accumulated since it.
    """
    h = wh.base
    if len(h) > cap:
        raise CapExceeded(f"history has {len(h)} operations, cap is {cap}")
    ops = list(h.ops)
    n = len(ops)
    ids = [op.id for op in ops]
    wt = [wh.weight[op.value] if op.is_write else 0 for op in ops]
    owed = {op.value: len(h.reads_of.get(op.value, ())) for op in h.writes}
    before = [
        frozenset(j for j, b in enumerate(ops) if b.finish < a.start) for a in ops
    ]

    failed: set = set()
    path: list[int] = []
    nodes = 0

    def search(placed: frozenset, load: tuple) -> bool:
        # load: sorted tuple of (value, accumulated weight, reads still owed)
        nonlocal nodes
        nodes += 1
        if len(placed) == n:
            return True
        state = (placed, load)
        if state in failed:
            return False
        table = {v: (acc, left) for v, acc, left in load}
        for i in range(n):
            if i in placed or not before[i] <= placed:
                continue
            op = ops[i]
            if op.is_write:
                nxt = {}
                ok = True
                for v, (acc, left) in table.items():
                    if acc + wt[i] > k:
                        ok = False
                        break
                    nxt[v] = (acc + wt[i], left)
                if not ok:
                    continue
                if owed[op.value]:
                    if wt[i] > k:
                        continue
                    nxt[op.value] = (wt[i], owed[op.value])
            else:
                if op.value not in table:
                    continue
                acc, left = table[op.value]
                nxt = dict(table)
                if left == 1:
                    del nxt[op.value]
                else:
                    nxt[op.value] = (acc, left - 1)
            path.append(i)
            if search(placed | {i}, tuple(sorted((v, a, l) for v, (a, l) in nxt.items()))):
                return True
            path.pop()
        failed.add(state)
        return False

    if any(h.writer.get(r.value) is None for r in h.reads):
        raise ValueError("every read needs a dictating write")
    ok = search(frozenset(), ())
    if not ok:
        return Verdict(False, certificate={"exhausted": True}, stats={"nodes": nodes})
    return Verdict(True, witness=WitnessOrder.from_order(h, [ids[i] for i in path]),
                   stats={"nodes": nodes})


@dataclass(frozen=True)
class BinPackingInstance:
    sizes: tuple[int, ...]
    bins: int
    capacity: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "sizes", tuple(self.sizes))
        if any(s < 1 for s in self.sizes) or self.bins < 1 or self.capacity < 1:
            raise ValueError("sizes, bins and capacity must be positive")


def brute_force_binpacking(inst: BinPackingInstance, *, cap: int = 10) -> bool:
    """Exhaustive search; bins with equal load are interchangeable, so only
    one of them is tried per item."""
    if len(inst.sizes) > cap:
        raise CapExceeded(f"{len(inst.sizes)} items, cap is {cap}")
    items = sorted(inst.sizes, reverse=True)
    loads = [0] * inst.bins

    def place(i: int) -> bool:
        if i == len(items):
            return True
        tried = set()
        for b in range(inst.bins):
            if loads[b] in tried or loads[b] + items[i] > inst.capacity:
                continue
            tried.add(loads[b])
            loads[b] += items[i]
            if place(i + 1):
                return True
            loads[b] -= items[i]
        return False

    return place(0)


def binpacking_to_kwav(inst: BinPackingInstance, key: str = "binpack") -> tuple[WeightedHistory, int]:
    """Weighted history that is (B+2)-atomic iff the instance packs.

    Short unit-weight ops occupy disjoint slots in the order
    w(1) w(2) r(1) w(3) r(2) ... w(m+1) r(m), with r(i) reading w(i). Each
    item becomes a long write weighted by its size that starts just after
    w(1) finishes and ends just before w(m+1) starts, so it can commit in any
    gap between them.
    """
    m, n = inst.bins, len(inst.sizes)
    gap = max(10, 2 * n + 2)
    seq = [("w", 1), ("w", 2), ("r", 1)]
    for i in range(3, m + 2):
        seq += [("w", i), ("r", i - 1)]
    ops = []
    weight: dict[str, int] = {}
    for j, (kind, i) in enumerate(seq):
        s, f = gap * j, gap * j + 1
        if kind == "w":
            ops.append(write(f"w{i}", f"short{i}", s, f))
            weight[f"short{i}"] = 1
        else:
            ops.append(read(f"r{i}", f"short{i}", s, f))
    first_finish = 1
    last_start = gap * (2 * m - 1)
    for j, size in enumerate(inst.sizes, start=1):
        ops.append(write(f"item{j}", f"long{j}", first_finish + j, last_start - j))
        weight[f"long{j}"] = size
    return WeightedHistory(History(tuple(ops), key), weight), inst.capacity + 2
