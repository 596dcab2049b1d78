"""Forward-zones-first 2-atomicity check.

Stage 1 splits the history into chunks: maximal runs of overlapping forward
zones together with the backward zones lying inside them. Stage 2 tries at
most four write orders per chunk and checks each for viability. Stage 3
stitches per-chunk witnesses (and the dangling backward clusters) together.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from math import ceil, log2

from .history import History, Operation, prepared
from .witness import ReadContainer, Verdict, WitnessOrder, WriteSlot
from .zones import Cluster, Zone, clusters, zone


@dataclass
class Chunk:
    low: int
    high: int
    forward: list[tuple[Cluster, Zone]] = field(default_factory=list)
    backward: list[tuple[Cluster, Zone]] = field(default_factory=list)

    @property
    def forward_writes(self) -> list[str]:
        """Forward-cluster writes by increasing zone low endpoint."""
        return [c.write.id for c, _ in self.forward]

    @property
    def backward_writes(self) -> list[str]:
        return [c.write.id for c, _ in self.backward]

    @property
    def clusters(self) -> list[Cluster]:
        return [c for c, _ in self.forward] + [c for c, _ in self.backward]

    @property
    def op_ids(self) -> set[str]:
        return {op.id for c in self.clusters for op in c.ops}

    def describe(self) -> dict:
        return {
            "interval": [self.low, self.high],
            "forward": self.forward_writes,
            "backward": self.backward_writes,
        }


@dataclass
class ChunkSet:
    chunks: list[Chunk]
    dangling: list[tuple[Cluster, Zone]]
    steps: int = 0


def _sort_cost(m: int) -> int:
    return m * max(1, ceil(log2(m))) if m > 1 else m


def chunk_set(h: History) -> ChunkSet:
    """Group clusters into maximal chunks; backward clusters outside every
    chunk interval are dangling. ``h`` must be normalized."""
    fwd, bwd = [], []
    for c in clusters(h):
        z = zone(c)
        (fwd if z.forward else bwd).append((c, z))
    fwd.sort(key=lambda cz: cz[1].low)
    bwd.sort(key=lambda cz: cz[1].low)
    steps = len(h) + _sort_cost(len(fwd)) + _sort_cost(len(bwd))

    chunks: list[Chunk] = []
    for c, z in fwd:
        if chunks and z.low < chunks[-1].high:
            ch = chunks[-1]
            ch.forward.append((c, z))
            ch.high = max(ch.high, z.high)
        else:
            chunks.append(Chunk(z.low, z.high, [(c, z)]))
    lows = [ch.low for ch in chunks]
    dangling = []
    for c, z in bwd:
        i = bisect.bisect_left(lows, z.low) - 1
        steps += max(1, ceil(log2(len(lows) + 1)))
        if i >= 0 and z.high < chunks[i].high:
            chunks[i].backward.append((c, z))
        else:
            dangling.append((c, z))
    return ChunkSet(chunks, dangling, steps)


def candidate_orders(chunk: Chunk) -> list[tuple[str, ...]]:
    """Write orders worth testing for a chunk (duplicates removed, in order)."""
    tf = chunk.forward_writes
    tf2 = [tf[1], tf[0], *tf[2:]] if len(tf) > 1 else list(tf)
    bw = chunk.backward_writes
    if len(bw) == 0:
        raw = [tf, tf2]
    elif len(bw) == 1:
        w = bw[0]
        raw = [[w, *tf], [*tf, w], [w, *tf2], [*tf2, w]]
    elif len(bw) == 2:
        w1, w2 = bw
        raw = [[w1, *tf, w2], [w2, *tf, w1], [w1, *tf2, w2], [w2, *tf2, w1]]
    else:
        return []
    return list(dict.fromkeys(tuple(t) for t in raw))


def _greedy(order: list[Operation], sub: list[Operation], writer: dict[str, str],
            reads_of: dict[str, list[Operation]]) -> tuple[list | None, int]:
    """Consume ``sub`` back to front following the fixed write ``order``.

    ``sub`` is sorted by start. Returns (pieces back to front, steps) or
    (None, steps) on rejection.
    """
    removed: set[str] = set()
    tail = len(sub) - 1
    pieces: list = []
    steps = 0
    for j in range(len(order) - 1, -1, -1):
        w = order[j]
        prev = order[j - 1].id if j > 0 else None
        box = []
        while tail >= 0:
            op = sub[tail]
            steps += 1
            if op.id in removed:
                tail -= 1
                continue
            if op.start <= w.finish:
                break
            if op.is_write:
                return None, steps
            d = writer[op.id]
            if d != w.id and d != prev:
                return None, steps
            removed.add(op.id)
            box.append(op)
            tail -= 1
        for r in reads_of.get(w.id, ()):
            steps += 1
            if r.id not in removed:
                removed.add(r.id)
                box.append(r)
        removed.add(w.id)
        pieces.append(box)
        pieces.append(w)
    return pieces, steps


def _valid_write_order(order: list[Operation]) -> bool:
    latest_start = None
    for w in order:
        if latest_start is not None and w.finish < latest_start:
            return False
        latest_start = w.start if latest_start is None else max(latest_start, w.start)
    return True


def _viability(order, sub: History) -> tuple[list | None, int]:
    ws = [sub.by_id[i] for i in order]
    if sorted(order) != sorted(w.id for w in sub.writes):
        raise ValueError("order must cover exactly the writes of the sub-history")
    if not _valid_write_order(ws):
        return None, len(ws)
    writer = {r.id: sub.writer[r.value].id for r in sub.reads}
    reads_of = {w.id: list(sub.reads_of.get(w.value, ())) for w in sub.writes}
    ops = sorted(sub.ops, key=lambda o: o.start)
    pieces, steps = _greedy(ws, ops, writer, reads_of)
    return pieces, steps + len(ws)


def is_viable(order, sub: History) -> bool:
    """Whether some valid 2-atomic total order over ``sub`` orders its writes as ``order``.

    ``sub`` must be normalized and ``order`` must list each of its writes once.
    """
    return _viability(list(order), sub)[0] is not None


def _pieces_to_entries(pieces: list) -> list:
    entries = []
    for item in reversed(pieces):
        if isinstance(item, list):
            if item:
                item.sort(key=lambda o: o.start)
                entries.append(ReadContainer(tuple(o.id for o in item)))
        else:
            entries.append(WriteSlot(item.id))
    return entries


def check_2atomic_fzf(h: History, *, explain: bool = False) -> Verdict:
    """Decide 2-atomicity chunk by chunk.

    NO carries the failing chunk; YES carries a witness order. With
    ``explain`` the verdict lists every chunk and the orders tried.
    """
    h = prepared(h)
    cs = chunk_set(h)
    steps = cs.steps
    notes: list[dict] | None = [] if explain else None

    # project ops onto chunks in one pass over the start order
    owner: dict[str, int] = {}
    for i, ch in enumerate(cs.chunks):
        for c in ch.clusters:
            for op in c.ops:
                owner[op.id] = i
    by_start = sorted(h.ops, key=lambda o: o.start)
    steps += _sort_cost(len(by_start))
    parts: list[list[Operation]] = [[] for _ in cs.chunks]
    for op in by_start:
        i = owner.get(op.id)
        if i is not None:
            parts[i].append(op)
    steps += len(by_start)

    blocks: list[tuple[int, list]] = []
    for i, ch in enumerate(cs.chunks):
        orders = candidate_orders(ch)
        steps += len(parts[i]) * max(1, len(orders))
        writer = {op.id: h.writer[op.value].id for op in parts[i] if op.is_read}
        reads_of = {c.write.id: list(c.reads) for c in ch.clusters}
        ops_by_id = {op.id: op for op in parts[i]}
        found = None
        tried = []
        for t in orders:
            ws = [ops_by_id[x] for x in t]
            steps += len(ws)
            if not _valid_write_order(ws):
                tried.append((t, False))
                continue
            pieces, used = _greedy(ws, parts[i], writer, reads_of)
            steps += used
            tried.append((t, pieces is not None))
            if pieces is not None:
                found = pieces
                break
        if notes is not None:
            notes.append({**ch.describe(), "tried": [{"order": list(t), "viable": v} for t, v in tried]})
        if found is None:
            reason = "three or more backward clusters" if len(ch.backward) >= 3 else "no viable order"
            return Verdict(
                False,
                certificate={"chunk": i, **ch.describe(), "reason": reason},
                stats={"steps": steps, "chunks": len(cs.chunks)},
                explain=notes,
            )
        blocks.append((ch.low, _pieces_to_entries(found)))

    for c, z in cs.dangling:
        entries = [WriteSlot(c.write.id)]
        if c.reads:
            entries.append(ReadContainer(tuple(r.id for r in c.reads)))
        blocks.append((z.low, entries))
        steps += len(c.ops)
    blocks.sort(key=lambda b: b[0])
    steps += _sort_cost(len(blocks))
    witness = WitnessOrder(tuple(e for _, entries in blocks for e in entries))
    return Verdict(True, witness=witness, stats={"steps": steps, "chunks": len(cs.chunks)}, explain=notes)
