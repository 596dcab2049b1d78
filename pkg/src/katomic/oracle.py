"""Exhaustive ground truth for small histories, witness checking, and min-k."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .history import History
from .witness import Verdict, WitnessOrder

DEFAULT_CAP = 12


class CapExceeded(ValueError):
    pass


def _check_cap(h: History, cap: int) -> None:
    if len(h) > cap:
        raise CapExceeded(f"history has {len(h)} operations, cap is {cap}")


def brute_force_k_atomic(
    h: History,
    k: int,
    *,
    cap: int = DEFAULT_CAP,
    write_order: Sequence[str] | None = None,
    rng: random.Random | None = None,
) -> Verdict:
    """Search all valid total orders of ``h`` for a k-atomic one.

    Only currently minimal operations are placed next, so every completed
    order extends precedes. A branch dies as soon as a write with unplaced
    dictated reads has k writes after it. ``write_order``, if given, forces
    the relative order of all writes. ``rng`` shuffles the branching order.
    Works on raw (unnormalized) anomaly-free histories.
    """
    if k < 1:
        raise ValueError("k must be positive")
    _check_cap(h, cap)
    ops = list(h.ops)
    n = len(ops)
    index = {op.id: i for i, op in enumerate(ops)}
    is_write = [op.is_write for op in ops]
    writer = [-1] * n
    for i, op in enumerate(ops):
        if not op.is_write:
            w = h.writer.get(op.value)
            if w is None:
                raise ValueError(f"read {op.id} has no dictating write")
            writer[i] = index[w.id]
    reads_mask = [0] * n
    for i in range(n):
        if writer[i] >= 0:
            reads_mask[writer[i]] |= 1 << i
    pred = [0] * n
    for i, a in enumerate(ops):
        for j, b in enumerate(ops):
            if i != j and b.finish < a.start:
                pred[i] |= 1 << j
    forced = [index[x] for x in write_order] if write_order is not None else None
    if forced is not None and sorted(forced) != sorted(i for i in range(n) if is_write[i]):
        raise ValueError("write_order must list every write exactly once")

    full = (1 << n) - 1
    dead: set = set()
    order: list[int] = []
    nodes = 0

    def pending(w: int, mask: int) -> bool:
        return reads_mask[w] & ~mask != 0

    def dfs(mask: int, recent: tuple[int, ...], nwrites: int) -> bool:
        nonlocal nodes
        nodes += 1
        if mask == full:
            return True
        key = (mask, tuple(w if pending(w, mask) else -1 for w in recent))
        if key in dead:
            return False
        cands = [i for i in range(n) if not mask >> i & 1 and pred[i] & ~mask == 0]
        if rng is not None:
            rng.shuffle(cands)
        for i in cands:
            if is_write[i]:
                if forced is not None and forced[nwrites] != i:
                    continue
                nrec = recent + (i,)
                if len(nrec) > k:
                    if pending(nrec[0], mask):
                        continue
                    nrec = nrec[1:]
                order.append(i)
                if dfs(mask | 1 << i, nrec, nwrites + 1):
                    return True
                order.pop()
            else:
                w = writer[i]
                if not mask >> w & 1:
                    continue
                order.append(i)
                if dfs(mask | 1 << i, recent, nwrites):
                    return True
                order.pop()
        dead.add(key)
        return False

    ok = dfs(0, (), 0)
    stats = {"nodes": nodes}
    if not ok:
        return Verdict(False, certificate={"exhausted": True}, stats=stats)
    witness = WitnessOrder.from_order(h, [ops[i].id for i in order])
    return Verdict(True, witness=witness, stats=stats)


def check_witness(h: History, w: WitnessOrder | Sequence[str], k: int) -> bool:
    """Check that a witness covers ``h`` exactly, extends precedes, and keeps
    every read within k-1 intervening writes after its dictating write."""
    order = w.flatten() if isinstance(w, WitnessOrder) else list(w)
    if len(order) != len(h.ops) or set(order) != set(h.by_id):
        return False
    ops = [h.by_id[i] for i in order]

    # a later op may not finish before an earlier op starts
    max_start = None
    for op in ops:
        if max_start is not None and op.finish < max_start:
            return False
        max_start = op.start if max_start is None else max(max_start, op.start)

    writes_seen = 0
    write_rank: dict[str, int] = {}
    for op in ops:
        if op.is_write:
            writes_seen += 1
            if op.value in write_rank:
                return False
            write_rank[op.value] = writes_seen
        else:
            if op.value not in write_rank:
                return False
            if writes_seen - write_rank[op.value] > k - 1:
                return False
    return True


@dataclass(frozen=True)
class Unknown:
    """min-k could not be determined exactly; it is at least ``lower_bound``."""

    lower_bound: int = 3

    def __str__(self) -> str:
        return f"Unknown(>={self.lower_bound})"


def min_k(h: History, cap: int = DEFAULT_CAP) -> int | Unknown:
    """Smallest k for which ``h`` is k-atomic, or :class:`Unknown` beyond the cap."""
    from .fzf import check_2atomic_fzf
    from .zones import check_1atomic

    if check_1atomic(h):
        return 1
    if check_2atomic_fzf(h):
        return 2
    if len(h) > cap:
        return Unknown(3)
    # every read finishes after its write starts, so k = #writes always suffices
    for k in range(3, max(3, len(h.writes)) + 1):
        if brute_force_k_atomic(h, k, cap=cap):
            return k
    raise AssertionError("no k found; history has anomalies")
