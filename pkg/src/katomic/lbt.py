"""Limited-backtracking 2-atomicity check.

The history is consumed back to front in epochs. An epoch starts by putting
a candidate write in the last open write slot; from there every later
placement in the epoch is forced. Backtracking only happens at epoch starts,
and candidates are raced with iterative deepening on a removal budget.
"""

from __future__ import annotations

from typing import Sequence

from .history import History, Operation, prepared
from .witness import ReadContainer, Verdict, WitnessOrder, WriteSlot

_CUTOFF = object()


class EpochState:
    """Doubly linked lists over operation positions plus an undo log.

    Positions are indices into the start-sorted operation list. ``H`` holds
    the remaining operations in start order, ``W`` the remaining writes in
    finish order and ``S`` the remaining writes in start order. Sentinel
    index ``n`` closes each ring.
    """

    def __init__(self, ops: list[Operation], writer: list[int]):
        n = len(ops)
        self.n = n
        self.start = [op.start for op in ops]
        self.finish = [op.finish for op in ops]
        self.is_write = [op.is_write for op in ops]
        self.writer = writer
        self.reads_of: list[list[int]] = [[] for _ in range(n)]
        for i in range(n):
            if not self.is_write[i]:
                self.reads_of[writer[i]].append(i)

        seq = list(range(n))
        self.hprev, self.hnext = self._ring(seq)
        wpos = [i for i in range(n) if self.is_write[i]]
        self.sprev, self.snext = self._ring(wpos)
        self.wprev, self.wnext = self._ring(sorted(wpos, key=self.finish.__getitem__))
        self.in_h = [True] * n
        self.ids = [op.id for op in ops]
        self.pos = {op.id: i for i, op in enumerate(ops)}
        self.pieces: list = []
        self.log: list[int] = []
        self.removals = 0
        self.undos = 0

    def _ring(self, seq: list[int]) -> tuple[list[int], list[int]]:
        n = self.n
        prev = [n] * (n + 1)
        nxt = [n] * (n + 1)
        last = n
        for x in seq:
            nxt[last] = x
            prev[x] = last
            last = x
        nxt[last] = n
        prev[n] = last
        return prev, nxt

    def snapshot(self) -> tuple:
        return (
            tuple(self.hprev), tuple(self.hnext), tuple(self.wprev), tuple(self.wnext),
            tuple(self.sprev), tuple(self.snext), tuple(self.in_h),
        )

    def remove_op(self, x: int) -> None:
        p, q = self.hprev[x], self.hnext[x]
        self.hnext[p] = q
        self.hprev[q] = p
        self.in_h[x] = False
        self.log.append(x)
        self.removals += 1

    def remove_write(self, x: int) -> None:
        p, q = self.wprev[x], self.wnext[x]
        self.wnext[p] = q
        self.wprev[q] = p
        p, q = self.sprev[x], self.snext[x]
        self.snext[p] = q
        self.sprev[q] = p
        self.log.append(~x)

    def revert(self, mark: int) -> None:
        log = self.log
        while len(log) > mark:
            x = log.pop()
            self.undos += 1
            if x >= 0:
                self.hnext[self.hprev[x]] = x
                self.hprev[self.hnext[x]] = x
                self.in_h[x] = True
            else:
                x = ~x
                self.wnext[self.wprev[x]] = x
                self.wprev[self.wnext[x]] = x
                self.snext[self.sprev[x]] = x
                self.sprev[self.snext[x]] = x

    def empty(self) -> bool:
        return self.hnext[self.n] == self.n

    def candidates(self) -> list[int]:
        """Remaining writes that precede no other remaining write, latest finish first.

        They are exactly the writes finishing after the latest remaining
        write start, hence a suffix of the finish order.
        """
        n = self.n
        latest_start = self.start[self.sprev[n]]
        out = []
        x = self.wprev[n]
        while x != n and self.finish[x] > latest_start:
            out.append(x)
            x = self.wprev[x]
        return out


def _run_epoch(L: EpochState, w: int, budget: float, pieces: list):
    """Run one epoch from candidate ``w``; True, False, or _CUTOFF.

    On True the epoch's write slots and read containers are appended to
    ``pieces`` back to front.
    """
    n = L.n
    start, finish, is_write, writer = L.start, L.finish, L.is_write, L.writer
    hprev, in_h = L.hprev, L.in_h
    used = 0
    local: list = []
    while True:
        nxt = -1
        box = []
        fw = finish[w]
        op = hprev[n]
        while op != n and start[op] > fw:
            if is_write[op]:
                return False
            d = writer[op]
            if d != w and d != nxt:
                if nxt != -1:
                    return False
                nxt = d
            L.remove_op(op)
            box.append(op)
            used += 1
            if used > budget:
                return _CUTOFF
            op = hprev[n]
        for r in L.reads_of[w]:
            if in_h[r]:
                L.remove_op(r)
                box.append(r)
                used += 1
        L.remove_op(w)
        L.remove_write(w)
        used += 1
        local.append(box)
        local.append(w)
        if nxt == -1:
            pieces.extend(local)
            return True
        if used > budget:
            return _CUTOFF
        w = nxt


def _build(h: History) -> tuple[list[Operation], EpochState]:
    ops = sorted(h.ops, key=lambda o: o.start)
    pos = {op.id: i for i, op in enumerate(ops)}
    writer = [pos[op.id] if op.is_write else pos[h.writer[op.value].id] for op in ops]
    return ops, EpochState(ops, writer)


def epoch_state(h: History) -> EpochState:
    """Fresh state for driving epochs by hand; ``h`` must be normalized."""
    return _build(h)[1]


def candidate_frontier(writes: Sequence[Operation]) -> list[Operation]:
    """Writes that precede no other write in ``writes`` (sorted by finish)."""
    if not writes:
        return []
    latest_start = max(w.start for w in writes)
    out = []
    for w in reversed(writes):
        if w.finish <= latest_start:
            break
        out.append(w)
    return out[::-1]


def run_epoch(state: EpochState, write_id: str) -> bool:
    """Run one unbounded epoch from the named write.

    On success the state keeps its removals and ``state.pieces`` gains the
    epoch's slots and containers (back to front); on failure the state is
    reverted to where it was.
    """
    w = state.pos[write_id]
    mark = len(state.log)
    ok = _run_epoch(state, w, float("inf"), state.pieces)
    if not ok:
        state.revert(mark)
    return bool(ok)


def check_2atomic_lbt(h: History) -> Verdict:
    """Decide 2-atomicity with limited backtracking.

    YES carries a witness order; NO carries the epoch at which every
    candidate failed. ``stats['steps']`` counts removals, undo replays and
    candidate scans.
    """
    h = prepared(h)
    ops, L = _build(h)
    pieces: list = []
    epochs = 0
    scans = 0
    while not L.empty():
        epochs += 1
        alive = L.candidates()
        scans += len(alive) + 1
        tried = list(alive)
        budget = 1
        won = False
        while alive and not won:
            survivors = []
            for w in alive:
                mark = len(L.log)
                res = _run_epoch(L, w, budget, pieces)
                if res is True:
                    won = True
                    break
                L.revert(mark)
                if res is _CUTOFF:
                    survivors.append(w)
            alive = survivors
            budget *= 2
        if not won:
            return Verdict(
                False,
                certificate={
                    "epoch": epochs,
                    "candidates": [ops[w].id for w in tried],
                    "remaining_ops": sum(L.in_h),
                },
                stats=_stats(L, epochs, scans),
            )
        L.log.clear()

    entries = []
    for item in reversed(pieces):
        if isinstance(item, list):
            if item:
                entries.append(ReadContainer(tuple(ops[i].id for i in sorted(item))))
        else:
            entries.append(WriteSlot(ops[item].id))
    return Verdict(True, witness=WitnessOrder(tuple(entries)), stats=_stats(L, epochs, scans))


def _stats(L: EpochState, epochs: int, scans: int) -> dict[str, int]:
    return {
        "removals": L.removals,
        "undos": L.undos,
        "epochs": epochs,
        "steps": L.removals + L.undos + scans,
    }


def max_concurrent_writes(h: History) -> int:
    """Largest number of writes whose intervals share a common instant."""
    events = []
    for w in h.writes:
        events.append((w.start, 1))
        events.append((w.finish, -1))
    events.sort(key=lambda e: (e[0], e[1]))
    best = cur = 0
    for _, d in events:
        cur += d
        best = max(best, cur)
    return best
