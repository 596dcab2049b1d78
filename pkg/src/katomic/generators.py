"""History generators for tests and benchmarks.

All generators are deterministic per seed.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass

from .history import History, Operation, Kind, Record, Trace


def _rank_endpoints(raw: list[tuple[tuple, tuple]]) -> list[tuple[int, int]]:
    """Replace sortable endpoint keys by their ranks 0..2n-1."""
    points = []
    for i, (s, f) in enumerate(raw):
        points.append((s, i, 0))
        points.append((f, i, 1))
    points.sort()
    out = [[0, 0] for _ in raw]
    for rank, (_, i, side) in enumerate(points):
        out[i][side] = rank
    return [tuple(p) for p in out]


@dataclass(frozen=True)
class GenConfig:
    """Witnessed generator settings.

    ``interval_stretch`` bounds how many commit slots an interval may reach
    back and forward from its commit point.
    """

    seed: int = 0
    ops: int = 100
    writes_fraction: float = 0.5
    staleness_k: int = 2
    interval_stretch: tuple[int, int] = (2, 2)
    key: str = "x"


_SLOT = 8  # ticks between consecutive commit points


def gen_witnessed(cfg: GenConfig) -> History:
    """History that is ``staleness_k``-atomic by construction.

    Commit points sit at multiples of a fixed slot width. Each read returns
    one of the last ``staleness_k`` writes committed before it, and every
    interval is a random stretch around its commit point that never lands on
    a commit point, so the commit order stays a valid witness after ties are
    broken.
    """
    if cfg.staleness_k < 1:
        raise ValueError("staleness_k must be positive")
    rng = random.Random(cfg.seed)
    back, fwd = cfg.interval_stretch
    recent: list[str] = []
    kinds, values, raw = [], [], []
    for i in range(cfg.ops):
        c = (i + 1) * _SLOT
        if i == 0 or rng.random() < cfg.writes_fraction:
            kinds.append(Kind.WRITE)
            values.append(f"v{i}")
            recent.append(f"v{i}")
            if len(recent) > cfg.staleness_k:
                recent.pop(0)
        else:
            kinds.append(Kind.READ)
            values.append(rng.choice(recent))
        b = _SLOT * rng.randrange(max(back, 1)) + rng.randrange(1, _SLOT)
        f = _SLOT * rng.randrange(max(fwd, 1)) + rng.randrange(1, _SLOT)
        raw.append(((c - b,), (c + f,)))
    ranked = _rank_endpoints(raw)
    ops = tuple(
        Operation(f"op{i}", kinds[i], values[i], s, f) for i, (s, f) in enumerate(ranked)
    )
    return History(ops, cfg.key)


def gen_random_small(seed: int, n: int, key: str = "x") -> History:
    """Small random anomaly-free history (not normalized).

    The earliest-starting operation is always a write, so every read has at
    least one write it does not precede.
    """
    if n > 12:
        raise ValueError("gen_random_small is meant for n <= 12")
    rng = random.Random(seed)
    mean_len = rng.choice((0.3, 1.0, 3.0))
    p_write = rng.uniform(0.3, 0.7)
    raw = []
    for _ in range(n):
        s = rng.uniform(0, n)
        raw.append(((s,), (s + rng.expovariate(1 / mean_len) + 1e-6,)))
    ranked = _rank_endpoints(raw)
    order = sorted(range(n), key=lambda i: ranked[i][0])
    is_write = [False] * n
    for j, i in enumerate(order):
        is_write[i] = j == 0 or rng.random() < p_write
    values = [f"v{i}" if is_write[i] else "" for i in range(n)]
    for i in range(n):
        if is_write[i]:
            continue
        s, f = ranked[i]
        eligible = [j for j in range(n) if is_write[j] and ranked[j][0] < f]
        before = [j for j in eligible if ranked[j][0] < s]
        if before and rng.random() < 0.5:
            j = max(before, key=lambda j: ranked[j][0])
        else:
            j = rng.choice(eligible)
        values[i] = values[j]
    ops = tuple(
        Operation(f"op{i}", Kind.WRITE if is_write[i] else Kind.READ, values[i], *ranked[i])
        for i in range(n)
    )
    return History(ops, key)


@dataclass(frozen=True)
class QuorumConfig:
    seed: int = 0
    replicas: int = 3
    write_quorum: int = 2
    read_quorum: int = 2
    clients: int = 3
    ops: int = 100
    latency: tuple[int, int] = (1, 10)
    write_fraction: float = 0.5
    keys: int = 1

    def __post_init__(self) -> None:
        if not (1 <= self.write_quorum <= self.replicas and 1 <= self.read_quorum <= self.replicas):
            raise ValueError("quorums must satisfy 1 <= W, R <= N")
        if self.clients < 1 or self.keys < 1:
            raise ValueError("need at least one client and one key")


def simulate_quorum(cfg: QuorumConfig) -> Trace:
    """Discrete-event simulation of clients on a quorum-replicated register.

    Writes carry globally increasing versions and finish after W acks; reads
    finish after R replies and return the highest version seen. Every key
    starts with a synthetic initial write at time 0. Simultaneous events are
    ordered by scheduling sequence when timestamps are assigned.
    """
    if cfg.ops == 0:
        return Trace()
    rng = random.Random(cfg.seed)
    lo, hi = cfg.latency
    keys = [f"k{i}" for i in range(cfg.keys)]
    # replica state per key: (version, value)
    state = {k: [(0, f"{k}-v0")] * cfg.replicas for k in keys}
    seq = 0
    events: list = []

    def push(t: int, kind: str, payload: tuple) -> None:
        nonlocal seq
        seq += 1
        heapq.heappush(events, (t, seq, kind, payload))

    # endpoints are (time, seq) pairs so ties follow the simulation order
    records: list[tuple[str, str, Kind, str, tuple, tuple]] = []
    for k in keys:
        seq += 1
        t0 = (0, seq)
        seq += 1
        records.append((k, f"{k}-init", Kind.WRITE, f"{k}-v0", t0, (0, seq)))

    issued = 0
    next_version = 0
    pending: dict[int, dict] = {}

    def issue(client: int, now: int) -> None:
        nonlocal issued, next_version, seq
        if issued >= cfg.ops:
            return
        issued += 1
        key = rng.choice(keys)
        op_id = len(pending) + 1
        seq += 1
        op = {"client": client, "key": key, "start": (now, seq), "acks": 0, "best": None,
              "id": f"c{client}-{issued}"}
        if rng.random() < cfg.write_fraction:
            next_version += 1
            op.update(kind=Kind.WRITE, version=next_version, value=f"{key}-v{next_version}")
        else:
            op.update(kind=Kind.READ)
        pending[op_id] = op
        for r in range(cfg.replicas):
            push(now + rng.randint(lo, hi), "arrive", (op_id, r))

    for c in range(cfg.clients):
        push(1 + rng.randint(0, hi), "issue", (c,))

    while events:
        now, _, kind, payload = heapq.heappop(events)
        if kind == "issue":
            issue(payload[0], now)
        elif kind == "arrive":
            op_id, r = payload
            op = pending[op_id]
            reps = state[op["key"]]
            if op["kind"] is Kind.WRITE:
                if op["version"] > reps[r][0]:
                    reps[r] = (op["version"], op["value"])
                push(now + rng.randint(lo, hi), "reply", (op_id, None))
            else:
                push(now + rng.randint(lo, hi), "reply", (op_id, reps[r]))
        elif kind == "reply":
            op_id, seen = payload
            op = pending[op_id]
            if op.get("done"):
                continue
            op["acks"] += 1
            if seen is not None and (op["best"] is None or seen[0] > op["best"][0]):
                op["best"] = seen
            quorum = cfg.write_quorum if op["kind"] is Kind.WRITE else cfg.read_quorum
            if op["acks"] >= quorum:
                op["done"] = True
                seq += 1
                value = op["value"] if op["kind"] is Kind.WRITE else op["best"][1]
                records.append((op["key"], op["id"], op["kind"], value, op["start"], (now, seq)))
                push(now + rng.randint(0, hi), "issue", (op["client"],))

    ranked = _rank_endpoints([(s, f) for *_, s, f in records])
    return Trace(tuple(
        Record(key, Operation(oid, kind, value, s, f))
        for (key, oid, kind, value, _, _), (s, f) in zip(records, ranked)
    ))
