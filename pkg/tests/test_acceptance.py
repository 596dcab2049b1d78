"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line."""

import hashlib
import itertools
import json
import os
import subprocess
import sys
import time
from contextlib import contextmanager

import pytest

from katomic import (
    brute_force_k_atomic,
    candidate_orders,
    check_1atomic,
    check_2atomic_fzf,
    check_2atomic_lbt,
    check_witness,
    chunk_set,
    normalize,
    validate,
)
from katomic.generators import GenConfig, gen_random_small, gen_witnessed
from katomic.lbt import max_concurrent_writes
from katomic.weighted import BinPackingInstance, binpacking_to_kwav, brute_force_binpacking, brute_force_weighted

from conftest import ACCEPTANCE_LINES, fig3_history
from corpus import CORPUS_SIZE, corpus

pytestmark = pytest.mark.slow


@contextmanager
def criterion(label):
    info = {}
    t0 = time.perf_counter()
    try:
        yield info
    except BaseException:
        ACCEPTANCE_LINES.append(f"FAIL  {label}  {info}")
        raise
    info.setdefault("seconds", round(time.perf_counter() - t0, 1))
    ACCEPTANCE_LINES.append(f"PASS  {label}  {info}")


@pytest.fixture(scope="module")
def verdicts():
    """Verifier and oracle verdicts over the whole corpus, computed once."""
    t0 = time.perf_counter()
    rows = []
    for seed, h in corpus():
        rows.append((
            seed,
            h,
            check_1atomic(h),
            check_2atomic_lbt(h),
            check_2atomic_fzf(h),
            [bool(brute_force_k_atomic(h, k)) for k in (1, 2, 3)],
        ))
    return rows, time.perf_counter() - t0


def test_1_differential_correctness(verdicts):
    rows, elapsed = verdicts
    with criterion("1 differential correctness") as info:
        mismatches = [
            seed for seed, _, gk, lbt, fzf, oracle in rows
            if (bool(gk), bool(lbt), bool(fzf)) != (oracle[0], oracle[1], oracle[1])
        ]
        info.update(histories=len(rows), mismatches=len(mismatches), seconds=round(elapsed, 1))
        assert len(rows) >= CORPUS_SIZE >= 10_000
        assert mismatches == []
        assert elapsed < 300


def test_2_witness_soundness(verdicts):
    rows, _ = verdicts
    with criterion("2 witness soundness") as info:
        yes = bad = 0
        for seed, h, _, lbt, fzf, _ in rows:
            for v in (lbt, fzf):
                if v:
                    yes += 1
                    bad += not check_witness(h, v.witness, 2)
        info.update(yes_cases=yes, rejected=bad)
        assert yes > 0 and bad == 0


def _viable(sub, order):
    return bool(brute_force_k_atomic(sub, 2, write_order=order))


def test_3_chunk_order_properties():
    with criterion("3 chunk order properties") as info:
        stats = dict(chunks=0, tf_checked=0, tf_fail=0, s_checked=0, s_fail=0, b3_checked=0, b3_fail=0)
        for seed, h in corpus():
            for ch in chunk_set(h).chunks:
                nw = len(ch.forward) + len(ch.backward)
                if nw > 6:
                    continue
                stats["chunks"] += 1
                sub = h.restrict(ch.op_ids)
                fwd = ch.forward_writes
                fsub = h.restrict({op.id for c, _ in ch.forward for op in c.ops})
                tf = fwd
                tf2 = [fwd[1], fwd[0], *fwd[2:]] if len(fwd) > 1 else fwd
                if any(_viable(fsub, p) for p in itertools.permutations(fwd)):
                    stats["tf_checked"] += 1
                    stats["tf_fail"] += not (_viable(fsub, tf) or _viable(fsub, tf2))
                if len(ch.backward) >= 3:
                    stats["b3_checked"] += 1
                    stats["b3_fail"] += bool(brute_force_k_atomic(sub, 2))
                    continue
                allw = fwd + ch.backward_writes
                if any(_viable(sub, p) for p in itertools.permutations(allw)):
                    stats["s_checked"] += 1
                    stats["s_fail"] += not any(_viable(sub, t) for t in candidate_orders(ch))
        info.update(stats)
        assert stats["tf_checked"] and stats["s_checked"] and stats["b3_checked"]
        assert stats["tf_fail"] == stats["s_fail"] == stats["b3_fail"] == 0


_FIG3_DIGEST = """
import hashlib, json, sys
sys.path.insert(0, {tests!r})
from conftest import fig3_history
from katomic import chunk_set
cs = chunk_set(fig3_history())
blob = json.dumps([[c.describe() for c in cs.chunks], [c.write.id for c, _ in cs.dangling]], sort_keys=True)
print(hashlib.sha256(blob.encode()).hexdigest())
"""


def test_4_fig3_regression():
    with criterion("4 chunk layout regression") as info:
        cs = chunk_set(fig3_history())
        members = [sorted(c.forward_writes + c.backward_writes) for c in cs.chunks]
        dangling = sorted(c.write.id for c, _ in cs.dangling)
        assert members == [
            ["bz1", "fz1"],
            ["bz3", "bz4", "fz2", "fz3", "fz4"],
            ["bz6", "fz5", "fz6", "fz7", "fz8"],
        ]
        assert dangling == ["bz2", "bz5", "bz7"]
        script = _FIG3_DIGEST.format(tests=os.path.dirname(__file__))
        digests = set()
        for hashseed in ("0", "1", "random"):
            env = {**os.environ, "PYTHONHASHSEED": hashseed}
            out = subprocess.run([sys.executable, "-c", script], env=env, capture_output=True, text=True, check=True)
            digests.add(out.stdout.strip())
        info.update(chunks=len(cs.chunks), dangling=len(dangling), distinct_digests=len(digests))
        assert len(digests) == 1


def test_5_reduction_equivalence():
    with criterion("5 reduction equivalence") as info:
        t0 = time.perf_counter()
        count = mismatches = 0
        for n in range(5):
            for sizes in itertools.combinations_with_replacement(range(1, 5), n):
                for m in range(1, 4):
                    for cap in range(1, 6):
                        inst = BinPackingInstance(sizes, m, cap)
                        wh, k = binpacking_to_kwav(inst)
                        count += 1
                        mismatches += brute_force_binpacking(inst) != bool(brute_force_weighted(wh, k))
        elapsed = time.perf_counter() - t0
        info.update(instances=count, mismatches=mismatches, seconds=round(elapsed, 1))
        assert mismatches == 0 and elapsed < 120


def test_6_complexity():
    with criterion("6 complexity operationalization") as info:
        steps = []
        for e in range(10, 18):
            h = normalize(gen_witnessed(GenConfig(seed=e, ops=2**e, staleness_k=2, interval_stretch=(1, 1))))
            v = check_2atomic_fzf(h)
            assert v
            steps.append(v.stats["steps"])
        ratios = [b / a for a, b in zip(steps, steps[1:])]
        info["max_ratio"] = round(max(ratios), 3)
        assert max(ratios) <= 2.5

        h = normalize(gen_witnessed(GenConfig(seed=1, ops=10**5, staleness_k=2, interval_stretch=(2, 2))))
        t0 = time.perf_counter()
        assert check_2atomic_fzf(h)
        info["fzf_1e5_s"] = round(time.perf_counter() - t0, 2)
        c = max_concurrent_writes(h)
        info["lbt_c"] = c
        assert c <= 4
        t0 = time.perf_counter()
        assert check_2atomic_lbt(h)
        info["lbt_1e5_s"] = round(time.perf_counter() - t0, 2)
        assert info["fzf_1e5_s"] < 5 and info["lbt_1e5_s"] < 5


def test_7_normalization_invariance():
    with criterion("7 normalization invariance") as info:
        checked = mismatches = 0
        for i in range(2000):
            seed = 1_000_000 + i
            h = gen_random_small(seed, 1 + i % 8)
            assert validate(h) == []
            n = normalize(h)
            for k in (1, 2, 3):
                checked += 1
                mismatches += bool(brute_force_k_atomic(h, k)) != bool(brute_force_k_atomic(n, k))
        info.update(histories=2000, comparisons=checked, mismatches=mismatches)
        assert mismatches == 0


def test_8_monotonicity(verdicts):
    rows, _ = verdicts
    with criterion("8 monotonicity") as info:
        violations = 0
        for seed, h, gk, lbt, fzf, oracle in rows:
            violations += oracle[0] and not oracle[1]
            violations += oracle[1] and not oracle[2]
            violations += bool(gk) and not (lbt and fzf)
        info.update(histories=len(rows), violations=violations)
        assert violations == 0
