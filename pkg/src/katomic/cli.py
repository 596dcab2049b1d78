"""Command-line front end: check, min-k, gen, reduce, bench."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

from . import __version__
from .fzf import check_2atomic_fzf
from .generators import GenConfig, QuorumConfig, gen_random_small, gen_witnessed, simulate_quorum
from .history import (
    History,
    TraceSyntaxError,
    drop_anomalous_reads,
    dump_trace,
    history_records,
    normalize,
    parse_trace,
    partition_by_key,
    perturb_duplicates,
    validate,
)
from .lbt import check_2atomic_lbt
from .oracle import DEFAULT_CAP, CapExceeded, Unknown, brute_force_k_atomic, min_k
from .weighted import BinPackingInstance, binpacking_to_kwav
from .witness import Verdict
from .zones import Zone, check_1atomic

EXIT_OK, EXIT_NO, EXIT_ERROR, EXIT_ANOMALY = 0, 1, 2, 3

ALGOS = ("gk", "lbt", "fzf", "brute")


class UsageError(Exception):
    pass


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, Zone):
        return obj.to_json()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def exit_status(report: dict) -> int:
    """Exit code for a check report: 3 on anomalies, 1 on any NO, else 0."""
    verdicts = [e["verdict"] for e in report["entries"]]
    if "ANOMALOUS" in verdicts:
        return EXIT_ANOMALY
    if "NO" in verdicts:
        return EXIT_NO
    return EXIT_OK


@dataclass(frozen=True)
class _Job:
    history: History
    command: str
    k: int
    algo: str
    lenient: bool
    allow_ties: bool
    cap: int
    explain: bool


def _prepare(job: _Job, entry: dict) -> History | None:
    h = job.history
    if job.allow_ties:
        h = perturb_duplicates(h)
    anomalies = validate(h)
    if anomalies and job.lenient:
        h = drop_anomalous_reads(h, anomalies)
        entry["dropped"] = len(job.history) - len(h)
        remaining = validate(h)
        entry["anomalies"] = [a.to_json() for a in anomalies]
        anomalies = remaining
    if anomalies:
        entry["verdict"] = "ANOMALOUS"
        entry["anomalies"] = [a.to_json() for a in anomalies]
        return None
    return normalize(h)


def _run_algo(h: History, k: int, algo: str, cap: int, explain: bool) -> Verdict:
    if algo == "gk":
        return check_1atomic(h)
    if algo == "lbt":
        return check_2atomic_lbt(h)
    if algo == "fzf":
        return check_2atomic_fzf(h, explain=explain)
    return brute_force_k_atomic(h, k, cap=cap)


def _process(job: _Job) -> tuple[dict, Any]:
    entry: dict[str, Any] = {"key": job.history.key, "ops": len(job.history), "anomalies": []}
    h = _prepare(job, entry)
    if h is None:
        return entry, None
    t0 = time.perf_counter()
    if job.command == "min-k":
        res = min_k(h, cap=job.cap)
        entry["verdict"] = str(res) if isinstance(res, Unknown) else "OK"
        entry["min_k"] = res.lower_bound if isinstance(res, Unknown) else res
        entry["exact"] = not isinstance(res, Unknown)
        entry["timing"] = time.perf_counter() - t0
        return entry, None
    entry["k_checked"] = job.k
    entry["algorithm"] = job.algo
    try:
        v = _run_algo(h, job.k, job.algo, job.cap, job.explain)
    except CapExceeded as exc:
        entry["verdict"] = "UNKNOWN"
        entry["error"] = str(exc)
        return entry, None
    entry["timing"] = time.perf_counter() - t0
    entry["verdict"] = v.label
    entry["counters"] = v.stats
    if v.certificate is not None:
        entry["certificate"] = _jsonable(v.certificate)
    if v.explain is not None:
        entry["explain"] = v.explain
    witness = v.witness.to_json() if v.witness is not None else None
    return entry, witness


def _load(path: str):
    try:
        if path == "-":
            return parse_trace(sys.stdin.buffer)
        with open(path, "rb") as fh:
            return parse_trace(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except TraceSyntaxError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _histories(path: str) -> dict[str, History]:
    try:
        return partition_by_key(_load(path))
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _run_jobs(jobs: list[_Job], workers: int) -> list[tuple[dict, Any]]:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_process, jobs))
    else:
        results = [_process(j) for j in jobs]
    return sorted(results, key=lambda r: r[0]["key"])


def _print_entries(report: dict, out) -> None:
    for e in report["entries"]:
        parts = [e["key"] or "<default>", e["verdict"]]
        if "k_checked" in e:
            parts += [f"k={e['k_checked']}", f"algo={e['algorithm']}"]
        if "min_k" in e:
            parts.append(f"min_k={'>=' if not e['exact'] else ''}{e['min_k']}")
        if e.get("anomalies"):
            parts.append(f"anomalies={len(e['anomalies'])}")
        if e.get("dropped"):
            parts.append(f"dropped={e['dropped']}")
        if "timing" in e:
            parts.append(f"{e['timing']:.3f}s")
        print("\t".join(parts), file=out)
        for a in e.get("anomalies", []) if e["verdict"] == "ANOMALOUS" else []:
            print(f"  {a['kind']}: {', '.join(a['ops'])}", file=out)
        if "certificate" in e:
            print(f"  certificate: {json.dumps(e['certificate'])}", file=out)
        for chunk in e.get("explain", []):
            print(f"  chunk {chunk['interval']} forward={chunk['forward']} backward={chunk['backward']}", file=out)
            for t in chunk["tried"]:
                print(f"    {'viable' if t['viable'] else 'rejected'}: {' '.join(t['order'])}", file=out)


def cmd_check(args: argparse.Namespace) -> int:
    algo = args.algo or ("gk" if args.k == 1 else "fzf")
    if algo == "gk" and args.k != 1:
        raise UsageError("--algo gk decides k=1 only")
    if algo in ("lbt", "fzf") and args.k != 2:
        raise UsageError(f"--algo {algo} decides k=2 only")
    if args.k < 1:
        raise UsageError("--k must be positive")
    hs = _histories(args.trace)
    jobs = [
        _Job(h, "check", args.k, algo, args.lenient, args.allow_ties, args.brute_cap, args.explain)
        for h in hs.values()
    ]
    results = _run_jobs(jobs, args.jobs)
    report = {"command": "check", "entries": [e for e, _ in results]}
    if args.emit_witness:
        found = {e["key"]: w for e, w in results if w is not None}
        payload = next(iter(found.values())) if len(results) == 1 and found else found
        with open(args.emit_witness, "w") as fh:
            json.dump(payload, fh)
        for e, w in results:
            if w is not None:
                e["witness"] = args.emit_witness
    status = exit_status(report)
    report["exit_status"] = status
    if args.json:
        json.dump(report, sys.stdout, indent=2)
        print()
    else:
        _print_entries(report, sys.stdout)
    return status


def cmd_min_k(args: argparse.Namespace) -> int:
    hs = _histories(args.trace)
    jobs = [_Job(h, "min-k", 0, "", args.lenient, args.allow_ties, args.brute_cap, False) for h in hs.values()]
    results = _run_jobs(jobs, args.jobs)
    report = {"command": "min-k", "entries": [e for e, _ in results]}
    status = EXIT_ANOMALY if any(e["verdict"] == "ANOMALOUS" for e in report["entries"]) else EXIT_OK
    report["exit_status"] = status
    if args.json:
        json.dump(report, sys.stdout, indent=2)
        print()
    else:
        _print_entries(report, sys.stdout)
    return status


def _pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two integers like 1,10, got {text!r}") from None
    return a, b


def _write_records(records, out: str | None) -> None:
    if out in (None, "-"):
        dump_trace(records, sys.stdout)
        return
    try:
        with open(out, "w", encoding="utf-8") as fh:
            dump_trace(records, fh)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from None


def cmd_gen(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else 0
    if args.kind == "witnessed":
        h = gen_witnessed(GenConfig(seed, args.ops, args.writes_fraction, args.k, args.stretch, args.key))
        _write_records(history_records(h), args.out)
    elif args.kind == "quorum":
        t = simulate_quorum(QuorumConfig(
            seed, args.replicas, args.write_quorum, args.read_quorum,
            args.clients, args.ops, args.latency, args.writes_fraction, args.keys,
        ))
        _write_records(t.records, args.out)
    else:
        if args.ops > 12:
            raise UsageError("gen random supports at most 12 operations")
        _write_records(history_records(gen_random_small(seed, args.ops, args.key)), args.out)
    return EXIT_OK


def cmd_reduce(args: argparse.Namespace) -> int:
    try:
        sizes = tuple(int(s) for s in args.sizes.split(",") if s.strip())
        inst = BinPackingInstance(sizes, args.bins, args.capacity)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    wh, k = binpacking_to_kwav(inst)
    _write_records(wh.records(), args.out)
    if args.json:
        print(json.dumps({"k": k, "ops": len(wh.base)}))
    elif args.out not in (None, "-"):
        print(f"k={k}")
    return EXIT_OK


_BENCH = {
    "gk": check_1atomic,
    "lbt": check_2atomic_lbt,
    "fzf": check_2atomic_fzf,
}


def cmd_bench(args: argparse.Namespace) -> int:
    if args.min_exp > args.max_exp or args.min_exp < 0:
        raise UsageError("need 0 <= --min-exp <= --max-exp")
    seed = args.seed if args.seed is not None else 0
    algos = args.algo.split(",")
    for a in algos:
        if a not in _BENCH:
            raise UsageError(f"unknown algorithm {a!r}")
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["n", "algo", "elapsed", "steps"])
    for e in range(args.min_exp, args.max_exp + 1):
        n = 2**e
        h = normalize(gen_witnessed(GenConfig(seed, n, 0.5, args.k, args.stretch)))
        for a in algos:
            t0 = time.perf_counter()
            v = _BENCH[a](h)
            out.writerow([n, a, f"{time.perf_counter() - t0:.4f}", v.stats["steps"]])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--brute-cap", type=int, default=DEFAULT_CAP,
                        help="largest history the exhaustive oracle will take")

    verify = argparse.ArgumentParser(add_help=False)
    verify.add_argument("trace", help="JSON-lines trace file, or - for stdin")
    verify.add_argument("--lenient", action="store_true",
                        help="drop anomalous reads and verify the rest")
    verify.add_argument("--allow-ties", action="store_true",
                        help="break duplicate timestamps deterministically instead of rejecting")
    verify.add_argument("--jobs", type=int, default=1, help="verify keys in parallel")

    p = argparse.ArgumentParser(prog="katomic", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common, verify], help="decide k-atomicity per key")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--algo", choices=ALGOS)
    c.add_argument("--emit-witness", metavar="PATH")
    c.add_argument("--explain", action="store_true", help="show FZF chunks and candidate orders")
    c.set_defaults(func=cmd_check)

    m = sub.add_parser("min-k", parents=[common, verify], help="smallest k per key")
    m.set_defaults(func=cmd_min_k)

    g = sub.add_parser("gen", parents=[common], help="generate traces")
    g.add_argument("kind", choices=("witnessed", "quorum", "random"))
    g.add_argument("--ops", type=int, default=100)
    g.add_argument("--k", type=int, default=2, help="staleness bound for witnessed traces")
    g.add_argument("--writes-fraction", type=float, default=0.5)
    g.add_argument("--stretch", type=_pair, default=(2, 2), help="max_back,max_forward in commit slots")
    g.add_argument("--key", default="x")
    g.add_argument("--replicas", type=int, default=3)
    g.add_argument("--write-quorum", type=int, default=2)
    g.add_argument("--read-quorum", type=int, default=2)
    g.add_argument("--clients", type=int, default=3)
    g.add_argument("--keys", type=int, default=1)
    g.add_argument("--latency", type=_pair, default=(1, 10))
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("reduce", parents=[common], help="build hard weighted instances")
    r.add_argument("problem", choices=("binpack",))
    r.add_argument("--sizes", required=True, help="comma-separated item sizes")
    r.add_argument("--bins", type=int, required=True)
    r.add_argument("--capacity", type=int, required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_reduce)

    b = sub.add_parser("bench", parents=[common], help="CSV of steps and time for doubling n")
    b.add_argument("--algo", default="fzf", help="comma-separated: gk, lbt, fzf")
    b.add_argument("--k", type=int, default=2)
    b.add_argument("--min-exp", type=int, default=10)
    b.add_argument("--max-exp", type=int, default=17)
    b.add_argument("--stretch", type=_pair, default=(1, 1))
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"katomic: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
