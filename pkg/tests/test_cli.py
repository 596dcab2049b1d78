import json
import subprocess
import sys

import pytest

from katomic import check_witness, parse_trace, read, write
from katomic.cli import exit_status, main
from katomic.history import dump_trace, history_records
from katomic.weighted import weighted_from_trace

from conftest import make


@pytest.fixture
def trace_of(tmp_path):
    def build(h, name="t.jsonl"):
        p = tmp_path / name
        with open(p, "w") as fh:
            dump_trace(history_records(h), fh)
        return str(p)

    return build


def run_json(capsys, *argv):
    code = main([*argv, "--json"])
    report = json.loads(capsys.readouterr().out)
    assert report["exit_status"] == code == exit_status(report) or report["command"] != "check"
    return code, report


def test_check_k1_yes(trace_of, HA, capsys):
    assert main(["check", "--k", "1", trace_of(HA)]) == 0
    assert "YES" in capsys.readouterr().out


def test_check_k2_no(trace_of, HC, capsys):
    code, report = run_json(capsys, "check", "--k", "2", trace_of(HC))
    assert code == 1
    (e,) = report["entries"]
    assert e["verdict"] == "NO" and e["algorithm"] == "fzf" and "certificate" in e


def test_check_brute_k3(trace_of, HC, capsys):
    code, report = run_json(capsys, "check", "--k", "3", "--algo", "brute", trace_of(HC))
    assert code == 0


def test_emit_witness(trace_of, HB, tmp_path, capsys):
    out = tmp_path / "w.json"
    code = main(["check", "--k", "2", "--algo", "lbt", "--emit-witness", str(out), trace_of(HB)])
    assert code == 0
    entries = json.loads(out.read_text())
    order = [x for e in entries for x in ([e["slot"]] if "slot" in e else e["container"])]
    assert check_witness(HB, order, 2)


def test_emit_witness_multi_key(tmp_path, capsys):
    p = tmp_path / "multi.jsonl"
    with open(p, "w") as fh:
        dump_trace(history_records(make(write("w", "a", 0, 2), read("r", "a", 4, 6), key="k1"))
                   + history_records(make(write("w", "a", 0, 2), key="k2")), fh)
    out = tmp_path / "w.json"
    assert main(["check", "--k", "1", "--algo", "brute", "--emit-witness", str(out), str(p)]) == 0
    assert sorted(json.loads(out.read_text())) == ["k1", "k2"]


def test_anomalous_exit_3_and_lenient(trace_of, capsys):
    h = make(write("w", "a", 0, 2), read("r1", "a", 4, 6), read("r2", "zz", 8, 10))
    path = trace_of(h)
    code, report = run_json(capsys, "check", "--k", "1", path)
    assert code == 3
    assert report["entries"][0]["anomalies"][0]["kind"] == "ReadWithoutDictatingWrite"
    code, report = run_json(capsys, "check", "--k", "1", "--lenient", path)
    assert code == 0 and report["entries"][0]["dropped"] == 1


def test_allow_ties(trace_of, capsys):
    h = make(write("w1", "a", 0, 2), write("w2", "b", 2, 6), read("r", "a", 6, 8))
    path = trace_of(h)
    assert main(["check", "--k", "2", path]) == 3
    assert main(["check", "--k", "2", "--allow-ties", path]) == 0
    capsys.readouterr()


def test_bad_trace_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"key": "x"}\n')
    assert main(["check", "--k", "1", str(p)]) == 2
    assert "line 1" in capsys.readouterr().err
    assert main(["check", "--k", "1", str(tmp_path / "missing")]) == 2


def test_algo_k_mismatch_exit_2(trace_of, HA, capsys):
    assert main(["check", "--k", "3", "--algo", "fzf", trace_of(HA)]) == 2


def test_explain(trace_of, HB, capsys):
    assert main(["check", "--k", "2", "--explain", trace_of(HB)]) == 0
    out = capsys.readouterr().out
    assert "rejected: w2 w1" in out and "viable: w1 w2" in out


def test_min_k(trace_of, HB, HC, capsys):
    code, report = run_json(capsys, "min-k", trace_of(HB))
    assert code == 0 and report["entries"][0]["min_k"] == 2
    code, report = run_json(capsys, "min-k", "--brute-cap", "3", trace_of(HC))
    assert report["entries"][0]["verdict"] == "Unknown(>=3)" and not report["entries"][0]["exact"]


def test_jobs_parallel_matches_serial(tmp_path, capsys):
    p = tmp_path / "q.jsonl"
    assert main(["gen", "quorum", "--seed", "4", "--ops", "60", "--keys", "3", "--out", str(p)]) == 0
    _, serial = run_json(capsys, "check", "--k", "2", str(p))
    _, par = run_json(capsys, "check", "--k", "2", "--jobs", "2", str(p))
    strip = lambda r: [(e["key"], e["verdict"]) for e in r["entries"]]
    assert strip(serial) == strip(par) and len(strip(serial)) == 3


def test_gen_is_deterministic(capsys):
    main(["gen", "witnessed", "--seed", "1", "--ops", "30"])
    a = capsys.readouterr().out
    main(["gen", "witnessed", "--seed", "1", "--ops", "30"])
    assert a == capsys.readouterr().out
    assert len(parse_trace(a)) == 30


def test_gen_random_cap(capsys):
    assert main(["gen", "random", "--ops", "13"]) == 2


def test_reduce(tmp_path, capsys):
    p = tmp_path / "r.jsonl"
    assert main(["reduce", "binpack", "--sizes", "2,3", "--bins", "2", "--capacity", "3",
                 "--out", str(p), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["k"] == 5
    (wh,) = weighted_from_trace(parse_trace(p.read_bytes())).values()
    assert sorted(wh.weight.values()) == [1, 1, 1, 2, 3]


def test_bench_rows(capsys):
    assert main(["bench", "--algo", "fzf,lbt", "--min-exp", "4", "--max-exp", "6"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "n,algo,elapsed,steps" and len(lines) == 1 + 3 * 2


def test_console_entry_point_via_module(trace_of, HC):
    proc = subprocess.run(
        [sys.executable, "-m", "katomic.cli", "check", "--k", "2", "--json", trace_of(HC)],
        capture_output=True, text=True,
    )
    report = json.loads(proc.stdout)
    assert proc.returncode == exit_status(report) == 1
