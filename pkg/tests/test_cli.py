import json
import subprocess
import sys

import pytest

import kfibtriples.charpoly as cp
from kfibtriples.cli import build_report, dispatch
from kfibtriples.enclosures import PrecisionError


def run(argv, mdir):
    return dispatch(list(argv) + ["--manifest-dir", str(mdir)])


def manifests(mdir):
    return sorted(mdir.glob("*.json"))


def test_seq_output(tmp_path, manifest_dir):
    out = tmp_path / "s.txt"
    assert run(["seq", "--k", "3", "--from", "-1", "--to", "6", "-o", str(out)], manifest_dir) == 0
    assert out.read_text().split() == ["0", "0", "1", "1", "2", "4", "7", "13"]
    assert len(manifests(manifest_dir)) == 1


def test_verify_exit_zero(tmp_path, manifest_dir):
    out = tmp_path / "v.jsonl"
    assert run(["verify", "--k", "3", "--n-max", "100", "-o", str(out)], manifest_dir) == 0
    lines = [json.loads(l) for l in out.read_text().splitlines()]
    assert {l["check"] for l in lines} >= {"root-window", "binet-residual"}
    m = json.loads(manifests(manifest_dir)[0].read_text())
    assert m["outcome"]["exit_code"] == 0 and m["subcommand"] == "verify"


def test_usage_error_exit_two(manifest_dir, capsys):
    assert run(["roots", "--k", "0"], manifest_dir) == 2
    assert run(["seq", "--k", "2"], manifest_dir) == 2
    assert run(["expand", "--k", "2", "--T", "0", "--at", "10,12"], manifest_dir) == 2


def test_search_k2_empty(tmp_path, manifest_dir):
    out = tmp_path / "t.jsonl"
    assert run(["search", "--k", "2", "--z-max", "40", "-o", str(out)], manifest_dir) == 0
    assert out.read_text() == ""
    assert (tmp_path / "t.jsonl.ckpt.json").exists()
    assert len(manifests(manifest_dir)) == 1


def test_search_resume(tmp_path, manifest_dir):
    ck = tmp_path / "c.json"
    out = tmp_path / "t.jsonl"
    assert run(["search", "--k", "3", "--z-max", "20", "--checkpoint", str(ck), "-o", str(out)],
               manifest_dir) == 0
    assert run(["search", "--k", "3", "--z-max", "30", "--resume", str(ck), "-o", str(out)],
               manifest_dir) == 0
    assert json.loads((tmp_path / "t.jsonl.ckpt.json").read_text())["cursor"] == 30


@pytest.mark.parametrize("argv", [
    ["roots", "--k", "3"], ["norms", "--k", "5"], ["gcd-scan", "--k", "2", "--x-max", "20"],
    ["indep", "--k", "3", "--probe-bound", "2"], ["square-scan", "--k-max", "50"],
    ["expand", "--k", "2", "--T", "2", "--at", "10,12,14"],
])
def test_subcommands_pass(argv, tmp_path, manifest_dir):
    out = tmp_path / "o.json"
    assert run(argv + ["-o", str(out)], manifest_dir) == 0
    assert out.stat().st_size > 0
    assert len(manifests(manifest_dir)) == 1


def test_roots_json(tmp_path, manifest_dir):
    out = tmp_path / "r.json"
    run(["roots", "--k", "2", "-o", str(out)], manifest_dir)
    d = json.loads(out.read_text())
    assert d["dominant"]["mid"].startswith("1.61803398874989")
    assert len(d["others"]) == 1


def test_report_two_rows(tmp_path, manifest_dir):
    run(["verify", "--k", "2", "--n-max", "20", "-o", str(tmp_path / "a")], manifest_dir)
    run(["square-scan", "--k-max", "20", "-o", str(tmp_path / "b")], manifest_dir)
    rep = tmp_path / "rep.md"
    assert dispatch(["report", str(manifest_dir), "-o", str(rep),
                     "--manifest-dir", str(tmp_path / "other")]) == 0
    text = rep.read_text()
    rows = [l for l in text.splitlines() if l.startswith("| ") and not l.startswith("| run")]
    assert len(rows) == 2 and "FAIL" not in text


def test_report_empty_dir(tmp_path):
    (tmp_path / "empty").mkdir()
    assert dispatch(["report", str(tmp_path / "empty"), "--manifest-dir", str(tmp_path / "m")]) == 2


def test_report_flags_failure(tmp_path, manifest_dir):
    manifest_dir.mkdir()
    bad = {"subcommand": "gcd-scan", "outcome": {"status": "fail", "exit_code": 1, "checks": [
        {"check": "gcd-bound", "k": 3, "passed": False, "records": 1,
         "failures": [{"x": 9, "y": 4, "ok": False}]}]}}
    (manifest_dir / "bad.json").write_text(json.dumps(bad))
    text, ok = build_report([(manifest_dir / "bad.json", bad)])
    assert not ok and "FAIL" in text and '"x": 9' in text
    assert dispatch(["report", str(manifest_dir), "-o", str(tmp_path / "r.md"),
                     "--manifest-dir", str(tmp_path / "m2")]) == 1


def test_config_file(tmp_path, manifest_dir):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"k": 4, "to": 5}))
    out = tmp_path / "s.txt"
    assert run(["seq", "--config", str(cfg), "-o", str(out)], manifest_dir) == 0
    assert out.read_text().split() == ["1", "1", "2", "4", "8"]
    # explicit flags override the file
    assert run(["seq", "--config", str(cfg), "--k", "2", "-o", str(out)], manifest_dir) == 0
    assert out.read_text().split() == ["1", "1", "2", "3", "5"]


def test_manifest_replay_byte_identical(tmp_path, manifest_dir):
    out1 = tmp_path / "first.json"
    run(["norms", "--k", "6", "-o", str(out1)], manifest_dir)
    m = json.loads(manifests(manifest_dir)[0].read_text())
    argv = list(m["argv"])
    i = argv.index("--out")
    argv[i + 1] = str(tmp_path / "second.json")
    assert dispatch(argv + ["--manifest-dir", str(tmp_path / "m2")]) == 0
    assert out1.read_bytes() == (tmp_path / "second.json").read_bytes()


def test_precision_cap_exit_three(monkeypatch, manifest_dir):
    def never(k, bits):
        raise PrecisionError("forced", bits)
    monkeypatch.setattr(cp, "all_roots", never)
    assert run(["roots", "--k", "3"], manifest_dir) == 3
    m = json.loads(manifests(manifest_dir)[0].read_text())
    assert m["outcome"]["exit_code"] == 3


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "kfibtriples", "seq", "--k", "2", "--to", "5",
                        "--manifest-dir", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.split() == ["1", "1", "2", "3", "5"]
