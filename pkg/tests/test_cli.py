from __future__ import annotations

import json
import subprocess
import sys

import pytest

from timing_agent.cli import build_parser, main, resolve_settings


@pytest.fixture(scope="module")
def gen_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    assert main(["gen-corpus", "--seed", "7", "--corners", "TT", "--modes", "read,write", "--paths", "60", "--out", str(out)]) == 0
    return out


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_gen_corpus_layout(gen_dir):
    names = sorted(p.relative_to(gen_dir).as_posix() for p in gen_dir.rglob("*") if p.is_file())
    assert "ground_truth.json" in names
    assert "TT_read/max.rpt" in names and "TT_write/wire.rpt" in names


def test_unknown_subcommand_is_usage_error(capsys):
    assert main(["frobnicate"]) == 2
    assert main([]) == 2


def test_query_json(gen_dir, capsys):
    assert main(["query", "--db", str(gen_dir), "--cm", "TT_read", "--json", "from max | aggregate(count)"]) == 0
    out = _json_out(capsys)
    assert out["value"] == 60 and out["provenance"]["corner_mode"] == "TT_read"


def test_query_errors(gen_dir, capsys):
    assert main(["query", "--db", str(gen_dir), "--cm", "TT_read", "from max |"]) == 1
    assert "QuerySyntaxError" in capsys.readouterr().err
    assert main(["query", "--db", str(gen_dir), "--cm", "XX_read", "from max | aggregate(count)"]) == 2


def test_ingest_round_trip(gen_dir, tmp_path, capsys):
    out = tmp_path / "json"
    assert main(["ingest", "--reports", str(gen_dir), "--out", str(out), "--json"]) == 0
    info = _json_out(capsys)
    assert info["written"]
    assert main(["query", "--db", str(out), "--cm", "TT_write", "--json", "from wire | aggregate(count)"]) == 0
    assert _json_out(capsys)["value"] > 0


def test_ask_m3(gen_dir, tmp_path, capsys):
    truth = json.loads((gen_dir / "ground_truth.json").read_text())
    task = {"id": "q", "text": "crosstalk constraint check", "scope": {"kind": "single", "corner_mode": "TT_read"}, "category": "M3"}
    f = tmp_path / "task.json"
    f.write_text(json.dumps(task))
    assert main(["ask", "--db", str(gen_dir), "--task-file", str(f), "--json"]) == 0
    run = _json_out(capsys)
    cm = truth["corner_modes"]["TT_read"]
    want = sorted({r["net"] for r in cm["unusual_lc"] if r["path_id"] == cm["worst_slack_path"]})
    assert run["status"] == "answered" and run["answer"]["value"] == want
    assert run["answer"]["citations"]


def test_ask_bad_scope_exits_1(gen_dir, tmp_path, capsys):
    f = tmp_path / "task.json"
    f.write_text(json.dumps({"id": "q", "scope": {"kind": "all_modes", "corner": "XX"}, "category": "M1"}))
    assert main(["ask", "--db", str(gen_dir), "--task-file", str(f)]) == 1
    assert "ScopeUnresolvable" in capsys.readouterr().out


def test_bench_writes_only_out(gen_dir, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["bench", "--suite", "multi", "--db", str(gen_dir), "--out", "rep.json", "--csv", "rep.csv"]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["rep.csv", "rep.json"]
    rep = json.loads((tmp_path / "rep.json").read_text())
    assert rep["overall"]["total"] == 10
    capsys.readouterr()
    assert main(["bench", "--suite", "single", "--db", str(gen_dir), "--min-pass-rate", "100", "--json"]) == 0
    assert _json_out(capsys)["overall"]["pass_rate"] == 100.0


def test_bench_min_pass_rate_gate(gen_dir, capsys):
    assert main(["bench", "--suite", "multi", "--db", str(gen_dir), "--tdrg-profile", "set1", "--min-pass-rate", "50"]) == 1
    assert "multi-kind pass_rate 0.0%" in capsys.readouterr().out


def test_llm_without_endpoint_is_usage_error(capsys):
    assert main(["bench", "--suite", "single", "--backend", "llm"]) == 2
    assert "--endpoint" in capsys.readouterr().err


def test_tdrg_show(capsys):
    assert main(["tdrg", "show", "--profile", "set1", "--json"]) == 0
    assert _json_out(capsys)["edges"] == []


def test_settings_precedence(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('[timing_agent]\nmodel = "file-model"\ntemperature = 0.5\ntop_p = 0.8\nmax_retries = 5\n')
    parser = build_parser()
    args = parser.parse_args(["bench", "--suite", "single", "--config", str(cfg), "--temperature", "0.9"])
    env = {"TIMING_AGENT_TOP_P": "0.7", "TIMING_AGENT_TEMPERATURE": "0.1"}
    s = resolve_settings(args, env)
    assert s["temperature"] == 0.9 and s.sources["temperature"] == "flag"
    assert s["top_p"] == 0.7 and s.sources["top_p"] == "env"
    assert s["model"] == "file-model" and s.sources["model"] == "file"
    assert s["max_in_flight"] == 4 and s.sources["max_in_flight"] == "default"


def test_bad_config_is_usage_error(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("colour = 'blue'\n")
    assert main(["tdrg", "show", "--config", str(cfg)]) == 2


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "timing_agent.cli", "tdrg", "show"], capture_output=True, text=True)
    assert proc.returncode == 0 and "profile proposed" in proc.stdout
