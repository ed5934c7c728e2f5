import subprocess
import sys

import pytest

from evobs.cli import main
from evobs.trace import load_trace


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def langton_trace(tmp_path_factory):
    path = tmp_path_factory.mktemp("lt") / "langton.jsonl"
    assert run("run", "langton", "--steps", 200, "--out", path) == 0
    return path


def test_run_langton_split(langton_trace, capsys):
    tr = load_trace(langton_trace)
    assert len(tr) == 201
    assert tr.causal_events[0][0].state_index == 127


def test_run_cbs_zero_steps(tmp_path, capsys):
    out = tmp_path / "t.jsonl"
    assert run("run", "cbs", "--steps", 0, "--out", out) == 0
    assert len(load_trace(out)) == 1
    assert "1 states" in capsys.readouterr().out


@pytest.mark.parametrize("model,extra", [
    ("cbs", ["--steps", 30, "--seed", 4]),
    ("alchemy", ["--collisions", 30, "--seed", 4]),
    ("langton", ["--steps", 30]),
    ("synth", ["--seed", 4]),
])
def test_run_twice_byte_identical(tmp_path, model, extra):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run("run", model, *extra, "--out", a) == 0
    assert run("run", model, *extra, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_error_leaves_no_file(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("n = 0\n")
    out = tmp_path / "t.jsonl"
    assert run("run", "cbs", "--config", cfg, "--out", out) == 2
    assert not out.exists() and not (tmp_path / "t.jsonl.partial").exists()
    assert "evobs: error:" in capsys.readouterr().err


def test_observe_langton(langton_trace, capsys):
    code = run("observe", langton_trace, "--format", "machine")
    out = capsys.readouterr().out
    assert "axiom.reproduction.status=Satisfied" in out
    assert "axiom.preservation.status=Undetermined" in out
    assert code == (1 if "status=Violated" in out else 0)


def test_observe_subset_exit_zero(langton_trace, capsys):
    assert run("observe", langton_trace, "--axioms", "reproduction,preservation") == 0
    out = capsys.readouterr().out
    assert "reproduction" in out and "heredity" not in out


def test_machine_report_is_stable(langton_trace, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    run("observe", langton_trace, "--format", "machine", "--out", a)
    run("observe", langton_trace, "--format", "machine", "--out", b)
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert all("=" in line for line in lines)
    assert lines[0].startswith("trace.config_digest=")


def test_observe_empty_trace(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("population = 0\n")
    t = tmp_path / "t.jsonl"
    run("run", "cbs", "--config", cfg, "--steps", 2, "--out", t)
    capsys.readouterr()
    assert run("observe", t, "--format", "machine") == 0
    out = capsys.readouterr().out
    assert out.count("status=Undetermined") == 12


def test_observe_planted_selection(tmp_path, capsys):
    t = tmp_path / "s.jsonl"
    assert run("synth", "--seed", 1, "--out", t) == 0
    assert "correlation=Satisfied" in capsys.readouterr().out
    run("observe", t, "--format", "machine", "--axioms", "correlation")
    assert "axiom.correlation.status=Satisfied" in capsys.readouterr().out


def test_observe_errors(tmp_path, langton_trace, capsys):
    assert run("observe", tmp_path / "missing.jsonl") == 2
    assert run("observe", langton_trace, "--axioms", "bogus") == 2
    bad = tmp_path / "obs.toml"
    bad.write_text("delta_mut = [1, 0, 0]\n")
    assert run("observe", langton_trace, "--observer-config", bad) == 2
    err = capsys.readouterr().err
    assert "unknown axiom" in err and "delta_mut" in err


def test_observe_edges_export(langton_trace, tmp_path, capsys):
    edges = tmp_path / "edges.txt"
    run("observe", langton_trace, "--edges", edges)
    kinds = {line.split()[-1] for line in edges.read_text().splitlines()}
    assert kinds == {"recognition", "causal", "parent"}


def test_dump_langton_seed(langton_trace, capsys):
    assert run("dump", langton_trace, "--state", 0) == 0
    out = capsys.readouterr().out
    assert sum(ch.isdigit() for ch in out) == 86


def test_dump_empty_cbs_state(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("population = 0\n")
    t = tmp_path / "t.jsonl"
    run("run", "cbs", "--config", cfg, "--steps", 0, "--out", t)
    capsys.readouterr()
    assert run("dump", t, "--state", 0) == 0
    assert capsys.readouterr().out == ""


def test_dump_alchemy(tmp_path, capsys):
    cfg = tmp_path / "a.toml"
    cfg.write_text('init = ["\\\\x.x", "\\\\x.x", "\\\\x1.\\\\x2.x2"]\n')
    t = tmp_path / "t.jsonl"
    assert run("run", "alchemy", "--config", cfg, "--collisions", 0, "--out", t) == 0
    capsys.readouterr()
    run("dump", t, "--state", 0)
    assert capsys.readouterr().out.splitlines() == [
        "<3,1,1> \\x1.x1", "<3,1,2> \\x1.x1", "<5,1,1> \\x1.\\x2.x2"]


def test_dump_out_of_range(langton_trace, capsys):
    assert run("dump", langton_trace, "--state", 999) == 2
    assert "out of range" in capsys.readouterr().err


def test_oracle_check(tmp_path, capsys):
    t = tmp_path / "c.jsonl"
    run("run", "cbs", "--steps", 8, "--seed", 3, "--out", t)
    assert run("oracle-check", t) == 0
    assert capsys.readouterr().out.strip().endswith("match")
    assert run("oracle-check", t, "--max-entities", 5) == 2


def test_long_flags_only():
    with pytest.raises(SystemExit):
        main(["run", "cbs", "--ste", "3", "--out", "x"])


def test_module_entry_point(tmp_path):
    out = tmp_path / "t.jsonl"
    proc = subprocess.run([sys.executable, "-m", "evobs", "run", "cbs", "--steps", "2", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and out.exists()
