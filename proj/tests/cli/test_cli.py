import csv
import json
import os
import subprocess
from pathlib import Path

import pytest

CLI = os.environ.get("HYPVAR_CLI", str(Path(__file__).resolve().parents[2] / "build" / "hypvar"))

HEADER = ("experiment_id,L,T,replicate,point_count,mark_count,pairs,v_total,diag11,"
          "diag_tail,offdiag,abs_dev,status,wall_time_ms")


def run(*args, cwd=None):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, cwd=cwd,
                          timeout=600)


def small_config(path, extra=""):
    path.write_text(
        'experiment_id = "cli"\n'
        "schedule.L = [3, 4]\n"
        "schedule.T = [100, 1000]\n"
        "replicates = 8\n" + extra)
    return path


def test_oracle_passes_without_mc():
    r = run("oracle", "--no-mc")
    assert r.returncode == 0, r.stdout + r.stderr
    lines = r.stdout.strip().splitlines()
    assert [l.split()[:2] for l in lines] == [[f"A{i}", "PASS"] for i in range(1, 6)]


def test_oracle_negative_control_exits_4():
    r = run("oracle", "--no-mc", "--sigma2-offset", "0.1")
    assert r.returncode == 4
    assert r.stdout.startswith("A1 FAIL")


def test_oracle_fejer_fails_closed_form_and_names_bspline(tmp_path):
    cfg = tmp_path / "fejer.cfg"
    cfg.write_text("omega.family = fejer\n")
    r = run("--config", cfg, "oracle", "--no-mc")
    assert r.returncode == 4
    a3 = [l for l in r.stdout.splitlines() if l.startswith("A3")][0]
    assert "FAIL" in a3 and "bspline4" in a3


def test_oracle_json_report(tmp_path):
    r = run("--format", "json", "--out", tmp_path, "oracle", "--no-mc")
    assert r.returncode == 0
    report = json.loads((tmp_path / "oracle_report.json").read_text())
    assert isinstance(report, (list, dict))


def test_experiment_writes_records(tmp_path):
    cfg = small_config(tmp_path / "c.cfg")
    r = run("--config", cfg, "--out", tmp_path / "out", "--threads", 2, "experiment")
    assert r.returncode == 0, r.stderr
    records = (tmp_path / "out" / "cli_records.csv").read_text().splitlines()
    assert records[0] == HEADER
    rows = list(csv.DictReader(records))
    assert len(rows) == 16
    assert all(row["status"] == "ok" for row in rows)
    assert {row["replicate"] for row in rows} == {str(i) for i in range(8)}
    summary = json.loads((tmp_path / "out" / "cli_summary.json").read_text())
    assert len(summary["rows"]) == 2
    assert (tmp_path / "out" / "cli_summary.csv").exists()


def test_experiment_is_reproducible_across_threads(tmp_path):
    cfg = small_config(tmp_path / "c.cfg")

    def records(threads, sub):
        assert run("--config", cfg, "--out", tmp_path / sub, "--threads", threads,
                   "experiment").returncode == 0
        rows = list(csv.reader((tmp_path / sub / "cli_records.csv").read_text().splitlines()))
        return [row[:-1] for row in rows]  # wall time differs

    assert records(1, "a") == records(3, "b")


def test_seed_changes_records(tmp_path):
    cfg = small_config(tmp_path / "c.cfg")
    run("--config", cfg, "--out", tmp_path / "a", "experiment")
    run("--config", cfg, "--seed", 99, "--out", tmp_path / "b", "experiment")
    a = (tmp_path / "a" / "cli_records.csv").read_text()
    b = (tmp_path / "b" / "cli_records.csv").read_text()
    assert a.splitlines()[1].split(",")[7] != b.splitlines()[1].split(",")[7]


def test_budget_refusal_exits_3(tmp_path):
    cfg = small_config(tmp_path / "c.cfg", "budget.max_expected_points = 0.5\n")
    r = run("--config", cfg, "--out", tmp_path / "out", "experiment")
    assert r.returncode == 3
    rows = list(csv.DictReader((tmp_path / "out" / "cli_records.csv").read_text().splitlines()))
    assert rows and all(row["status"] == "budget_refused" for row in rows)
    assert rows[0]["v_total"] == "NA"


def test_sample_budget_refusal_exits_3():
    assert run("sample", "--x-max", 40).returncode == 3


@pytest.mark.parametrize("text", ["bogus = 1\n", "epsilon = -1\n", "schedule.L = [4,\n",
                                  "seed = 1\nseed = 2\n"])
def test_config_errors_exit_2(tmp_path, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    r = run("--config", cfg, "experiment")
    assert r.returncode == 2
    assert "bad.cfg" in r.stderr


def test_bad_flags_exit_2():
    assert run("--format", "xml", "oracle").returncode == 2
    assert run("variance", "--L", 2).returncode == 2
    assert run("nosuch").returncode == 2


def test_sample_ingest_variance_round_trip(tmp_path):
    r = run("--seed", 5, "sample", "--L", 3)
    assert r.returncode == 0
    lengths = tmp_path / "l.txt"
    lengths.write_text(r.stdout)
    values = [float(l) for l in r.stdout.splitlines() if l and not l.startswith("#")]
    assert all(0 < v < 3 for v in values)

    r = run("--out", tmp_path, "ingest", "--lengths", lengths)
    assert r.returncode == 0
    normalized = (tmp_path / "l.normalized.txt").read_text()
    again = [float(l) for l in normalized.splitlines() if l and not l.startswith("#")]
    assert again == sorted(values)

    direct = run("variance", "--lengths", lengths, "--L", 3, "--T", 100)
    assert direct.returncode == 0
    lines = direct.stdout.strip().splitlines()
    assert lines[0] == HEADER
    sampled = run("--seed", 5, "variance", "--L", 3, "--T", 100)
    assert sampled.stdout.strip().splitlines()[1].split(",")[4:12] == lines[1].split(",")[4:12]

    js = json.loads(run("--format", "json", "variance", "--lengths", lengths, "--L", 3, "--T",
                        100).stdout)
    assert js["point_count"] == len(values)
    assert js["v_total"] == pytest.approx(js["diag11"] + js["diag_tail"] + js["offdiag"],
                                          abs=1e-12)


def test_ingest_rejects_malformed_files(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("0.5\nabc\n")
    r = run("ingest", "--lengths", bad)
    assert r.returncode == 2
    assert "bad.txt:2" in r.stderr
    neg = tmp_path / "neg.txt"
    neg.write_text("-1\n")
    assert run("ingest", "--lengths", neg).returncode == 2
    assert run("ingest", "--lengths", tmp_path / "missing.txt").returncode == 2


def test_ingest_eigenvalues(tmp_path):
    ev = tmp_path / "ev.txt"
    ev.write_text("# genus=2\n3.5\n1.25\n")
    r = run("ingest", "--eigenvalues", ev)
    assert r.returncode == 0
    assert [float(l) for l in r.stdout.splitlines() if l and not l.startswith("#")] == [1.25, 3.5]
