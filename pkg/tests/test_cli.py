import json
import subprocess
import sys

from proptree import bench
from proptree.cli import main

RUN = ["run", "--workload", "bst", "--mutant", "delete-drops-right", "--property", "delete-model", "--fuel", "5000", "--time-limit", "10"]


def test_run_to_stdout(capsys):
    assert main(RUN + ["--trials", "2"]) == 0
    records = bench.read_jsonl(capsys.readouterr().out.splitlines())
    assert len(records) == 2 and all(r["foundbug"] for r in records)


def test_run_appends_to_file(tmp_path, capsys):
    out = tmp_path / "results.jsonl"
    assert main(RUN + ["--out", str(out)]) == 0
    assert main(RUN + ["--out", str(out), "--seed", "5"]) == 0
    lines = out.read_text().splitlines()
    assert [json.loads(l)["seed"] for l in lines] == [0, 5]
    assert capsys.readouterr().out == ""


def test_unsolved_campaign_still_exits_zero(capsys):
    assert main(["run", "--workload", "bst", "--property", "insert-valid", "--fuel", "50"]) == 0
    (r,) = bench.read_jsonl(capsys.readouterr().out.splitlines())
    assert not r["foundbug"] and r["passed"] + r["discards"] == 50


def test_harness_errors_exit_nonzero(tmp_path, capsys):
    assert main(RUN + ["--pool", "heap"]) == 2
    assert main(["run", "--workload", "ifc", "--property", "x"]) == 2
    assert main(["buckets", str(tmp_path / "missing.jsonl")]) == 2
    assert main(["shrink-report"]) == 2
    assert "pbt: error:" in capsys.readouterr().err


def test_buckets_command(tmp_path, capsys):
    out = tmp_path / "r.jsonl"
    main(RUN + ["--trials", "2", "--out", str(out)])
    assert main(["buckets", "--rule", "any", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "task,bucket,mean_time,solve_rate"
    assert lines[1].startswith("bst/delete-drops-right/delete-model,")
    assert main(["buckets", "--format", "json", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)[0]["solve_rate"] == 1.0


def test_shrink_report_from_campaign(capsys):
    assert main(["shrink-report", "--workload", "bst", "--mutant", "delete-drops-right", "--property", "delete-model", "--trials", "3"]) == 0
    q = json.loads(capsys.readouterr().out)
    assert len(q["trials"]) == 3 and q["failed"] == 0


def test_list(capsys):
    assert main(["list", "--workload", "lists"]) == 0
    assert capsys.readouterr().out == "lists/long-input-drops-last/checksum-model\n"


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "proptree.cli", "list", "--workload", "stlc"], capture_output=True, text=True, check=True)
    assert len(out.stdout.splitlines()) == 17
