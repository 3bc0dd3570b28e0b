import csv
import json
import subprocess
import sys

import pytest

from wdnsta import __version__
from wdnsta.benchmarks import reference_designs, verify_all
from wdnsta.cli import main

from toys import BRIDGE

STA = "11,7,10,4,10,7,7,1"
SMALL = ["--se", "4", "--iters", "15", "--runs", "3", "--seed", "7", "--jobs", "1", "--quiet"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def bridge_file(tmp_path):
    path = tmp_path / "bridge.net"
    path.write_text(BRIDGE)
    return str(path)


class TestOptimize:
    def test_report_and_traces(self, tmp_path, capsys):
        out = tmp_path / "run"
        code, stdout, _ = run(capsys, "optimize", "two-loop", *SMALL, "--out", str(out))
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["config"]["se"] == 4 and report["config"]["seed"] == 7
        assert report["schedule"]["pc"] == 2e4 and report["n_runs"] == 3
        assert [r["run_index"] for r in report["runs"]] == [0, 1, 2]
        for r in report["runs"]:
            rows = list(csv.reader((out / r["trace"]).open()))
            assert rows[0] == ["iteration", "archive_cost", "working_cost", "pc", "feasible_flag"]
            assert len(rows) == 17
            assert r["evaluations"] == 4 * (1 + 4 * 15)
        assert "feasible" in stdout and "report:" in stdout

    def test_replay_identical(self, tmp_path, capsys):
        out = tmp_path / "run"
        run(capsys, "optimize", "hanoi", *SMALL, "--pc", "4e4", "--out", str(out))
        code, stdout, _ = run(capsys, "replay", str(out / "report.json"))
        assert code == 0
        assert stdout.count("identical") == 3

    def test_replay_detects_tampering(self, tmp_path, capsys):
        out = tmp_path / "run"
        run(capsys, "optimize", "two-loop", *SMALL, "--out", str(out))
        path = out / "report.json"
        report = json.loads(path.read_text())
        report["runs"][1]["total"] += 1.0
        path.write_text(json.dumps(report))
        code, stdout, _ = run(capsys, "replay", str(path), "--run-index", "1")
        assert code == 2 and "DIFFERS" in stdout

    def test_linear_schedule_recorded(self, tmp_path, capsys):
        out = tmp_path / "run"
        run(capsys, "optimize", "two-loop", *SMALL, "--pc-linear", "1e4:1e5", "--out", str(out))
        schedule = json.loads((out / "report.json").read_text())["schedule"]
        assert (schedule["mode"], schedule["pc"], schedule["pc_end"]) == ("linear", 1e4, 1e5)

    def test_se_defaults_to_decision_count(self, tmp_path, capsys):
        out = tmp_path / "run"
        run(capsys, "optimize", "two-loop", "--iters", "1", "--runs", "1", "--jobs", "1",
            "--quiet", "--out", str(out))
        assert json.loads((out / "report.json").read_text())["config"]["se"] == 8

    def test_omega_choice(self, tmp_path, capsys):
        out = tmp_path / "run"
        run(capsys, "optimize", "two-loop", *SMALL, "--omega", "10.5088", "--out", str(out))
        report = json.loads((out / "report.json").read_text())
        assert (report["omega"], report["alpha"], report["beta"]) == (10.5088, 1.85, 4.87)


class TestEvaluate:
    def test_head_table(self, capsys):
        code, out, _ = run(capsys, "evaluate", "two-loop", "--design", STA)
        assert code == 0
        assert "total 419000.00" in out and "feasible: yes" in out
        assert len([line for line in out.splitlines() if line.split()[:1] in (["2"], ["7"])]) == 2

    def test_diameters_equal_indices(self, capsys):
        _, by_index, _ = run(capsys, "evaluate", "two-loop", "--design", STA)
        _, by_size, _ = run(capsys, "evaluate", "two-loop", "--diameters", "18,10,16,4,16,10,10,1")
        assert by_index == by_size

    def test_design_file(self, tmp_path, capsys):
        path = tmp_path / "d.txt"
        path.write_text(STA.replace(",", " ") + "\n")
        _, from_file, _ = run(capsys, "evaluate", "two-loop", "--design-file", str(path))
        _, inline, _ = run(capsys, "evaluate", "two-loop", "--design", STA)
        assert from_file == inline

    def test_json_agrees_with_text(self, capsys):
        _, text, _ = run(capsys, "evaluate", "hanoi", "--design", ",".join(["3"] * 34), "--pc", "4e4")
        _, raw, _ = run(capsys, "evaluate", "hanoi", "--design", ",".join(["3"] * 34), "--pc", "4e4", "--json")
        rec = json.loads(raw)
        assert f"total {rec['total']:.2f}" in text
        rows = {line.split()[0]: line.split()[1:] for line in text.splitlines()[3:]}
        for node in rec["nodes"]:
            assert float(rows[node["id"]][0]) == pytest.approx(node["head"])
            assert float(rows[node["id"]][3]) == pytest.approx(node["deficit"])

    def test_largest_pipes(self, capsys):
        _, raw, _ = run(capsys, "evaluate", "two-loop", "--design", ",".join(["14"] * 8), "--json")
        rec = json.loads(raw)
        assert rec["feasible"] and rec["total"] == 4_400_000

    def test_new_york_do_nothing_is_reported(self, capsys):
        code, raw, _ = run(capsys, "evaluate", "new-york", "--design", ",".join(["1"] * 21), "--json")
        rec = json.loads(raw)
        assert code == 0
        assert rec["objective"] == 0 and not rec["feasible"]
        assert rec["head_unit"] == "ft"

    def test_hydraulic_failure_is_not_a_crash(self, bridge_file, capsys):
        code, out, _ = run(capsys, "evaluate", bridge_file, "--design", "1")
        assert code == 0
        assert "hydraulic failure" in out and "feasible: no" in out

    @pytest.mark.parametrize("argv", [
        ["evaluate", "two-loop"],
        ["evaluate", "two-loop", "--design", STA, "--diameters", "1"],
        ["evaluate", "two-loop", "--design", "1,2"],
        ["evaluate", "two-loop", "--design", "15,1,1,1,1,1,1,1"],
        ["evaluate", "two-loop", "--diameters", "5,5,5,5,5,5,5,5"],
        ["evaluate", "nowhere.net", "--design", "1"],
        ["optimize", "two-loop", "--pc-linear", "1e5"],
    ])
    def test_input_errors_exit_1(self, argv, capsys):
        code, _, err = run(capsys, *argv)
        assert code == 1 and "error" in err

    def test_malformed_file_reports_line(self, tmp_path, capsys):
        path = tmp_path / "bad.net"
        path.write_text(BRIDGE.replace("p2 A B 300", "p2 A Q 300"))
        code, _, err = run(capsys, "evaluate", str(path), "--design", "1")
        assert code == 1 and "line 16" in err and "unknown node" in err


class TestParserErrors:
    @pytest.mark.parametrize("argv", [["frobnicate"], ["optimize"], ["verify", "balerma"],
                                      ["evaluate", "two-loop", "--omega", "10.0", "--design", STA]])
    def test_usage_errors_exit_1(self, argv, capsys):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 1

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--version"])
        assert info.value.code == 0
        assert __version__ in capsys.readouterr().out


class TestVerify:
    def test_two_loop_passes(self, capsys):
        code, out, _ = run(capsys, "verify", "two-loop")
        assert code == 0
        assert out.count("PASS") == 2 and "annotation only" in out

    @pytest.mark.parametrize("name", ["hanoi", "new-york"])
    def test_exit_code_reflects_asserted_references(self, name, capsys):
        asserted = {r.name for r in reference_designs(name) if r.asserted}
        expected = 0 if all(r.passed for r in verify_all(name) if r.reference in asserted) else 2
        code, out, _ = run(capsys, "verify", name)
        assert code == expected
        assert "STA fixed" in out


class TestSweep:
    def test_single_cell_matches_optimize(self, tmp_path, capsys):
        run(capsys, "optimize", "two-loop", *SMALL, "--out", str(tmp_path / "opt"))
        summary = json.loads((tmp_path / "opt" / "report.json").read_text())["summary"]
        code, out, _ = run(capsys, "sweep", "two-loop", "--se-grid", "4", "--pc-grid", "2e4",
                           *SMALL[2:], "--out", str(tmp_path / "sw"))
        assert code == 0
        (row,) = list(csv.DictReader((tmp_path / "sw" / "sweep.csv").open()))
        assert float(row["mean"]) == summary["mean"]
        assert float(row["std"]) == summary["std"]
        assert float(row["feasible_pct"]) == summary["feasible_pct"]

    def test_grid_shape(self, tmp_path, capsys):
        code, out, _ = run(capsys, "sweep", "two-loop", "--se-grid", "2,4", "--pc-grid", "1e4,1e4:1e5",
                           "--iters", "3", "--runs", "2", "--jobs", "1", "--quiet", "--out", str(tmp_path))
        rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
        assert [(r["se"], r["pc"]) for r in rows] == [("2", "10000"), ("2", "10000:100000"),
                                                        ("4", "10000"), ("4", "10000:100000")]
        assert all(0 <= float(r["feasible_pct"]) <= 100 for r in rows)

    def test_bad_pc(self, tmp_path, capsys):
        code, _, _ = run(capsys, "sweep", "two-loop", "--se-grid", "2", "--pc-grid", "abc",
                         "--iters", "1", "--runs", "1", "--out", str(tmp_path))
        assert code == 1


class TestMonteCarlo:
    def test_single_run(self, tmp_path, capsys):
        code, out, _ = run(capsys, "montecarlo", "--p1-grid", "0.1", "--p2-grid", "0.1,0.5",
                           "--iters", "20", "--runs", "1", "--out", str(tmp_path))
        assert code == 0
        rows = list(csv.DictReader((tmp_path / "montecarlo.csv").open()))
        assert len(rows) == 2 and all(float(r["std_gap"]) == 0.0 for r in rows)
        assert "+-" in out


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "wdnsta", "evaluate", "two-loop", "--design", STA],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "419000.00" in out.stdout
