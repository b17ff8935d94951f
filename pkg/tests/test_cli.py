import json
import subprocess
import sys

import pytest

from kstab.cli import run


def test_walls():
    assert run(["walls", "--scenario", "m4"]) == (0, "1/9 7/8\n", "")
    assert run(["walls", "--scenario", "m5", "--domain"])[1] == "1/8 4/5\n"


def test_soliton_candidate_prints_17_digits():
    code, out, _ = run(["soliton", "--scenario", "m5", "--candidate"])
    assert code == 0
    assert out == "0.16939451222624708\n"


def test_delta_map_and_chain():
    assert run(["delta-map", "--scenario", "m4", "--at=-1,-1"])[1] == "25/27\n"
    code, out, _ = run(["delta-map", "--scenario", "m4", "--minimize"])
    assert "25/27" in out and "(-1,-1)" in out
    assert run(["chain", "--scenario", "m4"])[1] == "25/9\n"
    assert run(["s", "--scenario", "m5", "--step", "C~"])[1] == "221/2430\n"
    assert run(["aut-dim", "--scenario", "m5"])[1] == "15\n"


def test_okounkov_table():
    code, out, _ = run(["okounkov", "--scenario", "m4", "--weight", "zeta"])
    assert code == 0
    assert "5/24" in out and "48/5" in out


def test_records_are_json_lines_with_exact_rationals():
    code, out, _ = run(["chain", "--scenario", "m5", "--chain", "pair", "--format", "records"])
    assert code == 0
    records = [json.loads(line) for line in out.splitlines()]
    assert records[-1] == {"key": "bound", "value": "1"}
    assert records[2]["value"] == "405/308"


@pytest.mark.parametrize(
    "argv",
    [["walls", "--scenario", "m4"], ["soliton", "--scenario", "m4"], ["cone-bound", "--scenario", "m5", "--format", "records"]],
)
def test_output_is_deterministic(argv):
    assert run(argv) == run(argv)


@pytest.mark.parametrize(
    "argv",
    [
        ["walls"],
        ["walls", "--scenario", "m4", "--bogus"],
        ["frobnicate"],
        ["walls", "--scenario", "nowhere"],
        ["s", "--scenario", "m4", "--step", "nope"],
        ["verify", "--only", "99"],
    ],
)
def test_errors_exit_1_with_a_message(argv):
    code, out, err = run(argv)
    assert code == 1 and out == "" and err


def test_verify_only_runs_one_row():
    code, out, _ = run(["verify", "--only", "7.m4_walls", "--format", "records"])
    assert code == 0
    (row,) = [json.loads(line) for line in out.splitlines()]
    assert row["id"] == "7.m4_walls" and row["status"] == "pass"
    assert row["expected"].startswith("[PAPER]")


def test_verify_failure_exits_2():
    # the candidate is only reproducible to about 1e-7 of the stated value
    code, out, _ = run(["verify", "--only", "11.xi0"])
    assert code == 2 and "FAIL" in out
    assert run(["verify", "--only", "11.xi0", "--tol", "1e-6"])[0] == 0


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kstab.cli", "walls", "--scenario", "m4"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "1/9 7/8\n"
