"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run directly (``python3 tests/test_acceptance.py``) for just the table.
"""

import subprocess
import sys

import pytest

from dentlab.search import SearchBudget
from dentlab.suite import CASES

BUDGET = SearchBudget(seed=7)

CRITERIA = [
    ("1 dp-oracle", "dp-oracle"),
    ("2 eq41", "eq41"),
    ("3 slice-floor", "slice-floor"),
    ("4 claim1", "claim1"),
    ("5 mlur-trend", "mlur-trend"),
    ("6 c-example", "c-example"),
    ("7 pk-witness", "pk-witness"),
    ("8 ukap", "ukap"),
    ("9 cond29", "cond29"),
    ("10 fn-negative", "fn-negative"),
    ("11 combine", "combine"),
]


def _say(capsys, line):
    with capsys.disabled():
        print(f"\n[acceptance] {line}")


@pytest.mark.parametrize("label, case", CRITERIA, ids=[c for _, c in CRITERIA])
def test_criterion(capsys, label, case):
    r = CASES[case](BUDGET)
    _say(capsys, f"{label:<16} {'PASS' if r.passed else 'FAIL'}  {r.summary}")
    assert r.passed, r.summary


def _verify_all(tmp_path, tag):
    out = tmp_path / f"report{tag}.json"
    proc = subprocess.run(
        [sys.executable, "-m", "dentlab", "verify", "all", "--seed", "7", "--out", str(out)],
        capture_output=True,
    )
    return proc.stdout + out.read_bytes()


def test_determinism(capsys, tmp_path):
    a = _verify_all(tmp_path, "a")
    b = _verify_all(tmp_path, "b")
    same = a == b
    _say(capsys, f"{'12 determinism':<16} {'PASS' if same else 'FAIL'}  verify all --seed 7 twice: "
                 f"{'byte-identical' if same else 'outputs differ'} ({len(a)} bytes)")
    assert same


if __name__ == "__main__":
    for label, case in CRITERIA:
        r = CASES[case](BUDGET)
        print(f"{label:<16} {'PASS' if r.passed else 'FAIL'}  {r.summary}", flush=True)
