"""Acceptance criteria 1 to 10 at their stated tolerances.

Each test prints one ``[PASS]`` or ``[FAIL]`` line, and the lines are
repeated in the terminal summary.
"""

import json
import subprocess
import sys

import pytest

from hilfer_diffusion.validation import SUITES, Tolerances

from conftest import ACCEPTANCE_LINES


def report(number: int, line: str) -> None:
    ACCEPTANCE_LINES[number] = line
    print(line)


@pytest.mark.parametrize("number", range(1, 10))
def test_criterion(number):
    result = SUITES[number - 1](Tolerances())
    report(number, result.line())
    assert result.passed, result.line()


def _validate(*args):
    return subprocess.run(
        [sys.executable, "-m", "hilfer_diffusion.cli", "validate", *args],
        capture_output=True,
        text=True,
        check=False,
    )


def test_criterion_10_validate_command(tmp_path):
    full = _validate()
    doc = json.loads(full.stdout)
    degraded_cfg = tmp_path / "degraded.json"
    degraded_cfg.write_text(json.dumps({"tolerances": {"series": {"rel_tol": 1e-6}}}))
    degraded = _validate("--config", str(degraded_cfg), "--only", "7")
    clean = full.returncode == 0 and len(doc["checks"]) == 9
    ok = clean and degraded.returncode == 1
    failing = [c["number"] for c in doc["checks"] if not c["passed"]]
    line = (
        f"[{'PASS' if ok else 'FAIL'}] 10. validate command: full run exit {full.returncode}"
        f" (failing suites {failing or 'none'}), degraded run exit {degraded.returncode}"
    )
    report(10, line)
    assert ok, line
