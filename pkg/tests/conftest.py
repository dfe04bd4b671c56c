import logging
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))
# the augmenting-path oracle recurses once per matched vertex
sys.setrecursionlimit(10_000)

ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture(autouse=True)
def _quiet_embedder_warnings(caplog):
    caplog.set_level(logging.ERROR, logger="blowup")


@pytest.fixture
def record_criterion():
    def record(name: str, ok: bool, detail: str) -> None:
        ACCEPTANCE.append((name, ok, detail))
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
