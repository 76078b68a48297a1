import json
from pathlib import Path

import pytest

BASELINE_DIR = Path(__file__).parent / "baselines"
REGRESSION_FACTOR = 1.5

_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    _ACCEPTANCE_LINES.append(line)
    print(line)


def check_baseline(name: str, value: float) -> tuple[bool, float]:
    """Compare against a persisted baseline, creating it on first run."""
    path = BASELINE_DIR / f"{name}.json"
    if not path.exists():
        BASELINE_DIR.mkdir(exist_ok=True)
        path.write_text(json.dumps({"value": value}, indent=2) + "\n")
        return True, value
    base = json.loads(path.read_text())["value"]
    return value <= REGRESSION_FACTOR * base, base


@pytest.fixture
def acceptance():
    return record_acceptance


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def baseline():
    return check_baseline
