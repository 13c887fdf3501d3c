import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kasner_lab import cli  # noqa: E402

_ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def run_fixture(name: str, tau_span: float | None = None):
    sc = cli.fixture_scenario(name)
    if tau_span is not None:
        sc["tau_span"] = tau_span
        if "samples" in sc:
            # keep the sample density in tau fixed
            sc["samples"] = int(round((sc["samples"] - 1) * tau_span / cli.FIXTURES[name]["tau_span"])) + 1
    return cli.execute(sc)


@pytest.fixture(scope="session")
def fixture_run():
    return run_fixture


@pytest.fixture(scope="session")
def acceptance():
    """``acceptance(criterion, ok, detail)`` records and prints a PASS/FAIL line."""

    def record(criterion: str, ok: bool, detail: str) -> bool:
        line = f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
