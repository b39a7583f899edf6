import time

import pytest

_RESULTS: dict[int, tuple[bool, str]] = {}
_START = time.perf_counter()
FULL_SUITE_BUDGET_S = 120.0


@pytest.fixture(scope="session")
def acceptance_log():
    """Criterion number -> (passed, detail), reported in the terminal summary."""
    return _RESULTS


def pytest_terminal_summary(terminalreporter):
    elapsed = time.perf_counter() - _START
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_RESULTS):
            ok, detail = _RESULTS[n]
            terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    terminalreporter.write_line(f"session wall clock: {elapsed:.1f} s (budget {FULL_SUITE_BUDGET_S:.0f} s)")
