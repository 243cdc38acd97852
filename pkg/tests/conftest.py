import numpy as np
import pytest

ACCEPTANCE_RESULTS = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def record_criterion():
    def record(number, title, passed, detail=""):
        ACCEPTANCE_RESULTS.append((number, title, bool(passed), detail))
        line = f"[criterion {number:2d}] {'PASS' if passed else 'FAIL'}  {title}"
        print(line + (f"  ({detail})" if detail else ""))
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        line = f"[criterion {number:2d}] {'PASS' if passed else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
