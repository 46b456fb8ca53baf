import numpy as np
import pytest

from dengue_seir.kernels import backends

ACCEPTANCE_LINES = {}


def record_acceptance(number: int, title: str, passed: bool, detail: str) -> str:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {title} :: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(params=sorted(backends()))
def backend(request):
    """Each importable kernel module in turn."""
    return backends()[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
