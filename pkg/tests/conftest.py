import numpy as np
import pytest

from scaling_lab import accept

BUILTIN_SPECS = [
    "mh",
    "lazy:0.2",
    "barker",
    "genbarker:2",
    "genbarker:5",
    "bedard:1",
    "bedard:1.913",
    "mix:0.5*mh+0.5*barker",
]


@pytest.fixture(params=BUILTIN_SPECS)
def g(request):
    return accept.parse(request.param)


@pytest.fixture
def decade_grid():
    return 10.0 ** np.arange(-6, 7)


_CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record a named pass/fail verdict; printed in the terminal summary."""
    store = request.config.stash.setdefault(_CRITERIA, {})

    def record(number, ok, detail):
        store[number] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_CRITERIA, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        ok, detail = store[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
