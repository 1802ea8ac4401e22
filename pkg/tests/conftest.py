import numpy as np
import pytest

from careless import _pykernels

try:
    from careless import _kernels as _cykernels
except ImportError:  # extension not built
    _cykernels = None

BACKENDS = [_pykernels] + ([_cykernels] if _cykernels is not None else [])

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(params=BACKENDS, ids=lambda m: m.NAME)
def kernels(request):
    return request.param


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'} criterion {number:2d}: {detail}")
    return record


def tv_distance(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
