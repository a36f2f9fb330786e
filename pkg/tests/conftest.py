import numpy as np
import pytest

from gmemi import _kernels_py

try:
    from gmemi import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

BACKENDS = [pytest.param(_kernels_py, id="python")]
if _kernels_c is not None:
    BACKENDS.append(pytest.param(_kernels_c, id="cython"))


@pytest.fixture(params=BACKENDS)
def kernels(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one PASS/FAIL line per acceptance criterion, shown after the run
ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance():
    def report(number, ok, detail=""):
        label = f"{number:02d}" if isinstance(number, int) else str(number)
        ACCEPTANCE_LINES[label] = f"criterion {label}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        print(ACCEPTANCE_LINES[label])
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
