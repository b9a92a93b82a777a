import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from shelf_lab import _pykernels  # noqa: E402

try:
    from shelf_lab import _ckernels
except ImportError:  # extension not built
    _ckernels = None

EXAMPLE_WORD = (2, 1, 3, 2, 2, 4, 4, 1, 2, 1, 3, 3)
EXAMPLE_PERM = (2, 8, 10, 9, 5, 4, 1, 3, 11, 12, 7, 6)
# chunk-0 stream of this seed yields EXAMPLE_WORD for (n, m) = (12, 2)
EXAMPLE_SEED = 39755009

KERNEL_MODULES = [pytest.param(_pykernels, id="python")]
if _ckernels is not None:
    KERNEL_MODULES.append(pytest.param(_ckernels, id="cython"))


@pytest.fixture(params=KERNEL_MODULES)
def kern(request):
    return request.param


@pytest.fixture
def compiled():
    if _ckernels is None:
        pytest.skip("compiled kernels not built")
    return _ckernels


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
