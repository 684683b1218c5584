import numpy as np
import pytest

from liouville_disk import UNIT_DISK, assemble_kernel, build_grid

_ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)


@pytest.fixture
def record():
    """Record one acceptance line: ``record(n, ok, detail)``."""

    def _rec(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return _rec


@pytest.fixture(scope="session")
def grid96():
    return build_grid(UNIT_DISK, 96, 192)


@pytest.fixture(scope="session")
def kernel96(grid96):
    return assemble_kernel(grid96)


@pytest.fixture(scope="session")
def radial_kernel():
    """Coarse angular resolution suffices for radial data; dense LU path."""
    return assemble_kernel(build_grid(UNIT_DISK, 24, 16))


@pytest.fixture(scope="session")
def grid32():
    return build_grid(UNIT_DISK, 32, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
