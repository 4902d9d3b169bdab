import numpy as np
import pytest
from hypothesis import settings

from heisenlab.grid import GridSpec

settings.register_profile("repo", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("repo")


@pytest.fixture
def small_grid():
    return GridSpec(1, 2.0, 4.0, 9, 11)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance():
    """Recorder for the acceptance suite: ``acceptance(num, name, ok, detail)``."""

    def record(num, name, ok, detail):
        line = f"ACCEPTANCE {num:>2} {name:<24} {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append((num, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
