import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from driftbif.kernel import KernelSpectrum, cosine_kernel  # noqa: E402


@pytest.fixture
def two_cos():
    return cosine_kernel()


@pytest.fixture
def two_mode():
    return KernelSpectrum.from_coefficients({1: 1.0, 2: 0.5})


@pytest.fixture
def rng():
    return __import__("numpy").random.default_rng(20261016)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
