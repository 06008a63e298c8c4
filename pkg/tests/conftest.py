import numpy as np
import pytest

from bivdro.sampling import random_instances

ACCEPTANCE_SEED = 20240601
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def instances_10k():
    """The shared 10^4 seeded (spec, q) draws."""
    return random_instances(np.random.default_rng(ACCEPTANCE_SEED), 10_000)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
