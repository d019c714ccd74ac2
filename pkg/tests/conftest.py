"""Shared fixtures: the seeded baseline runs reused across test modules.

The heavy 10^6-step runs are session-scoped so the acceptance module and
the unit tests grow each of them exactly once.
"""

import pytest

from edgeworth import models, simulator

BASELINE_SEED = 12

_ACCEPTANCE_LINES = []


def record_acceptance(line: str):
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def bst_run_1e6():
    return simulator.grow(models.bst(), 10**6, BASELINE_SEED)


@pytest.fixture(scope="session")
def rrt_run_1e6():
    return simulator.grow(models.rrt(), 10**6, BASELINE_SEED)


@pytest.fixture(scope="session")
def port_run_1e6():
    return simulator.grow(models.port(), 10**6, BASELINE_SEED)


@pytest.fixture(scope="session")
def bst_run_1e5():
    return simulator.grow(models.bst(), 10**5, BASELINE_SEED)


@pytest.fixture(scope="session")
def bst_ensemble_1e3():
    """200 replicates at n = 1000 with a single final snapshot."""
    return simulator.grow_ensemble(
        models.bst(), 1000, BASELINE_SEED, replicates=200, schedule=[1000]
    )


@pytest.fixture(scope="session")
def bst_occupation_ensemble():
    """50 replicates to n = 10^6, snapshots at 10^4 and 10^6."""
    return simulator.grow_ensemble(
        models.bst(), 10**6, BASELINE_SEED, replicates=50, schedule=[10**4, 10**6]
    )
