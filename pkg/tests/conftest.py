import time

import pytest

from iglfr.simulation import SimulationScenario, run_scenario


@pytest.fixture(scope="session")
def desk_report():
    """The 1000-replication study at truth (0.5, 0.5, 1), n in {20, 50, 100}; run once per session."""
    t0 = time.perf_counter()
    report = run_scenario(SimulationScenario())
    report.extra_wall = time.perf_counter() - t0
    return report


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
