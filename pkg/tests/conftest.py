"""Shared fixtures: benchmark sections and the acceptance-line recorder."""

import pytest

from roadqueues import FundamentalDiagram, SectionParams

# Two-section benchmark used throughout: a fast 100 km/h feeder draining
# into a 50 km/h section, both 0.1 km long at jam density 180 veh/km,
# so each holds at most 18 cars.


@pytest.fixture(scope="session")
def params1() -> SectionParams:
    return SectionParams(0.1, 100.0, 180.0)


@pytest.fixture(scope="session")
def params2() -> SectionParams:
    return SectionParams(0.1, 50.0, 180.0)


@pytest.fixture(scope="session")
def sec1(params1) -> FundamentalDiagram:
    return FundamentalDiagram(params1)


@pytest.fixture(scope="session")
def sec2(params2) -> FundamentalDiagram:
    return FundamentalDiagram(params2)


# Shrunken copy of the benchmark (same speeds and jam density, shorter
# sections) whose joint chain is small enough for exhaustive checks.


@pytest.fixture(scope="session")
def mini1() -> FundamentalDiagram:
    return FundamentalDiagram(SectionParams(4.0 / 180.0, 100.0, 180.0))


@pytest.fixture(scope="session")
def mini2() -> FundamentalDiagram:
    return FundamentalDiagram(SectionParams(4.0 / 180.0, 50.0, 180.0))


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance check.

    The lines are echoed again in the terminal summary so the full
    scorecard is visible in one place after a run.
    """

    def record(name: str, ok: bool, detail: str) -> None:
        line = f"[{name}] {'PASS' if ok else 'FAIL'} - {detail}"
        request.config._acceptance_lines.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance checks")
        for line in lines:
            terminalreporter.write_line(line)
