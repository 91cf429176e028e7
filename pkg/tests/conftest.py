import pytest

from mbases import QQ, Configuration, System

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def config_a():
    # v1 = v4 = (1, 0), v2 = (0, 1), v3 = (1, 1)
    return Configuration.build([(1, 0), (0, 1), (1, 1), (1, 0)], 2, QQ)


@pytest.fixture
def systems():
    return {
        "A": System.of([1, 2, 3, 4]),
        "B": System.of({1: 2, 2: 1, 4: 1}),
        "C": System.of({1: 1, 2: 2, 3: 1, 4: 1}),
        "D": System.of({1: 1, 2: 2, 3: 2, 4: 1}),
        "F": System.of({1: 2, 2: 2, 4: 1}),
    }


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
