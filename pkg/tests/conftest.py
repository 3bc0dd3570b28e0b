import pytest

from wdnsta.benchmarks import load_benchmark
from wdnsta.network import parse_network

from toys import BRIDGE, TREE, TRIANGLE, TWO_SOURCES

# Lines printed by the acceptance suite, echoed after the test session.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


@pytest.fixture(scope="session")
def two_loop():
    return load_benchmark("two-loop")[0]


@pytest.fixture(scope="session")
def hanoi():
    return load_benchmark("hanoi")[0]


@pytest.fixture(scope="session")
def new_york():
    return load_benchmark("new-york")[0]


@pytest.fixture
def triangle():
    return parse_network(TRIANGLE, "triangle")


@pytest.fixture
def bridge():
    return parse_network(BRIDGE, "bridge")


@pytest.fixture
def two_sources():
    return parse_network(TWO_SOURCES, "two-sources")


@pytest.fixture
def tree_net():
    return parse_network(TREE, "tree")
