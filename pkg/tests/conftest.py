import pytest

from lifeworld import corpus
from lifeworld.kitchen import KitchenWorld, run_toast, scenario_path


@pytest.fixture(scope="session")
def breakfast():
    return KitchenWorld.from_file(scenario_path("breakfast.lw"))


@pytest.fixture(scope="session")
def golden(breakfast):
    return run_toast(breakfast)


@pytest.fixture
def one_egg():
    return corpus.egg_world(1)


# one line per acceptance criterion, printed after the run whatever the outcome
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
