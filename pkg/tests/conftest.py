import os

import pytest
from hypothesis import HealthCheck, settings

from dgtower.exactlin import Field

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "fixtures")

settings.register_profile("repo", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("repo")

# acceptance criterion number -> (title, passed, detail)
CRITERIA: dict = {}


@pytest.fixture
def criterion():
    """Record the outcome of an acceptance criterion for the terminal summary."""

    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        CRITERIA[number] = (title, bool(passed), detail)

    return record


@pytest.fixture(params=["GF(2)", "GF(5)", "Q"])
def field(request):
    return Field.from_descriptor(request.param)


@pytest.fixture
def F2():
    return Field.prime(2)


@pytest.fixture
def Q():
    return Field.rationals()


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        title, passed, detail = CRITERIA[number]
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)

