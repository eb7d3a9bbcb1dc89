import pytest
from hypothesis import settings

from yangw.scalars import ExactDomain

settings.register_profile("engine", deadline=None, max_examples=25)
settings.load_profile("engine")


@pytest.fixture
def dom():
    return ExactDomain()


ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
