import pytest
from hypothesis import HealthCheck, settings

from .helpers import INTRO_ENTITIES, write_kb
from .mockserver import MockServer

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\nacceptance {name}: {'PASS' if report.passed else 'FAIL'}")


@pytest.fixture(scope="session")
def intro_kb_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("kb") / "intro.jsonl"
    return write_kb(path, INTRO_ENTITIES)


@pytest.fixture
def mock_server():
    server = MockServer().start()
    yield server
    server.stop()
