import warnings

import pytest
from hypothesis import HealthCheck, settings

from corrcipher import build_source, dsbs

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _quiet_slack_warnings():
    # codebooks sized exactly at the corner rates warn about missing slack
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*without the eps0 slack.*")
        yield


@pytest.fixture
def dsbs25():
    return dsbs(0.25)


@pytest.fixture
def independent():
    return build_source([[0.25, 0.25], [0.25, 0.25]])


@pytest.fixture
def correlated():
    return build_source([[0.5, 0.0], [0.0, 0.5]])


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
