import random

import pytest
from hypothesis import HealthCheck, settings

from spinorlab.exactfield import QQ, Fp
from spinorlab.quadform import QuadSpace

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture(scope="session")
def q4_f3():
    return QuadSpace(Fp(3), [1, 1, 1, 2])


@pytest.fixture(scope="session")
def q6_f3():
    return QuadSpace(Fp(3), [1] * 6)


@pytest.fixture(scope="session")
def q4_f5():
    return QuadSpace(Fp(5), [1, 1, 1, 2])


@pytest.fixture(scope="session")
def q6_f5():
    return QuadSpace(Fp(5), [1, 1, 1, 1, 1, 2])


@pytest.fixture(scope="session")
def q6_q():
    return QuadSpace(QQ, [1] * 6)


@pytest.fixture(scope="session")
def q4_q():
    return QuadSpace(QQ, [1, 1, 1, 2])


# -- one pass/fail line per acceptance criterion ----------------------------------

_criteria_key = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")
    config.stash[_criteria_key] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    number, title = mark.args
    results = item.config.stash[_criteria_key]
    if rep.failed or rep.when == "call":
        ok = results.get(number, (title, True))[1] and rep.passed
        results[number] = (title, ok)


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_criteria_key, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, ok = results[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
