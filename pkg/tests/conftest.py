import sys
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from masure_kit import models

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def rationals(lo=-6, hi=6, max_den=4):
    return st.builds(Fraction, st.integers(lo * max_den, hi * max_den), st.integers(1, max_den))


def vectors(n, **kw):
    return st.tuples(*[rationals(**kw)] * n)


@pytest.fixture(scope="session")
def rank1():
    return models.rank1()


@pytest.fixture(scope="session")
def a2():
    return models.a2()


@pytest.fixture(scope="session")
def at1():
    return models.affine_a1()


@pytest.fixture(scope="session")
def at2():
    return models.affine_a2()


@pytest.fixture(scope="session")
def hyper():
    return models.hyperbolic()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])
