import functools

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = {}


def record_acceptance(number, ok, detail):
    line = f"ACCEPTANCE {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


@functools.lru_cache(maxsize=None)
def sphere_tube(r, h=None, ell=1.0):
    from ghcollapse.surfaces import gen_sphere_tube
    return gen_sphere_tube(ell, r, h or r / 4)


@functools.lru_cache(maxsize=None)
def rp2_tube(r, h=None, ell=1.0):
    from ghcollapse.surfaces import gen_rp2_tube
    return gen_rp2_tube(ell, r, h or r / 4)


@pytest.fixture(scope="session")
def tube05():
    return sphere_tube(0.05)


@pytest.fixture(scope="session")
def tube02():
    return sphere_tube(0.02)


@pytest.fixture(scope="session")
def rp2_05():
    return rp2_tube(0.05)


@pytest.fixture(scope="session")
def rp2_02():
    return rp2_tube(0.02)
