import dataclasses

import pytest

from ssfcap.units import build_channel, reference_link


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run long Monte Carlo checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def phys():
    return reference_link()


@pytest.fixture
def linear_phys():
    return dataclasses.replace(reference_link(), nonlinearity_per_w_km=0.0)


@pytest.fixture
def small_channel(phys):
    return build_channel(phys, 8, 16)


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """``criterion(n, ok, detail)`` prints and records a PASS/FAIL line, then asserts."""
    def record(n, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        request.config.stash[ACCEPTANCE].append((n, line))
        print(line)
        assert ok, line
    return record
