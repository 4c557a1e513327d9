import numpy as np
import pytest

from bryantflux.specfile import build_surface, get_example

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, text = marker.args
    entry = _CRITERIA.setdefault(number, {"text": text, "passed": True, "ran": False})
    if report.when == "call":
        entry["ran"] = True
    if report.failed:
        entry["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["passed"] and entry["ran"] else "FAIL"
        terminalreporter.write_line(f"{status} criterion {number}: {entry['text']}")


def example(name, **params):
    spec = get_example(name)
    if params:
        spec = spec.with_parameters(params)
    return build_surface(spec)


@pytest.fixture
def catenoid():
    return example("catenoid-cousin")


@pytest.fixture
def perturbed():
    return example("perturbed-catenoid-cousin")


@pytest.fixture
def kumamoto():
    return example("kumamoto-three-end")


@pytest.fixture
def builtins():
    return [example("catenoid-cousin"), example("perturbed-catenoid-cousin"),
            example("kumamoto-three-end")]


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
