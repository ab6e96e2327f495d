import re

import numpy as np
import pytest

from acbm.structure import canonical_structure, random_structure

_CRITERIA: dict[int, list[tuple[str, str]]] = {}


@pytest.fixture(params=[1, 2, 3])
def n(request):
    return request.param


@pytest.fixture
def canon2():
    return canonical_structure(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=[0, 1, 2])
def random_s(request, n):
    return random_structure(n, request.param)


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA.setdefault(int(m.group(1)), []).append((m.group(2), report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        results = _CRITERIA[k]
        ok = all(outcome == "passed" for _, outcome in results)
        names = ", ".join(name for name, _ in results)
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} ({names})")
