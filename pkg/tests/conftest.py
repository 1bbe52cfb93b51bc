import json
from pathlib import Path

import pytest

from irmlab import canonical, load_document

GOLDEN = Path(__file__).parent / "golden"
EXPECTED = json.loads((GOLDEN / "expected.json").read_text())
SMALL = sorted(n for n in EXPECTED if n.startswith("small"))
LARGE = sorted(n for n in EXPECTED if n.startswith("large"))


def golden(name):
    return load_document(GOLDEN / f"{name}.toml")


@pytest.fixture
def reg():
    return canonical("regression")


@pytest.fixture
def cls():
    return canonical("classification")


@pytest.fixture(params=SMALL)
def small_golden(request):
    return request.param, golden(request.param)


@pytest.fixture(params=SMALL + LARGE)
def any_golden(request):
    return request.param, golden(request.param)


# lines recorded by test_acceptance.py, echoed after the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
