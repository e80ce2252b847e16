from fractions import Fraction

import pytest

from lieze.expr import to_poly
from lieze.parser import Scope, parse_expression
from lieze.report import load
from lieze.selftest import data_path

FREE = Scope(symbols=None, functions={"u": None, "F": None, "H": None})


def P(text):
    """Parse in free mode and normalize."""
    return to_poly(parse_expression(text, FREE))


@pytest.fixture(scope="session")
def zoomeron():
    return load(data_path("zoomeron.lie"))


@pytest.fixture(scope="session")
def reduced_algebra():
    return load(data_path("reduced_algebra.lie"))


@pytest.fixture(scope="session")
def delta(zoomeron):
    return to_poly(zoomeron.spec.equation)


F = Fraction


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        name, ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n} ({name}): {'PASS' if ok else 'FAIL'} - {detail}")
