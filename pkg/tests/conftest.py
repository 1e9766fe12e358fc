import warnings
from datetime import date

import pytest

from multicurve.curve import Curve
from multicurve.synthetic import synthetic_snapshot

REF = date(2010, 8, 31)


@pytest.fixture
def ref():
    return REF


@pytest.fixture
def flat_curve():
    return Curve.flat(REF, 0.03, horizon_years=61, step_months=6, name="flat")


@pytest.fixture(scope="session")
def snapshot():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return synthetic_snapshot(seed=11)


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion and assert it."""
    lines = request.config._acceptance_lines

    def record(number, title, ok, detail):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        print(line)
        lines.append((number, line))
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
