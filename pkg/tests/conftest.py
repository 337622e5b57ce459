"""Session hooks: collect acceptance results and print one line per criterion."""

from __future__ import annotations

import pytest

from boxwire import lp
from boxwire.fixtures import load_box

ACCEPTANCE = {}
PROPERTY_OUTCOMES = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion6: property suite counted toward acceptance 6")


def pytest_runtest_logreport(report):
    if report.when == "call" and "criterion6" in report.keywords:
        PROPERTY_OUTCOMES.append((report.nodeid, report.passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    if PROPERTY_OUTCOMES and 6 not in ACCEPTANCE:
        ok = all(p for _, p in PROPERTY_OUTCOMES)
        ACCEPTANCE[6] = (ok, f"{sum(p for _, p in PROPERTY_OUTCOMES)}/{len(PROPERTY_OUTCOMES)} "
                             "property suites passed")
    if 7 in ACCEPTANCE:
        ok, detail = ACCEPTANCE[7]
        all_ok = ok and lp.STATS["verified"] == lp.STATS["solves"]
        ACCEPTANCE[7] = (all_ok, f"{detail}; session certificates "
                                 f"{lp.STATS['verified']}/{lp.STATS['solves']}")
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def fixture_boxes():
    return {n: load_box(n) for n in ("ts2", "pb", "rtts1", "rtts2", "rnns1", "rnns2")}



@pytest.fixture(scope="session")
def acceptance():
    return ACCEPTANCE
