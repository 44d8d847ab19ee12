from __future__ import annotations

import re

import pytest

from procmine import fixtures
from procmine.multilevel import EntitySchema, parse_multilevel_csv

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    match = re.search(r"test_criterion_(\d+)_(\w+)", report.nodeid)
    if not match:
        return
    number = int(match.group(1))
    if report.when == "call" or report.outcome != "passed":
        _CRITERIA[number] = (match.group(2), "PASS" if report.outcome == "passed" else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        name, verdict = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {verdict}  {name.replace('_', ' ')}")


@pytest.fixture
def p2p_schema() -> EntitySchema:
    spec = fixtures.P2P_SCHEMA
    return EntitySchema(tuple(spec["entities"]), spec["processid_columns"])


@pytest.fixture
def p2p_rows(p2p_schema):
    return parse_multilevel_csv(fixtures.p2p_mini_csv(), p2p_schema, {"activity": "Activity", "start_ts": "Timestamp"})
