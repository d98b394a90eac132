"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from __future__ import annotations

from collections import defaultdict

import pytest

CRITERIA = {
    1: "certificate sizes within 5% of the published table",
    2: "payload-cap success boundary",
    3: "hash-cost monotonicity and synthetic latency ordering",
    4: "combiner property suite",
    5: "migration model check",
    6: "ledger integrity",
    7: "encoding stability",
}

_outcomes: dict[int, list[tuple[str, str, str]]] = defaultdict(list)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        details = [str(v) for k, v in item.user_properties if k == "detail"]
        _outcomes[marker.args[0]].append((item.name, report.outcome, "; ".join(details)))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, title in CRITERIA.items():
        results = _outcomes.get(number)
        if not results:
            terminalreporter.write_line(f"NOT RUN  {number}. {title}")
            continue
        verdict = "PASS" if all(outcome == "passed" for _, outcome, _ in results) else "FAIL"
        parts = [f"{name}={outcome}" + (f" [{detail}]" if detail else "") for name, outcome, detail in results]
        terminalreporter.write_line(f"{verdict:<7}  {number}. {title}: " + " | ".join(parts))
