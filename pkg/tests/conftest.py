"""Shared pytest hooks: per-criterion pass/fail summary for the acceptance suite."""

from collections import defaultdict

import pytest

CRITERIA = {
    1: "table1: R within 0.002 of reference values and simulated verdicts agree (<2 min)",
    2: "table2: required connectivity within 1% of reference values (<10 s)",
    3: "table3: simulated periods within 5% of reference values (<5 min)",
    4: "table3: estimated periods exact in closed form and within 5% of reference row",
    5: "surrogate pole sets marginally stable on 50 random oscillatory draws",
    6: "collective frequency independent of coupling; simulated periods agree",
    7: "mode instability map agrees with companion-matrix root signs on 50 draws",
    8: "describing-function gains reach their small-amplitude limits",
    9: "strong coupling synchronizes 20 random runs; decoupled runs stay apart",
}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
    config._criterion_results = defaultdict(list)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            item.config._criterion_results[marker.args[0]].append(rep.passed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_criterion_results", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        verdict = "PASS" if all(results[n]) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}  ({CRITERIA[n]})")
