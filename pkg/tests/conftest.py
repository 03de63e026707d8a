"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

import pytest

TITLES = {
    1: "worked-example regressions",
    2: "pruning soundness oracle",
    3: "endpoint precision",
    4: "grammar-flow exactness on finite lattices",
    5: "pruning effectiveness",
    6: "order synthesis",
    7: "determinism",
    8: "end-to-end solve",
}

_outcomes: dict[int, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): test belongs to acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or rep.outcome != "passed":
        if hasattr(rep, "wasxfail"):
            status = "xfail"
        else:
            status = rep.outcome
        if rep.when == "call" or status != "passed":
            _outcomes.setdefault(mark.args[0], []).append((item.name, status))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(TITLES):
        runs = _outcomes.get(n)
        if not runs:
            continue
        bad = [f"{name} {status}" for name, status in runs if status != "passed"]
        verdict = "PASS" if not bad else "FAIL"
        extra = f" ({'; '.join(bad)})" if bad else ""
        terminalreporter.write_line(f"criterion {n} {verdict}: {TITLES[n]}{extra}")
