import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
    config._acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    rep = (yield).get_result()
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    results = item.config._acceptance
    n = m.args[0]
    # any failing phase (setup/call/teardown) fails the criterion
    if rep.failed:
        results[n] = "FAIL"
    elif rep.when == "call" and results.get(n) != "FAIL":
        results[n] = "SKIP" if rep.skipped else "PASS"


def pytest_terminal_summary(terminalreporter, config):
    results = config._acceptance
    if not results:
        return
    from test_acceptance import CRITERIA, REPORT

    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, desc in CRITERIA.items():
        status = results.get(n, "NOT RUN")
        detail = f" [{REPORT[n]}]" if n in REPORT else ""
        tr.write_line(f"criterion {n:2d}: {status:7s} {desc}{detail}")
