import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")
    config.addinivalue_line("markers", "slow: takes more than a few seconds")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    num, title = marker.args
    entry = _CRITERIA.setdefault(num, {"title": title, "ok": True, "ran": False, "why": ""})
    if report.when == "call" or report.failed:
        entry["ran"] = True
    if report.failed:
        entry["ok"] = False
        if not entry["why"]:
            msg = str(getattr(report.longrepr, "reprcrash", None) and report.longrepr.reprcrash.message)
            entry["why"] = msg.splitlines()[0] if msg else ""


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        entry = _CRITERIA[num]
        status = "PASS" if entry["ok"] and entry["ran"] else ("SKIP" if entry["ok"] else "FAIL")
        line = f"criterion {num:>2}: {status}  {entry['title']}"
        if status == "FAIL" and entry["why"]:
            line += f"  ({entry['why'][:120]})"
        terminalreporter.write_line(line)
