import pytest

_criteria = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    if call.when == "setup" and call.excinfo is not None:
        skipped = call.excinfo.errisinstance(pytest.skip.Exception)
        _criteria[name] = "SKIP" if skipped else "FAIL"
    elif call.when == "call":
        prev = _criteria.get(name, "PASS")
        ok = call.excinfo is None
        if call.excinfo is not None and call.excinfo.errisinstance(pytest.skip.Exception):
            _criteria[name] = "SKIP"
        else:
            _criteria[name] = "PASS" if ok and prev != "FAIL" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda n: int(n.split()[0][2:])):
        terminalreporter.write_line(f"{_criteria[name]:4s}  {name}")
