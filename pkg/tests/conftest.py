import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion covered by the test")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    label = marker.args[0]
    passed = call.excinfo is None
    _CRITERIA[label] = _CRITERIA.get(label, True) and passed


@pytest.hookimpl(trylast=True)
def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=_sort_key):
        status = "PASS" if _CRITERIA[label] else "FAIL"
        terminalreporter.write_line(f"{status}  {label}")
    n_pass = sum(_CRITERIA.values())
    terminalreporter.write_line(f"{n_pass}/{len(_CRITERIA)} criteria pass")


def _sort_key(label):
    head = label.split(" ", 1)[0]
    num = "".join(c for c in head if c.isdigit())
    return (int(num) if num else 0, head)
