from collections import OrderedDict

import pytest

_CRITERIA = OrderedDict()


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            entry = _CRITERIA.setdefault(number, {"title": title, "outcomes": {}})
            entry["outcomes"][item.nodeid] = None


def pytest_runtest_logreport(report):
    for entry in _CRITERIA.values():
        if report.nodeid in entry["outcomes"]:
            previous = entry["outcomes"][report.nodeid]
            if report.failed:
                entry["outcomes"][report.nodeid] = "failed"
            elif report.when == "call" and previous is None:
                entry["outcomes"][report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        outcomes = list(entry["outcomes"].values())
        if any(o is None for o in outcomes):
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        failed = sum(o == "failed" for o in outcomes)
        detail = f" ({failed}/{len(outcomes)} checks failed)" if failed else ""
        terminalreporter.write_line(f"criterion {number:>2}: {status:<7} {entry['title']}{detail}")


@pytest.fixture
def timed():
    """Context manager asserting a wall-clock budget in seconds."""
    import time
    from contextlib import contextmanager

    @contextmanager
    def budget(seconds):
        start = time.perf_counter()
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < seconds, f"took {elapsed:.1f} s, budget {seconds} s"

    return budget
