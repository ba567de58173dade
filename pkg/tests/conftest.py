"""Collects acceptance-criterion outcomes and prints one line per criterion."""

_results: dict[int, dict] = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if call.when != "call" and call.excinfo is None:
        return
    number, title = marker.args
    entry = _results.setdefault(number, {"title": title, "passed": True, "failed": []})
    if call.excinfo is not None:
        entry["passed"] = False
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        entry = _results[number]
        status = "PASS" if entry["passed"] else "FAIL"
        line = f"[{status}] criterion {number}: {entry['title']}"
        if entry["failed"]:
            line += f"  (failed: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)
