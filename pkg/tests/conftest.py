"""Collects acceptance results and prints one line per criterion after the run."""

_RESULTS: dict[int, list] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    # a failing setup or call decides the outcome; teardown only adds failures
    if report.when == "call" or report.failed:
        entry = _RESULTS.setdefault(props["criterion"], [props.get("title", ""), True, ""])
        entry[1] = entry[1] and report.passed
        if props.get("detail"):
            entry[2] = props["detail"]
        if report.failed:
            entry[2] = (entry[2] + " | " if entry[2] else "") + report.head_line


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_RESULTS):
        title, ok, detail = _RESULTS[k]
        line = f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
