import re

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    key = int(m.group(1))
    detail = "; ".join(str(v) for k, v in report.user_properties if k == "detail")
    prev = _ACCEPTANCE.get(key)
    if report.when == "call" or (report.failed and prev is None):
        _ACCEPTANCE[key] = (report.passed, detail or (prev[1] if prev else ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
