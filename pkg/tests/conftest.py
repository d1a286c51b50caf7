def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.SUMMARIES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.SUMMARIES):
        terminalreporter.write_line(mod.SUMMARIES[k])
