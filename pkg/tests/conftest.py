import helpers


def pytest_terminal_summary(terminalreporter):
    if not helpers.ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in helpers.ACCEPTANCE:
        terminalreporter.write_line(line)
