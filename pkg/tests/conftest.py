import helpers


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if helpers.ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in helpers.ACCEPTANCE_REPORT:
            terminalreporter.line(line)
