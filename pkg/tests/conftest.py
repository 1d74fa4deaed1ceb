import sys


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance criterion verdicts after the run summary."""
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "CRITERION_LINES", None) if module else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
