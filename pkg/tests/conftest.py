"""Shared pytest plumbing.

The acceptance tests register one summary line per criterion; echoing
them from a terminal-summary hook keeps them visible in the report even
though output capture is on by default.
"""

CRITERION_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)
