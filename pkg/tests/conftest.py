"""Shared pytest hooks: collect acceptance-criterion verdicts and print one
pass/fail line per criterion in the terminal summary of every run."""

_criterion_lines = []


def record_criterion(number, passed, description):
    """Register one acceptance criterion outcome for the summary block."""
    status = "PASS" if passed else "FAIL"
    line = f"[ACCEPTANCE {number}] {status} - {description}"
    _criterion_lines.append((number, line))
    return line


def pytest_terminal_summary(terminalreporter):
    if not _criterion_lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_criterion_lines):
        terminalreporter.write_line(line)
