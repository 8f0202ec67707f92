"""Collects acceptance outcomes and prints them in the terminal summary."""

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"ACCEPTANCE {key}: {'PASS' if ok else 'FAIL'} | {detail}")
