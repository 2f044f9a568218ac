def pytest_terminal_summary(terminalreporter):
    try:
        from tests import test_acceptance
    except ImportError:
        return
    lines = getattr(test_acceptance, "RESULTS", [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for index, label, ok, detail in lines:
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"acceptance {index} ({label}): {verdict} - {detail}")
