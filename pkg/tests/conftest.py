from acceptance_log import RESULTS


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        title, verdict, secs, note = RESULTS[n]
        line = f"{verdict} criterion {n:>2}: {title} ({secs:.1f}s)"
        if verdict == "FAIL" and note:
            line += f"  [{note}]"
        terminalreporter.write_line(line)
