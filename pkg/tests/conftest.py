def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call":
                continue
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            rows[name] = "PASS" if outcome == "passed" else "FAIL"
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(rows, key=lambda s: int(s.split("_")[2])):
        label = " ".join(name.split("_")[3:])
        num = name.split("_")[2]
        terminalreporter.write_line(f"criterion {num} [{label}]: {rows[name]}")
