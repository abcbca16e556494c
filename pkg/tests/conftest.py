CRITERIA = {
    1: "similarity matches exhaustive oracle",
    2: "known similarity values",
    3: "planted group recovery",
    4: "boundary semantics",
    5: "filter monotonicity",
    6: "evidence recomputability",
    7: "determinism across threads and runs",
    8: "min-edge-weight 2 variant",
    9: "100k-tweet performance",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion exercised by this test")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if call.when == "call" or call.excinfo is not None:
        _outcomes.setdefault(marker.args[0], []).append(call.excinfo is None)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, name in CRITERIA.items():
        results = _outcomes.get(n)
        status = "NOT RUN" if results is None else ("PASS" if all(results) else "FAIL")
        terminalreporter.write_line(f"criterion {n}: {status:7s} {name}")
