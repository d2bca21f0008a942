import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from hypothesis import settings

settings.register_profile("ci", deadline=None, max_examples=100)
settings.load_profile("ci")


# one PASS/FAIL line per acceptance criterion, printed at the end of the run
_criteria = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or report.outcome != "passed":
        prev = _criteria.get(name)
        if prev is None or prev == "PASS":
            _criteria[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda n: int(n.split("_")[2])):
        num = name.split("_")[2]
        label = " ".join(name.split("_")[3:])
        terminalreporter.write_line(f"{_criteria[name]}  criterion {num}: {label}")
