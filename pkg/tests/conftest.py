import pytest

# (number, title, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE_RESULTS = []


@pytest.fixture
def record_criterion():
    def record(number, title, passed, detail=""):
        ACCEPTANCE_RESULTS.append((number, title, passed, detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] AC{number:<2} {title}  {detail}".rstrip())
