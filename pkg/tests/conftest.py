import pytest

_VERDICTS = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record an acceptance verdict; every verdict is echoed in the terminal summary."""
    verdicts = request.config.stash.setdefault(_VERDICTS, {})

    def record(number, passed, detail):
        verdicts[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = config.stash.get(_VERDICTS, {})
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(verdicts):
        passed, detail = verdicts[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")
