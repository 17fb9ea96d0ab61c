import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_REPORT_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_REPORT_KEY] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: criterion(number, title, passed, detail)."""
    report = request.config.stash[_REPORT_KEY]

    def record(number, title, passed, detail=""):
        report[number] = (title, bool(passed), detail)
        line = f"CRITERION {number:>2} {'PASS' if passed else 'FAIL'}  {title}  {detail}"
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    report = config.stash.get(_REPORT_KEY, {})
    if not report:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(report):
        title, passed, detail = report[number]
        terminalreporter.write_line(
            f"CRITERION {number:>2} {'PASS' if passed else 'FAIL'}  {title}  {detail}"
        )
