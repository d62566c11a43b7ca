import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_acceptance_key = pytest.StashKey[dict]()


@pytest.fixture
def record(request):
    """Log one acceptance line, then fail the test if the criterion or its time budget missed."""
    lines = request.config.stash.setdefault(_acceptance_key, {})

    def _record(criterion: int, ok: bool, detail: str, elapsed: float, budget: float):
        in_time = elapsed < budget
        verdict = "PASS" if ok and in_time else "FAIL"
        timing = f"{elapsed:.1f}s of {budget:.0f}s"
        if not in_time:
            timing += " (over budget)"
        lines[criterion] = f"[{verdict}] criterion {criterion:2d}: {detail} [{timing}]"
        assert ok, detail
        assert in_time, f"took {elapsed:.1f}s, budget {budget}s"

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_acceptance_key, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
