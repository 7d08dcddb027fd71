import re

from hypothesis import HealthCheck, settings

settings.register_profile(
    "ci",
    max_examples=50,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_([a-z0-9_]+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion, always visible."""
    seen: dict[int, tuple[str, str]] = {}
    for status, verdict in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            match = _CRITERION.search(getattr(report, "nodeid", ""))
            if not match:
                continue
            num, slug = int(match.group(1)), match.group(2)
            if seen.get(num, ("", "PASS"))[1] != "FAIL":
                seen[num] = (slug, verdict)
    if not seen:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(seen):
        slug, verdict = seen[num]
        terminalreporter.write_line(f"criterion {num}: {verdict} ({slug.replace('_', ' ')})")
