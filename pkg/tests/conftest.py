import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from mhq import cache

settings.register_profile(
    "mhq", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "mhq"))


@pytest.fixture(autouse=True)
def _no_disk_cache(monkeypatch):
    # keep test runs off the user's cache directory
    monkeypatch.delenv("MHQ_CACHE_DIR", raising=False)
    cache.configure(None)
    yield
    cache.configure(None)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status = "PASS" if results[number] else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {number:2d}: {status}  {mod.TITLES[number]}")
