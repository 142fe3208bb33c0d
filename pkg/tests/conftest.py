import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=30, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

import time

_START = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    dt = time.perf_counter() - _START
    ok = dt < 120
    terminalreporter.write_line(f"[criterion 8, suite wall time] {'PASS' if ok else 'FAIL'}  {dt:.1f}s (limit 120s)")
