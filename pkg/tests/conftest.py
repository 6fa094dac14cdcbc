import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    props = dict(report.user_properties)
    name = report.nodeid.split("::")[-1]
    _ACCEPTANCE[name] = (report.outcome, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance summary")
    for i, (name, (outcome, detail)) in enumerate(_ACCEPTANCE.items(), 1):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{i:02d}] {status} {name[5:]}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
