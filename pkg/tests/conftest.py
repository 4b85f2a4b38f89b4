import sys
from datetime import datetime, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from proxweb.registry import Mobility, RadioProtocol, WirelessNode

_acceptance_results = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance_results.append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance_results:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")

T0 = datetime(2026, 1, 1, 12, 0, 0, tzinfo=timezone.utc)


@pytest.fixture
def fixed_clock():
    return lambda: T0


def make_node(mac, protocol="BLE", owner="airline-x", venue="term-1", **kwargs):
    return WirelessNode(
        mac=mac,
        protocol=RadioProtocol(protocol),
        owner=owner,
        venue_id=venue,
        position=kwargs.get("position"),
        mobility=Mobility(kwargs.get("mobility", "FIXED")),
        wifi_channel=kwargs.get("wifi_channel"),
        metadata=tuple(kwargs.get("metadata", ())),
    )
