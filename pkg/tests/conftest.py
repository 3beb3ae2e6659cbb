import pytest

from mzsim.engine import SimParams
from mzsim.network import build_mzi
from mzsim.optics import SwitchingSchedule


@pytest.fixture(scope="session")
def mzi():
    return build_mzi(15.0)


@pytest.fixture(scope="session")
def fig7_schedule():
    return SwitchingSchedule.from_tuples([("aom2", "off", 0.0)], ramp_duration=10e-9)


@pytest.fixture(scope="session")
def fig7_params():
    return SimParams(-20e-9, 100e-9, 0.5e-9)


# acceptance lines, filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
