import pytest

from qoesim.channel import UeChannelState
from qoesim.qoe import VideoProfile, Resolution


def channel(cqi=15, bits=933):
    return UeChannelState(0.1, 20.0, cqi, bits)


def toy_profile(app, send, mos, drop, fps=5):
    """Hand-built profile; the video rate is derived from the send rate."""
    return VideoProfile(app, Resolution(160, 120), fps, send * 0.6, send, mos, drop)


@pytest.fixture
def toy():
    return toy_profile


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)
