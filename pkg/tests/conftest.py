import numpy as np
import pytest

from twoway_relay.channel import ChannelSet, draw_channels, make_pairing
from twoway_relay.reduction import reduce


def random_instance(seed, K=4, M=8, powers=None, rho=0.0):
    rng = np.random.default_rng(seed)
    if powers is None:
        powers = 1.0 + 9.0 * rng.random(K)
    channels = draw_channels(K, M, rho, rng, powers)
    return channels, reduce(channels)


def canonical_pair():
    """K=2, M=2 with H = I so that the effective channels are unit vectors."""
    channels = ChannelSet(np.eye(2, dtype=complex), make_pairing(2), np.ones(2))
    return channels, reduce(channels)


@pytest.fixture
def instance():
    return random_instance(1234)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line(capsys):
    """Print one PASS/FAIL line immediately and repeat it in the final summary."""

    def emit(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
