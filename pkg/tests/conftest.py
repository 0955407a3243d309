import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from failbench.synth import PrecursorConfig
from helpers import synth_dataset

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def small_synth():
    """Four short sessions with frequent faults; cheap enough for protocol tests."""
    return synth_dataset(n_sessions=4, session_length_s=(3 * 3600, 4 * 3600), fault_rate=1.0,
                         min_history_s=1800, noise_sigma=0.1, seed=7,
                         precursor=PrecursorConfig(lead_time_s=600, diversity=0.3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.VERDICTS:
            terminalreporter.write_line(line)
