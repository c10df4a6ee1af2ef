import numpy as np
import pytest

from sitstand.ekf import default_r
from sitstand.model_sim import G, TrajectoryProfile, simulate_trial

ACCEL_SD = float(np.sqrt(default_r(G)[0, 0]))
GYRO_SD = float(np.sqrt(default_r(G)[2, 2]))


def fd_first(y, dt):
    """Fourth-order central difference on the interior (two samples trimmed each side)."""
    y = np.asarray(y, dtype=float)
    return (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * dt)


@pytest.fixture(scope="session")
def clean_trial():
    return simulate_trial(TrajectoryProfile.cycles(3), seed=0)


@pytest.fixture(scope="session")
def noisy_trial():
    profile = TrajectoryProfile.cycles(3, noise_accel_sd=ACCEL_SD, noise_gyro_sd=GYRO_SD)
    return simulate_trial(profile, seed=3)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
