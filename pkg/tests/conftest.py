import numpy as np
import pytest

from supermult.channels import KrausChannel, random_unitary_channel
from supermult.linalg import haar_unitary
from supermult.rng import SeededRng

ACCEPTANCE_LINES = []


def random_kraus_channel(d, k, seed, d_out=None):
    """Generic CPTP map: isometry columns from a Haar unitary, cut into Kraus blocks."""
    d_out = d if d_out is None else d_out
    u = haar_unitary(k * d_out, SeededRng(seed, 99))
    iso = u[:, :d]
    return KrausChannel(iso.reshape(k, d_out, d))


@pytest.fixture
def gen():
    return np.random.default_rng(20070730)


@pytest.fixture
def haar_channel():
    return lambda d, n, seed=0: random_unitary_channel(d, n, seed)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
