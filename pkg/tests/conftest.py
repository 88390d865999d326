from pathlib import Path

import numpy as np
import pytest

from cogsense import Instance, read_instance

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = FIXTURES / "golden_seed7_n16_l8_snr10_taps4.json"

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def golden() -> Instance:
    return read_instance(GOLDEN.read_bytes())


@pytest.fixture
def three_channel() -> Instance:
    # coarse example: channel 0 is too noisy, {1, 2} is the fixed point
    return Instance.from_arrays([0.9, 0.8, 0.1], [5.0, 1.0, 0.1], 1.0, 2)


def random_instance(rng: np.random.Generator, n: int, l: int | None = None) -> Instance:
    q = rng.uniform(0.0, 1.0, n)
    s2 = np.exp(rng.uniform(-3.0, 3.0, n))
    p = float(np.exp(rng.uniform(-3.0, 5.0)))
    if l is None:
        l = int(rng.integers(1, n + 1))
    return Instance.from_arrays(q, s2, p, l)
