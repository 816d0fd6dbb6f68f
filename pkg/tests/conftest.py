import numpy as np
import pytest

from shadowfit.qubit import SIGMA_X, SIGMA_Y, SIGMA_Z

ACCEPTANCE_LINES = []


def random_hermitian(rng, scale=1.0):
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return scale * (m + m.conj().T) / 2


def random_state(rng, pure=False):
    """Uniform direction on the Bloch sphere with radius 1 (pure) or in [0, 1]."""
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    r = 1.0 if pure else rng.random() ** (1 / 3)
    v *= r
    return 0.5 * (np.eye(2) + v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def record_acceptance(number, title, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES.append(f"[{status}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
