import numpy as np
import pytest

from lgi_decay import LorentzianSpectrum, QubitState

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def balanced():
    return QubitState.balanced()


@pytest.fixture
def fig1_spec():
    return LorentzianSpectrum(gamma=0.5, lam=5.0, delta=0.0)


def record_acceptance(label: str, ok: bool, detail: str):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")


@pytest.fixture
def acceptance():
    return record_acceptance


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_state(rng: np.random.Generator) -> QubitState:
    theta = rng.uniform(0, np.pi / 2)
    phi0, phi1 = rng.uniform(0, 2 * np.pi, size=2)
    c0 = np.cos(theta) * np.exp(1j * phi0)
    c1 = np.sin(theta) * np.exp(1j * phi1)
    return QubitState(c0, c1)
