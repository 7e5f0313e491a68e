import math

import numpy as np
import pytest

from orbitqsl.reproduce import QUBIT_BLOCH, qubit_hamiltonian
from orbitqsl.states import density_from_bloch

# independent high-precision evaluation of the qubit instance
# n = (1/sqrt2, 1/sqrt3, -1/sqrt6), r = (0, 0, 1/2), alpha = omega = hbar = 1, a = pi/2
N_DOT_R = -1 / (2 * math.sqrt(6))
QUBIT_V = 0.204124145231931508
QUBIT_S0 = 2.73045479126744553
QUBIT_DH = 0.978945010372560882
QUBIT_SPEED = 1.95789002074512176
QUBIT_MT = 1.39459048380475723
QUBIT_CHAU = 1.37931034482758621
QUBIT_BURES = 0.947969741382893686
QUBIT_BASELINE = 0.484179259988322113
QUBIT_MEAN_ABS = 0.795875854768068492


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def qubit_instance():
    return density_from_bloch(QUBIT_BLOCH), qubit_hamiltonian(), math.pi / 2


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
