import math
import sys

import numpy as np
import pytest

from pwsmanifold import CircleProfile, PerturbationSpec, averaged_generic

EX1_PLUS = {(0, 1, 0): 0.5}
EX1_MINUS = {(0, 0, 1): -1.0 / math.pi}
EX2_PLUS = {(2, 0, 0): 2.0 / math.pi, (0, 0, 2): 1.0 / (2.0 * math.pi), (0, 1, 0): -3.0}
EX2_MINUS = {(0, 0, 2): 1.0 / (2.0 * math.pi), (0, 0, 0): 8.0 / math.pi}

# Frozen from tests/oracles.py (nested scipy quad), see test_oracles.py.
EX2_C00_ORACLE = 8.5


@pytest.fixture(scope="session")
def ex1_pert():
    return PerturbationSpec(2, EX1_PLUS, EX1_MINUS)


@pytest.fixture(scope="session")
def ex2_pert():
    return PerturbationSpec(3, EX2_PLUS, EX2_MINUS)


@pytest.fixture(scope="session")
def ex1_poly(ex1_pert):
    return averaged_generic(ex1_pert, CircleProfile.zero())


@pytest.fixture(scope="session")
def ex2_poly(ex2_pert):
    return averaged_generic(ex2_pert, CircleProfile.cos())


@pytest.fixture(params=["zero", "cos"])
def profile(request):
    return getattr(CircleProfile, request.param)()


def random_pert(rng: np.random.Generator, degree: int, scale: float = 1.0) -> PerturbationSpec:
    sides = []
    for _ in range(2):
        d = {}
        for i in range(degree):
            for j in range(degree - i):
                for k in range(degree - i - j):
                    d[(i, j, k)] = float(rng.uniform(-scale, scale))
        sides.append(d)
    return PerturbationSpec(degree, *sides)


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("test_acceptance")
    lines = getattr(acc, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
