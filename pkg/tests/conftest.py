import numpy as np
import pytest

from gdrop.core import (Constant, Power, ShiftedRational, StructuredSystem,
                        frequency_grid)


def random_system(rng, n=40, l=2, m=1, p=1, kind='lti'):
    """Stable random structured system.

    ``lti`` is ``sI - A``; ``l=3`` adds a fading-memory term ``A/(s+1)``.
    """
    A = rng.standard_normal((n, n)) / np.sqrt(n)
    A -= (np.max(np.linalg.eigvals(A).real) + 1.0) * np.eye(n)
    A *= 5.0
    mats = [np.eye(n), A]
    funcs = [Power(1), Constant(-1.0)]
    if l >= 3:
        mats.append(0.1 * (rng.standard_normal((n, n)) / np.sqrt(n)))
        funcs.append(ShiftedRational(1.0))
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((p, n))
    return StructuredSystem(tuple(mats), tuple(funcs), B, C, name='random')


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_system(rng):
    return random_system(rng, n=30)


@pytest.fixture
def small_grid():
    return frequency_grid(0.1, 100.0, 20)


# acceptance results, filled by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section('acceptance criteria')
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
