import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from adiabatic_ss import RandomSpec, random_complex  # noqa: E402

CORPUS_SEEDS = range(50)

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict = {}


def corpus_complex(seed):
    return random_complex(RandomSpec(seed=seed, q=2))


@pytest.fixture(scope="session")
def corpus():
    return [corpus_complex(s) for s in CORPUS_SEEDS]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
