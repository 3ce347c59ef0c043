import os
import sys

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from qsourcecode.spectra import Spectrum  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@st.composite
def spectra(draw, min_d=2, max_d=6, min_weight=0.02):
    d = draw(st.integers(min_d, max_d))
    w = draw(st.lists(st.floats(min_weight, 1.0), min_size=d, max_size=d))
    return Spectrum.from_weights(w)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def qubit():
    return Spectrum([0.75, 0.25])


def random_spectrum(rng, d):
    return Spectrum.from_weights(rng.dirichlet(np.ones(d)))


def random_source(rng, d, size):
    """Haar-random pure states with Dirichlet weights."""
    from qsourcecode.spectra import PureSource

    v = rng.standard_normal((size, d)) + 1j * rng.standard_normal((size, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return PureSource(v, rng.dirichlet(np.ones(size)))


# one "criterion k: PASS/FAIL" line per acceptance criterion, echoed in the summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
