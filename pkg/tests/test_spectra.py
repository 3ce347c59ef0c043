import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import spectra
from qsourcecode.spectra import (
    PureSource,
    Spectrum,
    entropy,
    is_degenerate,
    kl_divergence,
    psi_derivatives,
    renyi_psi,
    spectrum_from_source,
    tilted,
    tilted_entropy,
    top_multiplicity,
)


def test_spectrum_sorted_and_validated():
    a = Spectrum([0.25, 0.75])
    assert a.as_tuple() == (0.75, 0.25)
    assert a.d == 2
    with pytest.raises(ValueError):
        Spectrum([0.5, 0.4])
    with pytest.raises(ValueError):
        Spectrum([1.0, 0.0])
    with pytest.raises(ValueError):
        Spectrum([])


def test_spectrum_values_are_read_only():
    a = Spectrum([0.75, 0.25])
    with pytest.raises(ValueError):
        a.values[0] = 0.5


def test_entropy_examples(qubit):
    assert entropy(Spectrum([1.0])) == 0.0
    assert entropy(Spectrum([0.5, 0.5])) == pytest.approx(math.log(2), abs=1e-15)
    assert entropy(qubit) == pytest.approx(0.5623351446188083, abs=1e-15)


def test_kl_examples(qubit):
    assert kl_divergence(qubit.values, qubit) == 0.0
    assert kl_divergence([1.0, 0.0], qubit) == pytest.approx(-math.log(0.75), abs=1e-15)
    assert kl_divergence([0.5, 0.5], qubit) == pytest.approx(0.14384103622589045, abs=1e-15)


def test_kl_rejects_mismatched_support():
    with pytest.raises(ValueError):
        kl_divergence([0.5, 0.5], np.array([1.0, 0.0]))


def test_psi_examples(qubit):
    assert renyi_psi(qubit, 1.0) == 0.0
    assert renyi_psi(qubit, 2.0) == pytest.approx(math.log(0.625), abs=1e-15)
    assert renyi_psi(Spectrum.uniform(4), 0.0) == pytest.approx(math.log(4), abs=1e-15)


def test_psi_derivative_examples(qubit):
    d1, d2 = psi_derivatives(qubit, 1.0)
    assert d1 == pytest.approx(-entropy(qubit), abs=1e-15)
    assert d2 > 0
    for s in (0.0, 0.5, 3.0):
        assert psi_derivatives(Spectrum.uniform(3), s)[1] == pytest.approx(0.0, abs=1e-15)


def test_tilted_examples(qubit):
    assert tilted(qubit, 1.0) is qubit
    np.testing.assert_allclose(tilted(qubit, 2.0).values, [0.9, 0.1], atol=1e-15)
    np.testing.assert_allclose(tilted(qubit, 0.0).values, [0.5, 0.5], atol=1e-15)
    with pytest.raises(ValueError):
        tilted(qubit, -1.0)


def test_top_multiplicity_examples(qubit):
    assert top_multiplicity(qubit) == 1
    assert top_multiplicity(Spectrum.uniform(5)) == 5
    assert top_multiplicity(Spectrum([0.4, 0.4, 0.2])) == 2
    assert is_degenerate(Spectrum.uniform(3))
    assert not is_degenerate(qubit)


def test_spectrum_from_source_examples():
    one = spectrum_from_source(PureSource([[1, 0]], [1.0]))
    assert one.d == 1 and one.values[0] == pytest.approx(1.0)
    mix = spectrum_from_source(PureSource([[1, 0], [0, 1]], [0.5, 0.5]))
    np.testing.assert_allclose(mix.values, [0.5, 0.5], atol=1e-15)
    plus = np.array([1, 1]) / math.sqrt(2)
    s = spectrum_from_source(PureSource([[1, 0], plus], [0.5, 0.5]))
    np.testing.assert_allclose(s.values, [(2 + math.sqrt(2)) / 4, (2 - math.sqrt(2)) / 4], atol=1e-14)


def test_pure_source_validation():
    with pytest.raises(ValueError):
        PureSource([[1, 1]], [1.0])
    with pytest.raises(ValueError):
        PureSource([[1, 0], [0, 1]], [0.6, 0.6])
    with pytest.raises(ValueError):
        PureSource([[1, 0]], [0.5, 0.5])


@given(spectra(), st.floats(0.0, 5.0), st.floats(0.0, 5.0), st.floats(0.01, 0.99))
def test_psi_convex(a, s1, s2, t):
    lhs = renyi_psi(a, t * s1 + (1 - t) * s2)
    assert lhs <= t * renyi_psi(a, s1) + (1 - t) * renyi_psi(a, s2) + 1e-12


@given(spectra(), st.floats(0.05, 6.0))
def test_psi_derivatives_match_finite_differences(a, s):
    h = 1e-5
    p_plus, p0, p_minus = renyi_psi(a, s + h), renyi_psi(a, s), renyi_psi(a, s - h)
    d1, d2 = psi_derivatives(a, s)
    assert d1 == pytest.approx((p_plus - p_minus) / (2 * h), abs=1e-6)
    assert d2 == pytest.approx((p_plus - 2 * p0 + p_minus) / h ** 2, abs=1e-4)
    assert d2 >= 0


@given(spectra())
def test_tilted_entropy_non_increasing(a):
    grid = np.linspace(0.0, 12.0, 121)
    h = [tilted_entropy(a, s) for s in grid]
    assert all(x >= y - 1e-12 for x, y in zip(h, h[1:]))
    assert h[0] == pytest.approx(math.log(a.d), abs=1e-12)


@given(spectra(), st.floats(0.0, 8.0))
def test_tilted_entropy_identity(a, s):
    d1, _ = psi_derivatives(a, s)
    assert tilted_entropy(a, s) == pytest.approx(renyi_psi(a, s) - s * d1, abs=1e-10)
    assert tilted_entropy(a, s) == pytest.approx(entropy(tilted(a, s)), abs=1e-10)


@given(spectra(), spectra())
def test_kl_nonnegative_pinsker(a, b):
    if a.d != b.d:
        return
    D = kl_divergence(b.values, a)
    l1 = float(np.abs(b.values - a.values).sum())
    assert D >= 0.5 * l1 ** 2 - 1e-12


@given(st.integers(1, 4), st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_spectrum_from_source_properties(d, m, seed):
    rng = np.random.default_rng(seed)
    states = rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))
    states /= np.linalg.norm(states, axis=1)[:, None]
    src = PureSource(states, rng.dirichlet(np.ones(m)))
    a = spectrum_from_source(src)
    rho = src.average_state()
    assert a.values.sum() == pytest.approx(1.0, abs=1e-10)
    assert float(np.sum(a.values ** 2)) == pytest.approx(float(np.real(np.trace(rho @ rho))), abs=1e-10)
    assert a.d <= min(d, m)
