import itertools
import math

import numpy as np
import pytest

from conftest import random_source, random_spectrum
from qsourcecode.oracle_sim import (
    DimensionBudgetExceeded,
    all_projectors,
    blind_encode,
    central_projector,
    code_projector,
    cycle_type,
    exact_errors,
    permutation_indices,
    schur_weyl_cross_check,
    sn_character,
    tensor_power,
)
from qsourcecode.schur_weyl import dim_su_d_irrep, dim_sym_group_irrep, enumerate_young, young_count
from qsourcecode.spectra import PureSource, Spectrum, spectrum_from_source
from qsourcecode.universal_code import DegenerateCode, evaluate_code, visible_error_exact


def _sign(mu):
    return (-1) ** sum(m - 1 for m in mu)


def test_character_examples():
    assert sn_character((2, 1), (3,)) == -1
    assert sn_character((2, 1), (1, 1, 1)) == 2
    assert sn_character((2, 1), (2, 1)) == 0
    for n in range(1, 7):
        for mu in enumerate_young(n, n):
            assert sn_character((n,), mu.parts) == 1
            assert sn_character((1,) * n, mu.parts) == _sign([m for m in mu.parts if m])
    with pytest.raises(ValueError):
        sn_character((2, 1), (2,))


def test_characters_identity_and_orthogonality():
    n = 6
    lams = [l.parts for l in enumerate_young(n, n)]
    classes = {}
    for perm in itertools.permutations(range(n)):
        ct = cycle_type(perm)
        classes[ct] = classes.get(ct, 0) + 1
    for lam in lams:
        assert sn_character(lam, (1,) * n) == dim_sym_group_irrep(lam)
    for l1, l2 in itertools.combinations_with_replacement(lams, 2):
        inner = sum(c * sn_character(l1, mu) * sn_character(l2, mu) for mu, c in classes.items())
        assert inner == (math.factorial(n) if l1 == l2 else 0)


def test_cycle_type():
    assert cycle_type((0, 1, 2)) == (1, 1, 1)
    assert cycle_type((1, 2, 0)) == (3,)
    assert cycle_type((1, 0, 3, 2, 4)) == (2, 2, 1)


def test_permutation_indices_swap():
    swap = np.eye(4)[permutation_indices((1, 0), 2)]
    assert np.allclose(swap, np.eye(4)[[0, 2, 1, 3]])


def test_two_qubit_projectors():
    swap = np.eye(4)[[0, 2, 1, 3]]
    P_sym = central_projector((2, 0), 2, 2)
    P_anti = central_projector((1, 1), 2, 2)
    assert np.allclose(P_sym, (np.eye(4) + swap) / 2)
    assert np.allclose(P_anti, (np.eye(4) - swap) / 2)
    assert np.trace(P_sym) == pytest.approx(3)
    assert np.trace(P_anti) == pytest.approx(1)


@pytest.mark.parametrize("n,d", [(n, 2) for n in range(1, 9)] + [(n, 3) for n in range(1, 6)] + [(3, 4)])
def test_projector_family(n, d):
    projs = all_projectors(n, d)
    assert len(projs) == young_count(n, d)
    total = np.zeros((d ** n, d ** n))
    for lam, P in projs.items():
        assert np.abs(P - P.T).max() <= 1e-10
        assert np.abs(P @ P - P).max() <= 1e-8
        assert np.trace(P) == pytest.approx(dim_sym_group_irrep(lam) * dim_su_d_irrep(lam))
        total += P
    assert np.abs(total - np.eye(d ** n)).max() <= 1e-8
    for (l1, P1), (l2, P2) in itertools.combinations(projs.items(), 2):
        assert np.abs(P1 @ P2).max() <= 1e-8


def test_too_many_rows_gives_zero():
    assert not central_projector((1, 1, 1), 3, 2).any()


def test_dimension_budget():
    with pytest.raises(DimensionBudgetExceeded):
        central_projector((9, 0), 9, 3)


def test_blind_encode_fixed_point_and_complement():
    P = central_projector((2, 0), 2, 2)
    v = np.array([1, 0, 0, 0], dtype=complex)
    rho = np.outer(v, v)
    assert np.allclose(blind_encode(P, rho), rho)
    s = np.array([0, 1, -1, 0]) / math.sqrt(2)
    assert np.allclose(blind_encode(P, np.outer(s, s)), P / 3)
    with pytest.raises(DegenerateCode):
        blind_encode(np.zeros((4, 4)), rho)


def test_blind_encode_is_trace_preserving_and_positive(rng):
    P = code_projector(0.5, 4, 2)
    for _ in range(25):
        G = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        rho = G @ G.conj().T
        rho /= np.trace(rho)
        out = blind_encode(P, rho)
        assert np.trace(out).real == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.eigvalsh((out + out.conj().T) / 2).min() >= -1e-9
        assert np.allclose(P @ out @ P, out)


def test_exact_errors_two_qubit_example():
    src = PureSource(np.eye(2), [0.75, 0.25])
    ex = exact_errors(src, 0.3, 2, adjusted=False)
    assert ex.visible_error == pytest.approx(0.1875, abs=1e-14)
    assert ex.appendix_c_ok()


def test_exact_errors_state_inside_code():
    src = PureSource(np.array([[1.0, 0.0]]), [1.0])
    ex = exact_errors(src, 0.1, 4, adjusted=False)
    assert ex.visible_error == pytest.approx(0.0, abs=1e-14)
    assert ex.blind_error == pytest.approx(0.0, abs=1e-14)


def test_exact_errors_degenerate():
    src = PureSource(np.eye(2), [0.5, 0.5])
    with pytest.raises(DegenerateCode):
        exact_errors(src, 0.5, 3)


@pytest.mark.parametrize("d,n", [(2, 6), (3, 4)])
def test_exact_errors_match_universal_code(rng, d, n):
    for _ in range(6):
        src = random_source(rng, d, 3)
        a = spectrum_from_source(src)
        for R in (0.3 * math.log(d), 0.8 * math.log(d)):
            ex = exact_errors(src, R, n, adjusted=False)
            ev = evaluate_code(a, R, n, adjusted=False)
            assert ex.visible_error == pytest.approx(ev.visible_error, abs=1e-10)
            assert ex.blind_error <= ev.blind_error_upper + 1e-10
            assert ex.blind_error <= 2 * ex.visible_error + 1e-10
            assert ex.appendix_c_ok()


def test_explicit_blind_channel_matches_closed_form(rng):
    src = random_source(rng, 2, 3)
    fast = exact_errors(src, 0.4, 4, adjusted=False)
    slow = exact_errors(src, 0.4, 4, adjusted=False, explicit=True)
    assert slow.blind_error == pytest.approx(fast.blind_error, abs=1e-12)


def test_unitary_invariance(rng):
    src = random_source(rng, 2, 4)
    G = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    U, _ = np.linalg.qr(G)
    rotated = PureSource(src.states @ U.T, src.probs)
    assert np.allclose(spectrum_from_source(rotated).values, spectrum_from_source(src).values)
    e1 = exact_errors(src, 0.45, 6, adjusted=False)
    e2 = exact_errors(rotated, 0.45, 6, adjusted=False)
    assert e1.visible_error == pytest.approx(e2.visible_error, abs=1e-10)
    assert e1.blind_error == pytest.approx(e2.blind_error, abs=1e-10)


def test_cross_check_examples(qubit):
    rep = {b.lam: b for b in schur_weyl_cross_check(qubit, 2)}
    assert rep[(2, 0)].matrix_trace == pytest.approx(0.8125)
    assert rep[(1, 1)].matrix_trace == pytest.approx(0.1875)
    assert rep[(2, 0)].top_eigenvalue == pytest.approx(0.5625)
    assert sum(b.matrix_trace for b in schur_weyl_cross_check(qubit, 3)) == pytest.approx(1.0)


@pytest.mark.parametrize("d,n_max", [(2, 8), (3, 5)])
def test_cross_check_all_blocks(rng, d, n_max):
    a = random_spectrum(rng, d)
    for n in range(1, n_max + 1):
        for b in schur_weyl_cross_check(a, n):
            assert b.ok(), b


def test_cross_check_rotated_state(rng):
    a = random_spectrum(rng, 2)
    G = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    U, _ = np.linalg.qr(G)
    rho = U @ np.diag(a.values) @ U.conj().T
    for b in schur_weyl_cross_check(a, 5, rho=rho):
        assert b.ok()


def test_tensor_power():
    rho = np.diag([0.75, 0.25])
    assert np.allclose(np.diag(tensor_power(rho, 2)), [0.5625, 0.1875, 0.1875, 0.0625])
