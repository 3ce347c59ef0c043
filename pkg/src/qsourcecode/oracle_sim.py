"""Brute-force matrix oracle on small tensor powers.

Block projectors are built from symmetric-group characters acting by tensor
factor permutations, so nothing here relies on the combinatorial formulas in
schur_weyl; agreement between the two is a genuine cross-check.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .schur_weyl import YoungIndex, block_trace_log, dim_sym_group_irrep, enumerate_young
from .spectra import PureSource, Spectrum, entropy
from .universal_code import DegenerateCode, MEMBERSHIP_TOL, adjusted_rate

DIM_BUDGET = 4096


class DimensionBudgetExceeded(RuntimeError):
    pass


def _check_budget(n: int, d: int):
    if d ** n > DIM_BUDGET:
        raise DimensionBudgetExceeded(f"d^n = {d ** n} exceeds {DIM_BUDGET}")


def cycle_type(perm) -> tuple:
    """Cycle lengths of a permutation given in one-line notation, non-increasing."""
    seen = [False] * len(perm)
    lengths = []
    for i in range(len(perm)):
        if not seen[i]:
            k, j = 0, i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                k += 1
            lengths.append(k)
    return tuple(sorted(lengths, reverse=True))


@lru_cache(maxsize=None)
def _mn(beta: frozenset, mu: tuple) -> int:
    # Murnaghan-Nakayama on beta-sets: removing a rim hook of length k moves one
    # bead from b to b - k; the sign counts beads jumped over.
    if not mu:
        return 1
    k, rest = mu[0], mu[1:]
    total = 0
    for b in beta:
        if b - k >= 0 and (b - k) not in beta:
            height = sum(1 for c in beta if b - k < c < b)
            total += (-1) ** height * _mn((beta - {b}) | {b - k}, rest)
    return total


def sn_character(lam, mu) -> int:
    """chi_lambda evaluated on the conjugacy class of cycle type mu."""
    parts = [p for p in (lam.parts if isinstance(lam, YoungIndex) else lam) if p > 0]
    mu = tuple(sorted((m for m in mu if m > 0), reverse=True))
    if sum(parts) != sum(mu):
        raise ValueError("lambda and mu must partition the same n")
    r = len(parts)
    beta = frozenset(parts[i] + r - 1 - i for i in range(r))
    return _mn(beta, mu)


def permutation_indices(perm, d: int) -> np.ndarray:
    """Index map of the operator permuting the n tensor factors of (C^d)^{otimes n}."""
    n = len(perm)
    return np.arange(d ** n).reshape((d,) * n).transpose(perm).ravel()


@lru_cache(maxsize=8)
def _projectors(n: int, d: int) -> dict:
    _check_budget(n, d)
    lams = enumerate_young(n, d)
    D = d ** n
    proj = {lam.parts: np.zeros((D, D)) for lam in lams}
    chars = {}
    cols = np.arange(D)
    for perm in itertools.permutations(range(n)):
        ct = cycle_type(perm)
        if ct not in chars:
            chars[ct] = {lam.parts: sn_character(lam, ct) for lam in lams}
        rows = permutation_indices(perm, d)
        for lam in lams:
            c = chars[ct][lam.parts]
            if c:
                proj[lam.parts][rows, cols] += c
    scale = math.factorial(n)
    for lam in lams:
        P = proj[lam.parts] * (dim_sym_group_irrep(lam) / scale)
        P.flags.writeable = False
        proj[lam.parts] = P
    return proj


def central_projector(lam, n: int, d: int) -> np.ndarray:
    """P_lambda = (dim V_lambda / n!) sum_sigma chi_lambda(sigma) U_sigma on (C^d)^{otimes n}.

    A partition with more than d non-zero rows gives the zero operator.
    """
    parts = tuple(lam.parts if isinstance(lam, YoungIndex) else lam)
    if sum(parts) != n:
        raise ValueError("lambda must partition n")
    nz = [p for p in parts if p > 0]
    if len(nz) > d:
        _check_budget(n, d)
        return np.zeros((d ** n, d ** n))
    key = tuple(nz) + (0,) * (d - len(nz))
    return _projectors(n, d)[key]


def all_projectors(n: int, d: int) -> dict:
    return dict(_projectors(n, d))


def code_projector(R_eff: float, n: int, d: int) -> np.ndarray:
    """Projector onto the sum of blocks with H(lambda/n) <= R_eff."""
    P = np.zeros((d ** n, d ** n))
    for parts, Pl in _projectors(n, d).items():
        if entropy(np.asarray(parts, float) / n) <= R_eff + MEMBERSHIP_TOL:
            P = P + Pl
    return P


def tensor_power(rho: np.ndarray, n: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=rho.dtype)
    for _ in range(n):
        out = np.kron(out, rho)
    return out


def blind_encode(P: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """P rho P + Tr(rho (I - P)) P / Tr P, a trace-preserving map into range(P)."""
    tr_p = float(np.real(np.trace(P)))
    if tr_p < 0.5:
        raise DegenerateCode("empty code subspace")
    PrP = P @ rho @ P
    leak = float(np.real(np.trace(rho) - np.trace(P @ rho)))
    return PrP + leak * P / tr_p


@dataclass(frozen=True)
class ExactErrors:
    visible_error: float
    blind_error: float
    bures_visible: float
    bures_blind: float

    def appendix_c_ok(self, tol: float = 1e-12) -> bool:
        """eps_b <= eps <= 2 eps_b for both encoders."""
        return all(b - tol <= e <= 2 * b + tol for e, b in
                   ((self.visible_error, self.bures_visible), (self.blind_error, self.bures_blind)))


def _sequence_states(src: PureSource, n: int) -> tuple[np.ndarray, np.ndarray]:
    vecs = np.ones((1, 1), dtype=complex)
    probs = np.ones(1)
    for _ in range(n):
        vecs = np.einsum("ai,bj->abij", vecs, src.states).reshape(vecs.shape[0] * src.size, -1)
        probs = np.outer(probs, src.probs).ravel()
    return vecs, probs


def exact_errors(src: PureSource, R: float, n: int, adjusted: bool = True,
                 explicit: bool = False) -> ExactErrors:
    """Average errors of the visible and blind universal codes on every length-n sequence.

    The visible encoder maps |phi> to P|phi>/||P phi|| and the blind encoder is
    blind_encode; decoding is the inclusion of K. With ``explicit`` the blind
    encoder is applied as a matrix to every sequence state.
    """
    d = src.dim
    _check_budget(n, d)
    R_eff = adjusted_rate(R, n, d) if adjusted else R
    P = code_projector(R_eff, n, d)
    tr_p = float(np.trace(P))
    if tr_p < 0.5:
        raise DegenerateCode(f"R_n = {R_eff:.6g} gives an empty code at n = {n}")
    vecs, probs = _sequence_states(src, n)
    overlap = np.clip(np.real(np.einsum("ai,ij,aj->a", vecs.conj(), P, vecs)), 0.0, 1.0)
    f_vis = overlap
    if explicit:
        f_blind = np.array([
            np.real(v.conj() @ blind_encode(P, np.outer(v, v.conj())) @ v) for v in vecs])
    else:
        f_blind = overlap ** 2 + (1.0 - overlap) * overlap / tr_p
    f_blind = np.clip(f_blind, 0.0, 1.0)
    return ExactErrors(
        visible_error=float(np.dot(probs, 1.0 - f_vis)),
        blind_error=float(np.dot(probs, 1.0 - f_blind)),
        bures_visible=float(np.dot(probs, 1.0 - np.sqrt(f_vis))),
        bures_blind=float(np.dot(probs, 1.0 - np.sqrt(f_blind))),
    )


@dataclass(frozen=True)
class BlockCheck:
    lam: tuple
    matrix_trace: float
    combinatorial_trace: float
    top_eigenvalue: float
    highest_weight: float
    top_multiplicity: int
    dim_sym: int

    @property
    def trace_error(self) -> float:
        return abs(self.matrix_trace - self.combinatorial_trace)

    def ok(self, tol: float = 1e-8) -> bool:
        return (self.trace_error <= tol
                and abs(self.top_eigenvalue - self.highest_weight) <= tol
                and self.top_multiplicity % self.dim_sym == 0)


def schur_weyl_cross_check(a: Spectrum, n: int, rho: np.ndarray | None = None) -> list[BlockCheck]:
    """Compare matrix traces Tr P_lambda rho^n with dim V * s_lambda(a), per block.

    Also checks that the norm of P_lambda rho^n P_lambda is the highest-weight
    monomial prod a_i^{n_i}, attained with multiplicity a multiple of dim V_lambda
    (exactly dim V_lambda unless distinct weights give equal monomials).
    ``rho`` defaults to diag(a); any state with spectrum a may be passed.
    """
    d = a.d
    if rho is None:
        rho = np.diag(a.values)
    rho_n = tensor_power(rho, n)
    out = []
    for parts, P in _projectors(n, d).items():
        lam = YoungIndex(parts)
        block = P @ rho_n @ P
        ev = np.linalg.eigvalsh((block + block.conj().T) / 2)
        top = float(ev[-1])
        mult = int(np.sum(np.abs(ev - top) <= 1e-9 * max(top, 1e-300)))
        out.append(BlockCheck(
            lam=parts,
            matrix_trace=float(np.real(np.trace(P @ rho_n))),
            combinatorial_trace=math.exp(block_trace_log(lam, a)),
            top_eigenvalue=top,
            highest_weight=float(np.exp(np.dot(parts, a.log_values))),
            top_multiplicity=mult,
            dim_sym=dim_sym_group_irrep(lam),
        ))
    return out
