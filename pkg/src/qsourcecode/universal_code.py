"""The universal Schur-Weyl code and its exact finite-n performance.

The code subspace K at block length n is the sum of all blocks W_lambda whose
normalized Young index has entropy at most the effective rate. Because the
code projector commutes with every rho^{otimes n}, the visible error depends
only on the spectrum of the average state and is a sum of block traces.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .exponents import error_exponent, fidelity_exponent, min_divergence_entropy_at_least
from .schur_weyl import BlockData, block_data, enumerate_young, dim_su_d_irrep, dim_sym_group_irrep
from .spectra import Spectrum, entropy, kl_divergence, logsumexp

# Young indices with H(lambda/n) within this of the rate are treated as on the boundary (included).
MEMBERSHIP_TOL = 1e-12
LOG_TOL = 1e-9


class DegenerateCode(ValueError):
    """The effective rate is negative, so the code subspace is empty."""


def adjusted_rate(R: float, n: int, d: int) -> float:
    """R_n = R - (4d/n) ln(n + d); negative values mean an empty code."""
    if n < 1:
        raise ValueError("n must be positive")
    return R - (4 * d / n) * math.log(n + d)


def _effective_rate(R: float, n: int, d: int, adjusted: bool) -> float:
    return adjusted_rate(R, n, d) if adjusted else R


def in_code(lam, R_eff: float) -> bool:
    return entropy(np.asarray(lam.parts, float) / lam.n) <= R_eff + MEMBERSHIP_TOL


def code_subspace_log_dim(R_eff: float, n: int, d: int) -> float:
    """ln dim K, the total dimension of blocks with H(lambda/n) <= R_eff; -inf if empty."""
    total = sum(dim_sym_group_irrep(lam) * dim_su_d_irrep(lam)
                for lam in enumerate_young(n, d) if in_code(lam, R_eff))
    return math.log(total) if total else -math.inf


@dataclass(frozen=True)
class CodeEvaluation:
    """Exact performance of the universal code at one (R, n).

    Error and fidelity are kept both as values and as logs, since either can
    be far below double precision's resolution near 1.
    """

    n: int
    d: int
    R: float
    R_n: float
    adjusted: bool
    degenerate: bool
    log_dim_K: float
    visible_error: float
    log_visible_error: float
    log_fidelity: float
    blind_error_upper: float
    blind_error_upper_doubled: float
    log_bound_12_7: float
    log_bound_12_8: float
    log_bound_12_9: float

    @property
    def fidelity_lower(self) -> float:
        """1 - visible error, the exact fidelity of the visible code."""
        return math.exp(self.log_fidelity)

    @property
    def bound_12_7(self) -> float:
        return math.exp(self.log_bound_12_7)

    @property
    def bound_12_8(self) -> float:
        return math.exp(self.log_bound_12_8)

    @property
    def bound_12_9(self) -> float:
        return math.exp(self.log_bound_12_9)

    def violations(self) -> list[str]:
        """Names of the finite-n inequalities that fail for this evaluation."""
        if self.degenerate:
            return []
        out = []
        if self.adjusted and self.log_dim_K > self.n * self.R + LOG_TOL:
            out.append("10-1")
        if _log_gt(self.log_visible_error, self.log_bound_12_7):
            out.append("12-7")
        for blind in (self.blind_error_upper, self.blind_error_upper_doubled):
            if blind > 0 and _log_gt(math.log(blind), self.log_bound_12_8):
                out.append("12-8")
                break
        if _log_gt(self.log_bound_12_9, self.log_fidelity):
            out.append("12-9")
        eps = self.visible_error
        if not (eps - 1e-15 <= self.blind_error_upper <= self.blind_error_upper_doubled + 1e-15):
            out.append("blind-sandwich")
        return out

    def to_dict(self) -> dict:
        out = asdict(self)
        out.update(fidelity_lower=self.fidelity_lower, bound_12_7=self.bound_12_7,
                   bound_12_8=self.bound_12_8, bound_12_9=self.bound_12_9)
        return out


def _log_gt(x: float, y: float) -> bool:
    if x == -math.inf:
        return False
    return x > y + LOG_TOL * max(1.0, abs(y))


def _split_blocks(blocks: Sequence[BlockData], R_eff: float):
    inside = [b for b in blocks if in_code(b.lam, R_eff)]
    outside = [b for b in blocks if not in_code(b.lam, R_eff)]
    return inside, outside


def _lse_traces(blocks: Sequence[BlockData]) -> float:
    if not blocks:
        return -math.inf
    return logsumexp(np.array([b.log_trace for b in blocks]))


def lemma3_log_bounds(a: Spectrum, R_eff: float, n: int,
                      blocks: Sequence[BlockData] | None = None) -> tuple[float, float, float]:
    """Natural logs of the visible-error, blind-error and fidelity bounds at effective rate R_eff."""
    d = a.d
    min_div = min_divergence_entropy_at_least(a, R_eff)
    log7 = 4 * d * math.log(n + d) - n * min_div
    log8 = math.log(2.0) + log7
    if blocks is None:
        blocks = block_data(n, a)
    eligible = [kl_divergence(b.lam.type, a) for b in blocks if in_code(b.lam, R_eff)]
    if eligible:
        log9 = -(d * (d + 1) / 2) * math.log(n + d) - n * min(eligible)
    else:
        log9 = -math.inf
    return log7, log8, log9


def lemma3_bounds(a: Spectrum, R: float, n: int, adjusted: bool = True) -> tuple[float, float, float]:
    """The three code bounds as plain numbers; values above 1 are valid but vacuous."""
    R_eff = _effective_rate(R, n, a.d, adjusted)
    return tuple(math.exp(x) for x in lemma3_log_bounds(a, R_eff, n))


def evaluate_code(a: Spectrum, R: float, n: int, adjusted: bool = True,
                  blocks: Sequence[BlockData] | None = None) -> CodeEvaluation:
    """Exact visible error, blind-error bounds and the finite-n code bounds at (R, n).

    With ``adjusted`` the membership threshold is R_n, otherwise R itself.
    An empty code is reported as degenerate with visible error 1.
    """
    d = a.d
    R_eff = _effective_rate(R, n, d, adjusted)
    if blocks is None:
        blocks = block_data(n, a)
    log7, log8, log9 = lemma3_log_bounds(a, R_eff, n, blocks)
    inside, outside = _split_blocks(blocks, R_eff)
    if not inside:
        return CodeEvaluation(n, d, R, R_eff, adjusted, True, -math.inf, 1.0, 0.0, -math.inf,
                              1.0, 2.0, log7, log8, log9)
    log_dim = math.log(sum(b.dim_sym * b.dim_unitary for b in inside))
    log_fid = min(0.0, _lse_traces(inside))
    log_err = _lse_traces(outside)
    # the two logs come from disjoint block sets, so each is accurate on its own
    eps = math.exp(log_err)
    fid = math.exp(log_fid)
    return CodeEvaluation(
        n=n, d=d, R=R, R_n=R_eff, adjusted=adjusted, degenerate=False,
        log_dim_K=log_dim, visible_error=eps, log_visible_error=log_err, log_fidelity=log_fid,
        blind_error_upper=eps * (1.0 + fid), blind_error_upper_doubled=2.0 * eps,
        log_bound_12_7=log7, log_bound_12_8=log8, log_bound_12_9=log9,
    )


def visible_error_exact(a: Spectrum, R: float, n: int, adjusted: bool = True) -> float:
    """epsilon(F) = 1 - Tr P rho^{otimes n} for the visible universal code."""
    ev = evaluate_code(a, R, n, adjusted)
    if ev.degenerate:
        raise DegenerateCode(f"R_n = {ev.R_n:.6g} < 0 at n = {n}")
    return ev.visible_error


def blind_error_upper_exact(a: Spectrum, R: float, n: int, adjusted: bool = True) -> tuple[float, float]:
    """(1 - (Tr P rho^n)^2, 2 (1 - Tr P rho^n)), both upper bounds on the blind error."""
    ev = evaluate_code(a, R, n, adjusted)
    if ev.degenerate:
        raise DegenerateCode(f"R_n = {ev.R_n:.6g} < 0 at n = {n}")
    return ev.blind_error_upper, ev.blind_error_upper_doubled


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    R_n: float
    degenerate: bool
    error_rate: float
    fidelity_rate: float
    error_limit: float
    fidelity_limit: float
    error_residual: float
    fidelity_residual: float
    envelope: float

    def to_dict(self) -> dict:
        return asdict(self)


def _neg_rate(log_x: float, n: int) -> float:
    return math.inf if log_x == -math.inf else -log_x / n


def convergence_report(a: Spectrum, R: float, n_values: Iterable[int],
                       adjusted: bool = True) -> list[ConvergenceRow]:
    """Finite-n rates -(1/n) ln eps and -(1/n) ln(1 - eps) against their limits.

    The envelope column is ln(n)/n; residual / envelope is the constant a
    polynomial-prefactor correction would need.
    """
    err_lim = error_exponent(a, R).value
    fid_lim = fidelity_exponent(a, R).value
    rows = []
    for n in n_values:
        ev = evaluate_code(a, R, n, adjusted)
        er = _neg_rate(ev.log_visible_error, n)
        fr = _neg_rate(ev.log_fidelity, n)
        rows.append(ConvergenceRow(
            n=n, R_n=ev.R_n, degenerate=ev.degenerate, error_rate=er, fidelity_rate=fr,
            error_limit=err_lim, fidelity_limit=fid_lim,
            error_residual=abs(er - err_lim), fidelity_residual=abs(fr - fid_lim),
            envelope=math.log(n) / n,
        ))
    return rows
