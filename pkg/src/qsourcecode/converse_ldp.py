"""Converse-side tools: spectral tails of rho^{otimes n}, the converse
inequalities for a code, Ky Fan dominance for separable states, and the
Markov/Cramer large-deviation kit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .exponents import eta
from .schur_weyl import BudgetExceeded, compositions, enumeration_budget
from .spectra import Spectrum, logsumexp, renyi_psi
from .universal_code import CodeEvaluation

TAIL_RTOL = 1e-12
CHECK_TOL = 1e-12
T_CAP = 1e6


class Side(str, Enum):
    GEQ = "geq"
    LT = "lt"
    LEQ = "leq"
    GT = "gt"


@dataclass(frozen=True)
class TailQuery:
    a: Spectrum
    n: int
    threshold_log: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")


@lru_cache(maxsize=64)
def _type_table(n: int, d: int) -> np.ndarray:
    count = math.comb(n + d - 1, d - 1)
    if count > enumeration_budget():
        raise BudgetExceeded(f"{count} composition types exceed budget")
    m = np.array(list(compositions(n, d)), dtype=float)
    m.flags.writeable = False
    return m


def type_log_weights(a: Spectrum, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(types m, ln eigenvalue sum m_i ln a_i, ln total weight C(m) prod a_i^{m_i}) over all types."""
    m = _type_table(n, a.d)
    log_eig = m @ a.log_values
    log_mult = gammaln(n + 1) - gammaln(m + 1).sum(axis=1)
    return m, log_eig, log_mult + log_eig


def _side_mask(log_eig: np.ndarray, threshold_log: float, side: Side) -> np.ndarray:
    tol = TAIL_RTOL * max(1.0, abs(threshold_log))
    if side is Side.GEQ:
        return log_eig >= threshold_log - tol
    if side is Side.LT:
        return log_eig < threshold_log - tol
    if side is Side.LEQ:
        return log_eig <= threshold_log + tol
    return log_eig > threshold_log + tol


def spectral_tail_log(a: Spectrum, n: int, threshold_log: float, side: Side | str = Side.GEQ) -> float:
    """ln Tr rho^n {rho^n - e^threshold on the chosen side of 0}; -inf if empty."""
    TailQuery(a, n, threshold_log)
    _, log_eig, log_w = type_log_weights(a, n)
    mask = _side_mask(log_eig, threshold_log, Side(side))
    return logsumexp(log_w[mask]) if mask.any() else -math.inf


def spectral_tail(a: Spectrum, n: int, threshold_log: float, side: Side | str = Side.GEQ) -> float:
    """Exact probability mass of eigenvalues of rho^{otimes n} on one side of e^threshold.

    Equality belongs to the geq/leq sides, so geq + lt = leq + gt = 1.
    """
    return math.exp(spectral_tail_log(a, n, threshold_log, side))


# --- converse inequalities for a code -----------------------------------------

@dataclass(frozen=True)
class InequalityRow:
    name: str
    lam: float
    s: float | None
    lhs: float
    rhs: float

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs + CHECK_TOL * max(1.0, abs(self.rhs))

    def as_row(self) -> dict:
        return {"check": self.name, "lambda": self.lam, "s": "" if self.s is None else self.s,
                "lhs": self.lhs, "rhs": self.rhs, "ok": self.ok}


@dataclass
class ConverseReport:
    n: int
    rows: list[InequalityRow] = field(default_factory=list)

    @property
    def violations(self) -> list[InequalityRow]:
        return [r for r in self.rows if not r.ok]

    @property
    def ok(self) -> bool:
        return not self.violations


def lemma1_check(code_eval: CodeEvaluation, a: Spectrum, lambda_grid: Iterable[float],
                 s_values: Sequence[float] = (1.0, 1.5, 2.0, 4.0)) -> ConverseReport:
    """Check the three converse inequalities L10, L20, L21 for a code of dimension dim K and error eps.

    Every inequality is written as lhs <= rhs.
    """
    n = code_eval.n
    eps = code_eval.visible_error
    fid = 1.0 - eps if code_eval.degenerate else code_eval.fidelity_lower
    report = ConverseReport(n)
    for lam in lambda_grid:
        lam = float(lam)
        e_dim = math.exp(lam + code_eval.log_dim_K) if code_eval.log_dim_K > -math.inf else 0.0
        below = spectral_tail(a, n, lam, Side.LT)
        above = spectral_tail(a, n, lam, Side.GEQ)
        report.rows.append(InequalityRow("L10", lam, None, below, eps + e_dim))
        report.rows.append(InequalityRow("L20", lam, None, fid, e_dim + above))
        for s in s_values:
            rhs = e_dim + math.exp((1.0 - s) * lam + n * renyi_psi(a, s))
            report.rows.append(InequalityRow("L21", lam, float(s), fid, rhs))
    return report


# --- Ky Fan / Nielsen-Kempe ---------------------------------------------------

@dataclass(frozen=True)
class KyFanReport:
    dA: int
    dB: int
    trials: int
    checks: int
    violations: int
    min_margin: float

    @property
    def ok(self) -> bool:
        return self.violations == 0


def _haar_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_separable_state(rng: np.random.Generator, dA: int, dB: int,
                           mixture_size: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """(rho_AB, rho_A) for sum_i p_i |a_i><a_i| (x) |b_i><b_i| with Dirichlet(1) weights."""
    p = rng.dirichlet(np.ones(mixture_size))
    rho = np.zeros((dA * dB, dA * dB), dtype=complex)
    rho_a = np.zeros((dA, dA), dtype=complex)
    for w in p:
        va, vb = _haar_vector(rng, dA), _haar_vector(rng, dB)
        v = np.kron(va, vb)
        rho += w * np.outer(v, v.conj())
        rho_a += w * np.outer(va, va.conj())
    return rho, rho_a


def ky_fan_sums(rho: np.ndarray, size: int | None = None) -> np.ndarray:
    """Partial sums of the eigenvalues in decreasing order, zero-padded to ``size``."""
    ev = np.sort(np.linalg.eigvalsh((rho + rho.conj().T) / 2))[::-1]
    if size is not None and size > ev.size:
        ev = np.concatenate([ev, np.zeros(size - ev.size)])
    return np.cumsum(ev)


def kyfan_margin(rho: np.ndarray, rho_a: np.ndarray) -> np.ndarray:
    """Ky Fan k-sum of rho_A minus that of rho, for k = 1..dim(rho)."""
    dim = rho.shape[0]
    return ky_fan_sums(rho_a, dim) - ky_fan_sums(rho)


def kyfan_separable_check(dA: int, dB: int, mixture_size: int = 4, trials: int = 1000,
                          seed: int = 0, tol: float = 1e-10) -> KyFanReport:
    """Sample separable states and test that rho_A majorizes rho for every k."""
    if min(dA, dB, mixture_size, trials) < 1:
        raise ValueError("dimensions, mixture size and trials must be positive")
    violations, checks, worst = 0, 0, math.inf
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        rho, rho_a = random_separable_state(rng, dA, dB, mixture_size)
        margin = kyfan_margin(rho, rho_a)
        checks += margin.size
        violations += int(np.sum(margin < -tol))
        worst = min(worst, float(margin.min()))
    return KyFanReport(dA, dB, trials, checks, violations, worst)


# --- Markov and Cramer --------------------------------------------------------

def markov_bound(expectation: float, c: float) -> float:
    """E[X]/c >= P{X >= c} for non-negative X."""
    if c <= 0:
        raise ValueError("c must be positive")
    if expectation < 0:
        raise ValueError("expectation of a non-negative variable cannot be negative")
    return expectation / c


@dataclass(frozen=True)
class RateFunctionSpec:
    """Log moment generating function phi(t) = ln E e^{tX} with its limiting slopes.

    x1 = phi'(+inf) (largest value), x2 = phi'(-inf) (smallest), x3 = phi'(0) (mean).
    ``top_mass`` is P{X = x1} when known, giving the exact rate at x = x1.
    """

    phi: Callable[[float], float]
    dphi: Callable[[float], float]
    x1: float
    x2: float
    x3: float
    top_mass: float | None = None

    @classmethod
    def from_distribution(cls, values: Sequence[float], probs: Sequence[float]) -> "RateFunctionSpec":
        x = np.asarray(values, dtype=float)
        p = np.asarray(probs, dtype=float)
        keep = p > 0
        x, p = x[keep], p[keep]
        lp = np.log(p)

        def phi(t):
            return logsumexp(lp + t * x)

        def dphi(t):
            w = lp + t * x
            w = np.exp(w - w.max())
            return float(np.dot(w, x) / w.sum())

        x1 = float(x.max())
        return cls(phi, dphi, x1, float(x.min()), float(np.dot(p, x)),
                   float(p[x == x1].sum()))

    @classmethod
    def bernoulli(cls, p: float) -> "RateFunctionSpec":
        return cls.from_distribution([0.0, 1.0], [1.0 - p, p])

    @classmethod
    def neg_log_spectrum(cls, a: Spectrum) -> "RateFunctionSpec":
        """X = -ln a_i with probability a_i, so phi(t) = psi(1 - t)."""
        return cls.from_distribution(-a.log_values, a.values)


def _legendre_t(spec: RateFunctionSpec, x: float) -> float:
    hi = 1.0
    while spec.dphi(hi) < x and hi < T_CAP:
        hi *= 2.0
    if spec.dphi(hi) < x:
        return math.inf
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if spec.dphi(mid) < x:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def cramer_upper_exponent(spec: RateFunctionSpec, x: float) -> float:
    """I(x) = sup_{t >= 0} (t x - phi(t)); 0 below the mean and +inf above the maximum."""
    if x <= spec.x3:
        return 0.0
    if x > spec.x1 + 1e-15 * max(1.0, abs(spec.x1)):
        return math.inf
    if x >= spec.x1 and spec.top_mass is not None:
        return -math.log(spec.top_mass)
    t = _legendre_t(spec, x)
    if math.isinf(t):
        if spec.top_mass is not None:
            return -math.log(spec.top_mass)
        t = T_CAP
    return max(0.0, t * x - spec.phi(t))


def bernoulli_mean_tail_log(p: float, n: int, x: float) -> float:
    """ln P{mean of n Bernoulli(p) draws >= x}, read off an exact spectral tail.

    B is realized as an affine image of X = -ln a_i under a spectrum a, so the
    tail is one spectral_tail_log call. p = 1/2 uses a = (1/2, 1/4, 1/4), since
    the two-level uniform spectrum has a single eigenvalue.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if p == 0.5:
        # X = ln 2 (1 + B)
        return spectral_tail_log(Spectrum([0.5, 0.25, 0.25]), n, -n * math.log(2) * (1 + x), Side.LEQ)
    if p < 0.5:
        # X = -ln(1-p) + B ln((1-p)/p), increasing in B
        thr = -n * (-math.log1p(-p) + x * math.log((1 - p) / p))
        return spectral_tail_log(Spectrum([1 - p, p]), n, thr, Side.LEQ)
    # X = -ln(1-p) - B ln(p/(1-p)), decreasing in B
    thr = -n * (-math.log1p(-p) - x * math.log(p / (1 - p)))
    return spectral_tail_log(Spectrum([p, 1 - p]), n, thr, Side.GEQ)


@dataclass(frozen=True)
class TailRow:
    n: int
    tail_log: float
    empirical: float
    analytic: float
    residual: float

    def to_dict(self) -> dict:
        return {"n": self.n, "tail_log": self.tail_log, "empirical": self.empirical,
                "analytic": self.analytic, "residual": self.residual}


def tail_exponent_empirical(a: Spectrum, S: float, n_values: Iterable[int]) -> list[TailRow]:
    """-(1/n) ln Tr rho^n {rho^n <= e^{-nS}} against eta(S)."""
    target = eta(a, S)
    rows = []
    for n in n_values:
        lt = spectral_tail_log(a, n, -n * S, Side.LEQ)
        emp = math.inf if lt == -math.inf else -lt / n
        rows.append(TailRow(n, lt, emp, target, abs(emp - target)))
    return rows


@dataclass(frozen=True)
class TypeEnvelope:
    """Bounds on -(1/n) ln P{mean of X >= x} for X = -ln a_i under a.

    lower = I(x) (Chernoff); upper = d ln(n+1)/n + min D(m/n || a) over types
    m whose mean is at least x (method of types).
    """

    n: int
    x: float
    empirical: float
    lower: float
    upper: float

    @property
    def ok(self) -> bool:
        tol = 1e-9
        return self.lower - tol <= self.empirical <= self.upper + tol


def tail_envelope(a: Spectrum, n: int, x: float) -> TypeEnvelope:
    spec = RateFunctionSpec.neg_log_spectrum(a)
    m, log_eig, log_w = type_log_weights(a, n)
    mask = _side_mask(log_eig, -n * x, Side.LEQ)
    if not mask.any():
        return TypeEnvelope(n, x, math.inf, cramer_upper_exponent(spec, x), math.inf)
    emp = -logsumexp(log_w[mask]) / n
    types = m[mask] / n
    with np.errstate(divide="ignore", invalid="ignore"):
        div = np.where(types > 0, types * (np.log(types) - a.log_values), 0.0).sum(axis=1)
    upper = a.d * math.log(n + 1) / n + float(div.min())
    return TypeEnvelope(n, x, emp, cramer_upper_exponent(spec, x), upper)
