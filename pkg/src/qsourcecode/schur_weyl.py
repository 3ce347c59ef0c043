"""Schur-Weyl block structure of (C^d)^{otimes n}.

Young indices label the blocks W = U (x) V of the joint S_n x SU(d) action.
Everything that decays with n (block traces, Schur polynomials) is held as a
natural log; dimensions are exact Python integers.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np

from .spectra import Spectrum, entropy, kl_divergence, logsumexp

DEFAULT_BUDGET = 2_000_000
BUDGET_ENV = "QSOURCECODE_BUDGET"
DENSE_TABLE_LIMIT = 20_000_000
BOUND_TOL = 1e-9


class BudgetExceeded(RuntimeError):
    """Raised when an exact enumeration would exceed the configured budget."""


class BoundViolation(ArithmeticError):
    """Raised when a verified inequality fails."""


def enumeration_budget() -> int:
    return int(os.environ.get(BUDGET_ENV, DEFAULT_BUDGET))


@dataclass(frozen=True, order=True)
class YoungIndex:
    """Non-increasing partition (n_1, ..., n_d) of n, padded with zeros to length d."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 0 for p in parts) or any(x < y for x, y in zip(parts, parts[1:])):
            raise ValueError(f"{parts} is not a non-increasing sequence of non-negative integers")
        object.__setattr__(self, "parts", parts)

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def d(self) -> int:
        return len(self.parts)

    @property
    def type(self) -> np.ndarray:
        """The normalized type n_i / n."""
        return np.asarray(self.parts, dtype=float) / self.n

    def entropy(self) -> float:
        return entropy(self.type)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __repr__(self):
        return f"YoungIndex{self.parts}"


@dataclass(frozen=True)
class BlockData:
    lam: YoungIndex
    dim_sym: int
    dim_unitary: int
    log_trace: float


@dataclass(frozen=True)
class BoundCheck:
    """A checked inequality lhs <= rhs, both in natural-log scale."""

    name: str
    n: int
    lam: tuple | None
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs + BOUND_TOL

    def as_row(self) -> dict:
        return {"bound": self.name, "n": self.n, "lam": "" if self.lam is None else ",".join(map(str, self.lam)),
                "lhs_log": self.lhs, "rhs_log": self.rhs, "margin": self.margin, "ok": self.ok}


def _partitions(n: int, d: int, max_part: int | None = None) -> Iterator[tuple]:
    if max_part is None:
        max_part = n
    if d == 0:
        if n == 0:
            yield ()
        return
    if n == 0:
        yield (0,) * d
        return
    for first in range(min(n, max_part), 0, -1):
        if first * d < n:
            break
        for rest in _partitions(n - first, d - 1, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def young_count(n: int, d: int) -> int:
    """Number of partitions of n into at most d parts."""
    if n == 0:
        return 1
    if d == 0:
        return 0
    # either fewer than d parts, or exactly d parts (subtract 1 from each)
    return young_count(n, d - 1) + (young_count(n - d, d) if n >= d else 0)


def enumerate_young(n: int, d: int, budget: int | None = None) -> list[YoungIndex]:
    """All Young indices of n with at most d rows, in reverse lexicographic order."""
    if n < 0 or d < 1:
        raise ValueError("need n >= 0 and d >= 1")
    budget = enumeration_budget() if budget is None else budget
    if young_count(n, d) > budget:
        raise BudgetExceeded(f"|Y_n| = {young_count(n, d)} exceeds budget {budget}")
    return [YoungIndex(p) for p in _partitions(n, d)]


def _as_parts(lam) -> tuple:
    return lam.parts if isinstance(lam, YoungIndex) else tuple(int(x) for x in lam)


def dim_sym_group_irrep(lam) -> int:
    """dim of the S_n irrep, n! prod_{i<j}(n_i - n_j - i + j) / prod_i (n_i + d - i)!."""
    p = _as_parts(lam)
    d = len(p)
    n = sum(p)
    num = math.factorial(n)
    for i, j in itertools.combinations(range(d), 2):
        num *= p[i] - p[j] - i + j
    den = 1
    for i in range(d):
        den *= math.factorial(p[i] + d - 1 - i)
    q, r = divmod(num, den)
    if r:
        raise ArithmeticError(f"non-integral dimension for {p}")
    return q


def dim_su_d_irrep(lam, d: int | None = None) -> int:
    """Weyl dimension formula prod_{i<j} (n_i - n_j + j - i) / (j - i)."""
    p = _as_parts(lam)
    if d is None:
        d = len(p)
    if len(p) > d:
        if any(p[d:]):
            raise ValueError("partition has more than d non-zero rows")
        p = p[:d]
    p = p + (0,) * (d - len(p))
    num, den = 1, 1
    for i, j in itertools.combinations(range(d), 2):
        num *= p[i] - p[j] + j - i
        den *= j - i
    return num // den


def multinomial_log(lam) -> float:
    """ln n! / (n_1! ... n_d!)."""
    p = _as_parts(lam)
    return math.lgamma(sum(p) + 1) - sum(math.lgamma(x + 1) for x in p)


# Schur polynomials via Gelfand-Tsetlin branching:
#   s_mu(a_1..a_k) = sum_{nu interlacing mu} s_nu(a_1..a_{k-1}) a_k^{|mu| - |nu|}.
# Level k is stored densely, indexed by (mu_1, ..., mu_k); each interlacing set
# is a rectangular slice of the level below, so the sum is one log-sum-exp.

@lru_cache(maxsize=16)
def _gt_level(log_a: tuple, k: int, n: int) -> np.ndarray:
    """Dense table of ln s_mu(a_1..a_k) for partitions mu with k rows and |mu| <= n."""
    if k == 1:
        return np.arange(n + 1) * log_a[0]
    if (n + 1) ** k > DENSE_TABLE_LIMIT:
        raise BudgetExceeded(f"dense Schur table of size {(n + 1) ** k} exceeds limit")
    below = _gt_level(log_a, k - 1, n)
    lk = log_a[k - 1]
    size = np.indices(below.shape).sum(axis=0) if k > 2 else np.arange(n + 1)
    shifted = below - size * lk
    table = np.full((n + 1,) * k, -np.inf)
    for m in range(n + 1):
        for mu in _partitions(m, k):
            sl = tuple(slice(mu[i + 1], mu[i] + 1) for i in range(k - 1))
            table[mu] = m * lk + logsumexp(shifted[sl])
    return table


def _schur_logs_for_n(a: Spectrum, n: int) -> dict:
    log_a = tuple(float(x) for x in a.log_values)
    d = a.d
    out = {}
    if d == 1:
        return {(n,): n * log_a[0]}
    below = _gt_level(log_a, d - 1, n)
    lk = log_a[d - 1]
    size = np.indices(below.shape).sum(axis=0) if d > 2 else np.arange(n + 1)
    shifted = below - size * lk
    for mu in _partitions(n, d):
        sl = tuple(slice(mu[i + 1], mu[i] + 1) for i in range(d - 1))
        out[mu] = n * lk + logsumexp(shifted[sl])
    return out


def schur_polynomial_log(lam, a: Spectrum) -> float:
    """ln s_lambda(a_1, ..., a_d), a sum of positive monomials over semistandard tableaux."""
    p = _as_parts(lam)
    if len(p) != a.d:
        raise ValueError("Young index and spectrum must have the same number of rows")
    if a.d == 1:
        return p[0] * float(a.log_values[0])
    log_a = tuple(float(x) for x in a.log_values)
    n = sum(p)
    below = _gt_level(log_a, a.d - 1, n)
    lk = log_a[-1]
    size = np.indices(below.shape).sum(axis=0) if a.d > 2 else np.arange(n + 1)
    sl = tuple(slice(p[i + 1], p[i] + 1) for i in range(a.d - 1))
    return n * lk + logsumexp((below - size * lk)[sl])


def complete_homogeneous(m: int, x: Sequence[Fraction]) -> Fraction:
    """h_m(x) by the recursion over variables, exact."""
    if m < 0:
        return Fraction(0)
    h = [Fraction(1)] + [Fraction(0)] * m
    for xi in x:
        for j in range(1, m + 1):
            h[j] += xi * h[j - 1]
    return h[m]


def schur_polynomial_jacobi_trudi(lam, values: Sequence) -> Fraction:
    """s_lambda = det(h_{lambda_i - i + j}) in exact rational arithmetic.

    Only practical for small n; kept as an independent check of the tableau sum.
    """
    p = [x for x in _as_parts(lam) if x > 0]
    x = [Fraction(v) for v in values]
    r = len(p)
    if r == 0:
        return Fraction(1)
    M = [[complete_homogeneous(p[i] - i + j, x) for j in range(r)] for i in range(r)]
    return _det(M)


def _det(M) -> Fraction:
    M = [row[:] for row in M]
    n = len(M)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            for k in range(c, n):
                M[r][k] -= f * M[c][k]
    return det


def block_trace_log(lam, a: Spectrum) -> float:
    """ln Tr P_lambda rho^{otimes n} = ln dim V_lambda + ln s_lambda(a)."""
    return math.log(dim_sym_group_irrep(lam)) + schur_polynomial_log(lam, a)


def block_data(n: int, a: Spectrum, budget: int | None = None) -> list[BlockData]:
    """Dimensions and log traces for every block of (C^d)^{otimes n}."""
    lams = enumerate_young(n, a.d, budget)
    schur = _schur_logs_for_n(a, n)
    out = []
    for lam in lams:
        dv = dim_sym_group_irrep(lam)
        out.append(BlockData(lam, dv, dim_su_d_irrep(lam), math.log(dv) + schur[lam.parts]))
    return out


def weights(lam) -> list[tuple]:
    """The weight set of U_lambda: integer vectors with the same total majorized by lambda."""
    p = _as_parts(lam)
    d = len(p)
    n = sum(p)
    prefix = list(itertools.accumulate(p))
    out = []
    for comp in _compositions(n, d):
        s = sorted(comp, reverse=True)
        if all(x <= y for x, y in zip(itertools.accumulate(s), prefix)):
            out.append(comp)
    return out


def _compositions(n: int, d: int) -> Iterator[tuple]:
    if d == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, d - 1):
            yield (first,) + rest


def compositions(n: int, d: int) -> Iterator[tuple]:
    """All (m_1, ..., m_d) of non-negative integers summing to n."""
    return _compositions(n, d)


def region_trace_log(n: int, a: Spectrum, predicate: Callable[[np.ndarray], bool],
                     check: bool = True, budget: int | None = None) -> float:
    """ln of the total block trace over Young indices whose type satisfies predicate.

    With ``check`` the lower and upper sandwich bounds on this sum are verified
    (using the finite set of selected types as the region) and a
    BoundViolation is raised on failure.
    """
    blocks = [b for b in block_data(n, a, budget) if predicate(b.lam.type)]
    if not blocks:
        return -math.inf
    total = logsumexp(np.array([b.log_trace for b in blocks]))
    if check:
        for bc in region_bound_checks(n, a, blocks, total):
            if not bc.ok:
                raise BoundViolation(f"{bc.name} violated at n={n}: {bc.lhs} > {bc.rhs}")
    return total


def region_bound_checks(n: int, a: Spectrum, blocks: list[BlockData], total_log: float) -> list[BoundCheck]:
    """Lower ("f-e32") and upper ("e32") bounds on a region's total block trace."""
    d = a.d
    min_div = min(kl_divergence(b.lam.type, a) for b in blocks)
    lo = -(d * (d + 1) / 2) * math.log(n + d) - n * min_div
    hi = 4 * d * math.log(n + d) - n * min_div
    return [BoundCheck("f-e32", n, None, lo, total_log), BoundCheck("e32", n, None, total_log, hi)]


def block_bound_checks(n: int, a: Spectrum, blocks: list[BlockData] | None = None) -> list[BoundCheck]:
    """Every per-block dimension and trace inequality at block length n."""
    d = a.d
    if blocks is None:
        blocks = block_data(n, a)
    ln_nd = math.log(n + d)
    ln_n1 = math.log(n + 1)
    out = [BoundCheck("h20", n, None, math.log(len(blocks)), d * ln_n1)]
    for b in blocks:
        lam = b.lam.parts
        nH = n * b.lam.entropy()
        nD = n * kl_divergence(b.lam.type, a)
        ln_v = math.log(b.dim_sym)
        ln_c = multinomial_log(lam)
        out += [
            BoundCheck("a4-1", n, lam, -(d * (d + 1) / 2) * ln_nd + nH, ln_v),
            BoundCheck("a4", n, lam, ln_v, 2 * d * ln_nd + nH),
            BoundCheck("h21", n, lam, math.log(b.dim_unitary), d * ln_n1),
            BoundCheck("type-lower", n, lam, -d * ln_n1 + nH, ln_c),
            BoundCheck("type-upper", n, lam, ln_c, nH),
            BoundCheck("f-e31", n, lam, -(d * (d + 1) / 2) * ln_nd - nD, b.log_trace),
            BoundCheck("e31", n, lam, b.log_trace, 3 * d * ln_nd - nD),
        ]
    return out


def highest_weight_check(lam, a: Spectrum) -> tuple[float, float]:
    """(max over weights of sum n'_i ln a_i, sum n_i ln a_i); equal by majorization."""
    la = a.log_values
    best = max(float(np.dot(w, la)) for w in weights(lam))
    return best, float(np.dot(_as_parts(lam), la))
