"""Optimal error and fidelity exponents of fixed-length pure-state source coding.

Both exponents depend on the source only through the spectrum ``a`` of the
average state. Each can be computed three ways:

* ``psi_form``: direct maximization of ((1 - s) R - psi(s)) / s over s in
  (0, 1] (error) or s >= 1 (fidelity);
* ``divergence_form``: numerical minimization of D(b||a) over the simplex with
  H(b) >= R (error) or H(b) <= R (fidelity);
* ``tilted_closed_form``: the regime-dispatched value S_R - R (or
  -ln a_1 - R at low rate) built from the inverse maps ``s_of_S`` and
  ``S_of_R``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar
from scipy.special import xlogy

from .spectra import (
    Spectrum,
    entropy,
    is_degenerate,
    kl_divergence,
    logsumexp,
    psi_derivatives,
    renyi_psi,
    tilted,
    tilted_entropy,
    top_multiplicity,
)

BISECTION_TOL = 1e-12
BISECTION_MAXITER = 200
S_MAX_CAP = 1e15
ENTROPY_TOL = 1e-9


class Characterization(str, Enum):
    PSI_FORM = "psi_form"
    DIVERGENCE_FORM = "divergence_form"
    TILTED_CLOSED_FORM = "tilted_closed_form"


class Regime(str, Enum):
    R_BELOW_LOGK = "R_below_logk"
    R_BETWEEN_LOGK_AND_H = "R_between_logk_and_H"
    R_BETWEEN_H_AND_LOGD = "R_between_H_and_logd"


class Direction(str, Enum):
    H_AT_LEAST_R = "H_at_least_R"
    H_AT_MOST_R = "H_at_most_R"


@dataclass(frozen=True)
class ExponentResult:
    """An exponent value in nats together with how it was obtained.

    ``optimizer`` is the maximizing s for the psi form (``inf`` when the
    supremum is only reached in the limit) and the minimizing distribution b
    otherwise. ``tilt`` records s(S_R) when the closed form used one.
    """

    value: float
    characterization: Characterization
    regime: Regime
    optimizer: Union[float, np.ndarray]
    tilt: float | None = None

    def to_dict(self) -> dict:
        opt = self.optimizer
        if isinstance(opt, np.ndarray):
            opt = [float(x) for x in opt]
        else:
            opt = float(opt)
        return {
            "value": float(self.value),
            "characterization": self.characterization.value,
            "regime": self.regime.value,
            "optimizer": opt,
            "tilt": None if self.tilt is None else float(self.tilt),
        }


def regime(a: Spectrum, R: float) -> Regime:
    k = top_multiplicity(a)
    if R <= math.log(k):
        return Regime.R_BELOW_LOGK
    if R <= entropy(a):
        return Regime.R_BETWEEN_LOGK_AND_H
    return Regime.R_BETWEEN_H_AND_LOGD


def _check_rate(a: Spectrum, R: float):
    if not (0.0 <= R < math.log(a.d)):
        raise ValueError(f"rate {R!r} outside [0, ln d) = [0, {math.log(a.d)!r})")


def _bisect_decreasing(f, target: float, lo: float, hi: float) -> float:
    """Root of f(s) = target for f strictly decreasing on [lo, hi]."""
    for _ in range(BISECTION_MAXITER):
        mid = 0.5 * (lo + hi)
        if f(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= BISECTION_TOL * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def _upper_bracket(f, target: float) -> float:
    s_max = 1.0
    while f(s_max) >= target:
        s_max *= 2.0
        if s_max > S_MAX_CAP:
            raise ValueError(f"target too close to its asymptote; no bracket below s = {S_MAX_CAP:g}")
    return s_max


def _neg_dpsi(a: Spectrum):
    return lambda s: -psi_derivatives(a, s)[0]


def s_of_S(a: Spectrum, S: float) -> float:
    """Unique s >= 0 with -psi'(s) = S, for -ln a_1 < S <= -psi'(0)."""
    f = _neg_dpsi(a)
    upper = f(0.0)
    lower = -a.log_values[0]
    if not (lower < S <= upper + BISECTION_TOL) or is_degenerate(a):
        raise ValueError(f"S={S!r} outside ({lower!r}, {upper!r}]")
    if S >= upper:
        return 0.0
    return _bisect_decreasing(f, S, 0.0, _upper_bracket(f, S))


def _tilt_for_rate(a: Spectrum, R: float) -> float:
    """s with H(tilted(a, s)) = R, for ln k < R < ln d."""
    k = top_multiplicity(a)
    if not (math.log(k) < R < math.log(a.d)):
        raise ValueError(f"R={R!r} outside (ln k, ln d) = ({math.log(k)!r}, {math.log(a.d)!r})")
    f = lambda s: tilted_entropy(a, s)
    return _bisect_decreasing(f, R, 0.0, _upper_bracket(f, R))


def S_of_R(a: Spectrum, R: float) -> float:
    """S_R, defined by R = s(S_R) S_R + psi(s(S_R)), for ln k < R < ln d."""
    return -psi_derivatives(a, _tilt_for_rate(a, R))[0]


def _psi_objective(a: Spectrum, R: float, s: float) -> float:
    return ((1.0 - s) * R - renyi_psi(a, s)) / s


def _scaled_psi_inv(a: Spectrum, u: float) -> float:
    """u * psi(1/u), continuous at u = 0 where it equals ln a_1."""
    la = a.log_values
    if u == 0.0:
        return float(la[0])
    return float(la[0] + u * logsumexp((la - la[0]) / u))


def _psi_form(a: Spectrum, R: float, fidelity: bool) -> ExponentResult:
    reg = regime(a, R)
    opts = {"xatol": 1e-13, "maxiter": 1000}
    if not fidelity:
        res = minimize_scalar(lambda s: -_psi_objective(a, R, s), bounds=(1e-12, 1.0),
                              method="bounded", options=opts)
        best_s, best = 1.0, 0.0
        if -res.fun > best:
            best_s, best = float(res.x), float(-res.fun)
        return ExponentResult(best, Characterization.PSI_FORM, reg, best_s)

    # s >= 1 via u = 1/s in [0, 1]; u = 0 stands for the limit s -> infinity
    G = lambda u: (u - 1.0) * R - _scaled_psi_inv(a, u)
    res = minimize_scalar(lambda u: -G(u), bounds=(0.0, 1.0), method="bounded", options=opts)
    candidates = [(1.0, 0.0), (0.0, G(0.0)), (float(res.x), float(-res.fun))]
    u, best = max(candidates, key=lambda c: c[1])
    best_s = math.inf if u == 0.0 else 1.0 / u
    return ExponentResult(best, Characterization.PSI_FORM, reg, best_s)


def _candidates_on_level_set(b: np.ndarray, la: np.ndarray, R: float):
    """Feasible points derived from an approximate minimizer b."""
    yield _kkt_polish(b, la, R)
    yield _restore_entropy(b, R)
    # leftover mass on small eigenvalues is a descent direction along the level
    # set that SLSQP can stall on when the minimum sits on (or next to) a face.
    # The minimizer is ordered like a, so only faces dropping the smallest
    # eigenvalues matter; each is tried from b restricted to it.
    order = np.argsort(la)
    for j in range(1, b.size - 1):
        pruned = b.copy()
        pruned[order[:j]] = 0.0
        if pruned.sum() <= 0:
            continue
        restored = _restore_entropy(pruned / pruned.sum(), R)
        yield restored
        if restored is not None:
            yield _polish_on_support(restored, la, R)


def _polish_on_support(b: np.ndarray, la: np.ndarray, R: float) -> np.ndarray | None:
    keep = b > 0
    sub = _kkt_polish(b[keep], la[keep], R)
    if sub is None:
        return None
    out = np.zeros_like(b)
    out[keep] = sub
    return out


def _pick_best(a: Spectrum, R: float, approx) -> tuple[float, np.ndarray]:
    best_val, best_b = math.inf, None
    seen = []
    for b in approx:
        if b is None or not np.all(np.isfinite(b)) or abs(entropy(b) - R) > 1e-4:
            continue
        # several starts usually land on the same point
        if any(np.max(np.abs(b - c)) < 1e-9 for c in seen):
            continue
        seen.append(b)
        for cand in _candidates_on_level_set(b, a.log_values, R):
            if cand is None:
                continue
            val = kl_divergence(cand, a.values)
            if val < best_val:
                best_val, best_b = val, cand
    if best_b is None:
        raise RuntimeError("simplex minimization failed to reach the entropy level set")
    return best_val, best_b


def _minimize_entropy_at_least(a: Spectrum, R: float) -> tuple[float, np.ndarray]:
    """min D(b||a) s.t. H(b) >= R: a convex program, solved by SLSQP on the simplex."""
    la = a.log_values
    d = a.d
    floor = 1e-300

    def obj(b):
        return float(np.dot(b, np.log(np.maximum(b, floor)) - la))

    def obj_grad(b):
        return np.log(np.maximum(b, floor)) - la + 1.0

    def con(b):
        return -float(np.dot(b, np.log(np.maximum(b, floor)))) - R

    def con_grad(b):
        return -np.log(np.maximum(b, floor)) - 1.0

    ones = np.ones(d)
    cons = [
        {"type": "eq", "fun": lambda b: np.sum(b) - 1.0, "jac": lambda b: ones},
        {"type": "ineq", "fun": con, "jac": con_grad},
    ]
    # the uniform distribution is strictly feasible for R < ln d
    res = minimize(obj, np.full(d, 1.0 / d), jac=obj_grad, method="SLSQP",
                   bounds=[(0.0, 1.0)] * d, constraints=cons,
                   options={"ftol": 1e-14, "maxiter": 300})
    b = np.clip(res.x, 0.0, None)
    return _pick_best(a, R, [b / b.sum()])


def _minimize_entropy_at_most(a: Spectrum, R: float) -> tuple[float, np.ndarray]:
    """min D(b||a) s.t. H(b) <= R, for H(a) > R, by SLSQP in log coordinates.

    The constraint binds, so this is a search over the level set H(b) = R with
    b = softmax(0, z_2, ..., z_d); vanishing components stay well conditioned.
    D(b||a) = -H(b) - <b, ln a> and H is permutation invariant, so by the
    rearrangement inequality the minimizer is ordered like a, which removes the
    spurious local minima near the other vertices: z_i >= z_{i+1}, z_2 <= 0.
    """
    la = a.log_values
    d = a.d

    cache = {}

    def unpack(z):
        key = z.tobytes()
        if key not in cache:
            full = np.concatenate([[0.0], z])
            m = full.max()
            log_b = full - (m + math.log(np.exp(full - m).sum()))
            cache.clear()
            cache[key] = (log_b, np.exp(log_b))
        return cache[key]

    def chain(b, grad_b):
        return (b * (grad_b - np.dot(b, grad_b)))[1:]

    def obj(z):
        log_b, b = unpack(z)
        return float(np.dot(b, log_b - la))

    def obj_grad(z):
        log_b, b = unpack(z)
        return chain(b, log_b - la + 1.0)

    def con(z):
        log_b, b = unpack(z)
        return -float(np.dot(b, log_b)) - R

    def con_grad(z):
        log_b, b = unpack(z)
        return chain(b, -log_b - 1.0)

    cons = [{"type": "eq", "fun": con, "jac": con_grad}]
    if d > 2:
        order = np.zeros((d - 2, d - 1))
        for i in range(d - 2):
            order[i, i], order[i, i + 1] = 1.0, -1.0
        cons.append({"type": "ineq", "fun": lambda z: order @ z, "jac": lambda z: order})

    approx = []
    # the point on the segment from a to the top vertex with H = R is feasible
    # and avoids the vanishing constraint gradient at near-uniform a
    on_level = _restore_entropy(a.values, R)
    for b0 in (on_level, a.values, 0.9 * np.eye(d)[0] + 0.1 * a.values):
        if b0 is None or np.any(b0 <= 0):
            continue
        z0 = np.log(b0[1:]) - np.log(b0[0])
        res = minimize(obj, z0, jac=obj_grad, method="SLSQP", bounds=[(-700.0, 0.0)] * (d - 1),
                       constraints=cons, options={"ftol": 1e-9, "maxiter": 200})
        approx.append(unpack(res.x)[1])
    return _pick_best(a, R, approx)


def _kkt_polish(b: np.ndarray, la: np.ndarray, R: float, iters: int = 30) -> np.ndarray | None:
    """Newton iterations on the Lagrange conditions of min D(b||a) s.t. sum b = 1, H(b) = R.

    Works in w = ln b, where stationarity reads (1 + mu)(w_i + 1) - ln a_i - nu = 0.
    Returns None if the iteration does not settle on the level set.
    """
    if np.any(b <= 0):
        return None
    # multiplier guesses weighted towards the large components, or uniformly
    # (which resolves the tiny ones when b is nearly a vertex)
    for weights in (np.sqrt(b), np.ones(b.size)):
        out = _kkt_newton(np.log(b), la, R, weights, iters)
        if out is not None:
            return out
    return None


def _kkt_newton(w: np.ndarray, la: np.ndarray, R: float, weights: np.ndarray, iters: int):
    d = w.size
    X = np.column_stack([w + 1.0, -np.ones(d)]) * weights[:, None]
    (mu, nu), *_ = np.linalg.lstsq(X, (la - (w + 1.0)) * weights, rcond=None)
    if not np.isfinite(mu) or abs(1 + mu) < 1e-300:
        return None
    # with the multipliers fixed, stationarity is linear in w
    w = (la + nu) / (1 + mu) - 1.0

    def residual(w, mu, nu):
        e = np.exp(np.minimum(w, 50.0))
        return np.concatenate([(1 + mu) * (w + 1) - la - nu, [e.sum() - 1.0, -np.dot(e, w) - R]])

    with np.errstate(all="ignore"):
        for _ in range(iters):
            F = residual(w, mu, nu)
            if not np.all(np.isfinite(F)):
                return None
            if np.max(np.abs(F)) < 1e-15:
                break
            e = np.exp(np.minimum(w, 50.0))
            J = np.zeros((d + 2, d + 2))
            J[:d, :d] = (1 + mu) * np.eye(d)
            J[:d, d] = w + 1
            J[:d, d + 1] = -1.0
            J[d, :d] = e
            J[d + 1, :d] = -e * (w + 1)
            try:
                step = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                return None
            norm0 = np.linalg.norm(F)
            t = 1.0
            while True:
                trial = (w + t * step[:d], mu + t * step[d], nu + t * step[d + 1])
                if np.linalg.norm(residual(*trial)) < norm0 or t < 1e-6:
                    break
                t *= 0.5
            w, mu, nu = trial
        out = np.exp(w)
        out = out / out.sum()
    if not np.all(np.isfinite(out)) or abs(entropy(out) - R) > 1e-12:
        return None
    return out


def _restore_entropy(b: np.ndarray, R: float) -> np.ndarray | None:
    """Move b onto the surface H(b) = R without changing its support.

    Mixes b with the uniform distribution on its support (raising H) or with
    the point mass on its largest coordinate (lowering H) and solves for the
    mixing weight. Returns None when R is out of reach.
    """
    h = entropy(b)
    if abs(h - R) <= 1e-15:
        return b
    support = b > 0
    if h < R:
        m = int(support.sum())
        if math.log(m) < R:
            return None
        target = np.where(support, 1.0 / m, 0.0)
    else:
        target = np.zeros(b.size)
        target[int(np.argmax(b))] = 1.0
    def gap(t):
        mix = (1 - t) * b + t * target
        return -float(np.sum(xlogy(mix, mix))) - R

    end = gap(1.0)
    if end == 0.0 or (end > 0) == (h > R):
        # R equals the target's entropy up to rounding
        return target if abs(end) <= 1e-12 else None
    t = brentq(gap, 0.0, 1.0, xtol=1e-17, rtol=4 * np.finfo(float).eps, maxiter=200)
    return (1 - t) * b + t * target


def _divergence_form(a: Spectrum, R: float, fidelity: bool) -> ExponentResult:
    reg = regime(a, R)
    H = entropy(a)
    if (not fidelity and H >= R) or (fidelity and H <= R):
        return ExponentResult(0.0, Characterization.DIVERGENCE_FORM, reg, a.values.copy())
    if fidelity and R == 0.0:
        # H(b) <= 0 only for point masses
        vals = -a.log_values
        b = np.eye(a.d)[int(np.argmin(vals))]
        return ExponentResult(float(vals.min()), Characterization.DIVERGENCE_FORM, reg, b)
    solve = _minimize_entropy_at_most if fidelity else _minimize_entropy_at_least
    val, b = solve(a, R)
    return ExponentResult(val, Characterization.DIVERGENCE_FORM, reg, b)


def _closed_form(a: Spectrum, R: float, fidelity: bool) -> ExponentResult:
    reg = regime(a, R)
    tf = Characterization.TILTED_CLOSED_FORM
    if not fidelity:
        if reg != Regime.R_BETWEEN_H_AND_LOGD:
            return ExponentResult(0.0, tf, reg, a.values.copy(), tilt=1.0)
    else:
        if reg == Regime.R_BETWEEN_H_AND_LOGD:
            return ExponentResult(0.0, tf, reg, a.values.copy(), tilt=1.0)
        if reg == Regime.R_BELOW_LOGK:
            b = _top_block_distribution(a, R)
            return ExponentResult(-a.log_values[0] - R, tf, reg, b, tilt=math.inf)
    s = _tilt_for_rate(a, R)
    S = -psi_derivatives(a, s)[0]
    # S - R rewritten as (1 - s) S - psi(s) (using R = s S + psi(s)): evaluated at
    # the solved tilt it is D(tilted || a) >= 0 and avoids cancelling S against R
    value = max(0.0, (1.0 - s) * S - renyi_psi(a, s))
    return ExponentResult(value, tf, reg, tilted(a, s).values.copy(), tilt=s)


def _top_block_distribution(a: Spectrum, R: float) -> np.ndarray:
    """A distribution on the top-k eigenvectors with entropy exactly R <= ln k."""
    k = top_multiplicity(a)
    b = np.zeros(a.d)
    if k == 1 or R <= 0.0:
        b[0] = 1.0
        return b

    def c_of(t):
        rest = (1.0 - t) / (k - 1)
        return np.concatenate([[t], np.full(k - 1, rest)])

    # H(c_of(t)) falls from ln k at t = 1/k to 0 at t = 1
    lo, hi = 1.0 / k, 1.0
    for _ in range(BISECTION_MAXITER):
        mid = 0.5 * (lo + hi)
        if entropy(c_of(mid)) > R:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15:
            break
    b[:k] = c_of(0.5 * (lo + hi))
    return b


_SOLVERS = {
    Characterization.PSI_FORM: _psi_form,
    Characterization.DIVERGENCE_FORM: _divergence_form,
    Characterization.TILTED_CLOSED_FORM: _closed_form,
}


def error_exponent(a: Spectrum, R: float,
                   method: Characterization | str = Characterization.TILTED_CLOSED_FORM) -> ExponentResult:
    """Optimal exponent of the average error at rate R (nats), for 0 <= R < ln d."""
    _check_rate(a, R)
    return _SOLVERS[Characterization(method)](a, R, False)


def fidelity_exponent(a: Spectrum, R: float,
                      method: Characterization | str = Characterization.TILTED_CLOSED_FORM) -> ExponentResult:
    """Optimal exponent of the average fidelity (1 - error) at rate R, for 0 <= R < ln d."""
    _check_rate(a, R)
    return _SOLVERS[Characterization(method)](a, R, True)


def all_characterizations(a: Spectrum, R: float, fidelity: bool = False) -> dict[str, ExponentResult]:
    fn = fidelity_exponent if fidelity else error_exponent
    return {c.value: fn(a, R, c) for c in Characterization}


def divergence_minimizer(a: Spectrum, R: float, direction: Direction | str) -> np.ndarray:
    """Distribution b* attaining min D(b||a) under the given entropy constraint."""
    _check_rate(a, R)
    fidelity = Direction(direction) == Direction.H_AT_MOST_R
    return np.asarray(_closed_form(a, R, fidelity).optimizer)


def min_divergence_entropy_at_least(a: Spectrum, R: float) -> float:
    """min D(b||a) over H(b) >= R for any real R; +inf when the set is empty."""
    ln_d = math.log(a.d)
    if R <= entropy(a):
        return 0.0
    if R > ln_d + 1e-15:
        return math.inf
    if R >= ln_d:
        return kl_divergence(np.full(a.d, 1.0 / a.d), a)
    return error_exponent(a, R).value


def eta(a: Spectrum, S: float) -> float:
    """Exponent of Tr rho^n {rho^n <= e^{-nS}}, the i.i.d. tail of -ln a.

    Zero below the entropy, (1 - s(S)) S - psi(s(S)) up to -psi'(0), and held at
    its boundary value beyond (where only a lower bound is established).
    """
    H = entropy(a)
    if S < H or is_degenerate(a):
        return 0.0
    upper = -psi_derivatives(a, 0.0)[0]
    S_eff = min(S, upper)
    s = s_of_S(a, S_eff)
    return max(0.0, (1.0 - s) * S_eff - renyi_psi(a, s))
