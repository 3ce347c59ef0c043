"""Probability spectra of density operators and the entropic functionals on them.

All logarithms are natural, so every entropy, divergence and exponent is in nats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import xlogy

NORMALIZATION_TOL = 1e-12
TIE_RTOL = 1e-12
SUPPORT_CUTOFF = 1e-12


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues a_1 >= ... >= a_d > 0 of a density operator, summing to one.

    Input values are sorted on construction; they must already be normalized.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float).ravel())[::-1]
        if v.size == 0:
            raise ValueError("spectrum must be non-empty")
        if not np.all(np.isfinite(v)) or v[-1] <= 0.0:
            raise ValueError("spectrum values must be finite and strictly positive")
        if abs(v.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"spectrum sums to {float(v.sum())!r}, not 1")
        v.flags.writeable = False
        log_v = np.log(v)
        log_v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_log_values", log_v)

    @classmethod
    def uniform(cls, d: int) -> "Spectrum":
        return cls(np.full(d, 1.0 / d))

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> "Spectrum":
        """Normalize arbitrary positive weights into a spectrum."""
        w = np.asarray(weights, dtype=float)
        return cls(w / w.sum())

    @property
    def d(self) -> int:
        return int(self.values.size)

    @property
    def log_values(self) -> np.ndarray:
        return self._log_values

    def as_tuple(self) -> tuple:
        return tuple(float(x) for x in self.values)

    def __len__(self):
        return self.d

    def __eq__(self, other):
        if not isinstance(other, Spectrum):
            return NotImplemented
        return self.d == other.d and bool(np.all(self.values == other.values))

    def __hash__(self):
        return hash(self.as_tuple())

    def __repr__(self):
        return f"Spectrum({list(self.as_tuple())})"


@dataclass(frozen=True)
class PureSource:
    """Ensemble of pure states |phi_i> emitted with probabilities p_i."""

    states: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=complex))
        probs = np.asarray(self.probs, dtype=float).ravel()
        if states.shape[0] != probs.size:
            raise ValueError("need one probability per state")
        norms = np.linalg.norm(states, axis=1)
        if np.any(np.abs(norms - 1.0) > NORMALIZATION_TOL):
            raise ValueError("states must be unit vectors")
        if np.any(probs <= 0.0) or abs(probs.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValueError("probabilities must be positive and sum to 1")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "probs", probs)

    @property
    def dim(self) -> int:
        return int(self.states.shape[1])

    @property
    def size(self) -> int:
        return int(self.states.shape[0])

    def average_state(self) -> np.ndarray:
        """rho_bar = sum_i p_i |phi_i><phi_i|."""
        return np.einsum("i,ij,ik->jk", self.probs, self.states, self.states.conj())


def logsumexp(x: np.ndarray) -> float:
    """ln sum exp(x) for a 1-D array; cheaper than the scipy version on short inputs."""
    m = float(np.max(x))
    if m == -np.inf:
        return -np.inf
    return m + math.log(float(np.sum(np.exp(x - m))))


def _as_array(a) -> np.ndarray:
    return a.values if isinstance(a, Spectrum) else np.asarray(a, dtype=float)


def entropy(s) -> float:
    """Shannon entropy -sum a ln a of a spectrum (or any probability vector)."""
    v = _as_array(s)
    return float(-np.sum(xlogy(v, v)))


def kl_divergence(b, a) -> float:
    """D(b||a) = sum b_i ln(b_i / a_i), with 0 ln 0 = 0."""
    b = _as_array(b)
    a = _as_array(a)
    if b.shape != a.shape:
        raise ValueError("b and a must have the same length")
    if np.any((b > 0) & (a <= 0)):
        raise ValueError("divergence is infinite: b not absolutely continuous w.r.t. a")
    mask = b > 0
    return float(np.sum(b[mask] * (np.log(b[mask]) - np.log(a[mask]))))


def renyi_psi(a: Spectrum, s: float) -> float:
    """psi(s) = ln sum_i a_i^s; exactly 0 at s = 1."""
    if s == 1.0:
        return 0.0
    return float(logsumexp(s * a.log_values))


def psi_derivatives(a: Spectrum, s: float) -> tuple[float, float]:
    """First and second derivatives of psi at s.

    psi'(s) is the mean of ln a_i under the tilted weights a_i^s / sum a^s and
    psi''(s) is the corresponding variance, hence non-negative.
    """
    w = tilted_weights(a, s)
    la = a.log_values
    mean = float(np.dot(w, la))
    var = float(np.dot(w, (la - mean) ** 2))
    return mean, var


def tilted_weights(a: Spectrum, s: float) -> np.ndarray:
    x = s * a.log_values
    x = x - x.max()
    w = np.exp(x)
    return w / w.sum()


def tilted(a: Spectrum, s: float) -> Spectrum:
    """The normalized power a^s / sum a^s.

    Components may underflow to zero for very large s; those are floored at
    the smallest positive float so the result is still a valid Spectrum.
    """
    if s < 0:
        raise ValueError("tilt parameter must be non-negative")
    if s == 1.0:
        return a
    w = np.maximum(tilted_weights(a, s), np.finfo(float).tiny)
    return Spectrum(w / w.sum())


def tilted_entropy(a: Spectrum, s: float) -> float:
    """H of the tilted distribution, computed without forming a Spectrum.

    Equal to psi(s) - s psi'(s); evaluated with exponents shifted by the top
    eigenvalue so that large s does not cancel catastrophically.
    """
    x = s * (a.log_values - a.log_values[0])
    log_z = float(logsumexp(x))
    w = np.exp(x - log_z)
    return log_z - float(np.dot(w, x))


def top_multiplicity(a: Spectrum) -> int:
    """Number of eigenvalues tied with the largest one."""
    v = a.values
    return int(np.sum(np.abs(v - v[0]) <= TIE_RTOL * v[0]))


def is_degenerate(a: Spectrum) -> bool:
    """True when all eigenvalues coincide (uniform spectrum)."""
    return top_multiplicity(a) == a.d


def spectrum_from_source(src: PureSource) -> Spectrum:
    """Eigenvalues of the average state, descending, with the null space removed."""
    rho = src.average_state()
    evals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    evals = evals[evals > SUPPORT_CUTOFF]
    return Spectrum(evals / evals.sum())
