"""Error and fidelity exponents of fixed-length quantum pure-state source coding,
with exact finite-n evaluation of the universal Schur-Weyl code."""

from .exponents import (
    Characterization,
    Direction,
    ExponentResult,
    Regime,
    S_of_R,
    divergence_minimizer,
    error_exponent,
    eta,
    fidelity_exponent,
    s_of_S,
)
from .schur_weyl import BlockData, YoungIndex, block_trace_log, enumerate_young
from .spectra import PureSource, Spectrum, entropy, kl_divergence, renyi_psi, spectrum_from_source, tilted
from .universal_code import CodeEvaluation, adjusted_rate, convergence_report, evaluate_code

__all__ = [
    "BlockData", "Characterization", "CodeEvaluation", "Direction", "ExponentResult", "PureSource",
    "Regime", "S_of_R", "Spectrum", "YoungIndex", "adjusted_rate", "block_trace_log",
    "convergence_report", "divergence_minimizer", "entropy", "enumerate_young", "error_exponent",
    "eta", "evaluate_code", "fidelity_exponent", "kl_divergence", "renyi_psi", "s_of_S",
    "spectrum_from_source", "tilted",
]
