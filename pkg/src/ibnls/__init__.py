"""Numerical lab for the focusing inhomogeneous biharmonic NLS

    i u_t + Δ²u − |x|^{-b} |u|^{2σ} u = 0.
"""
__version__ = "0.1.0"

from .params import (
    INF, ModelParams, Regime, check_admissible_pair, classify_regime, derive_exponents,
    validate_hypotheses,
)
