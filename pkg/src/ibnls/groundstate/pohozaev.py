"""Pohozaev-type identities as convergence certificates."""
from __future__ import annotations

import numpy as np

from ..discretization import Field
from ..discretization import functionals as fn
from .core import GroundStateProblem, PohozaevReport


def relative_gap(lhs: float, rhs: float) -> float:
    scale = max(abs(lhs), abs(rhs))
    return 0.0 if scale == 0 else abs(lhs - rhs) / scale


def h1sc_coefficient(N, sigma, b, p, s_c) -> float:
    """||Δφ||² / ∫|φ|^p for solutions of Δ²φ + |φ|^{p-2}φ = |x|^{-b}|φ|^{2σ}φ."""
    return (N * (2 * sigma + 2) - (N - b) * p) / (2 * sigma * p * (2 - s_c))


def pohozaev_check(V: Field, problem: GroundStateProblem) -> PohozaevReport:
    """Relative residuals of the four identities, computed by quadrature.

    For the Ḣ^{s_c} problem the L^p term is replaced by S = ||W||²_{Ḣ^{s_c}}
    with scaling weight N/2 - s_c in place of N/p.
    """
    N = problem.params.N
    sig, b = problem.sigma, problem.b
    s_c = problem.s_c
    D = fn.hdot_sq(V, 2)
    B = fn.lpb_integral(V, 2 * sig + 2, b)
    k = (N - b) / (2 * sig + 2)
    if problem.variant == "hsc_variant":
        X = fn.hdot_sq(V, s_c)
        nx = N / 2 - s_c
        coef = (nx - k) / (k - N / 2 + 2)
    else:
        p = problem.p
        X = fn.integrate(V, np.abs(V.values) ** p)
        nx = N / p
        coef = h1sc_coefficient(N, sig, b, p, s_c)
    return PohozaevReport(
        res_l6=relative_gap(B, D + X),
        res_l5=relative_gap(k * B, (N / 2 - 2) * D + nx * X),
        res_h1sc=relative_gap(D, coef * X),
        res_epsc=relative_gap(B, (coef + 1) * X),
        coefficient_h1sc=coef,
    )
