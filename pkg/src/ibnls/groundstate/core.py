"""Problem and solution types shared by the ground-state solvers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..discretization import Field
from ..discretization import functionals as fn
from ..errors import HypothesisError
from ..params import ModelParams, as_float, derive_exponents, validate_hypotheses

TAIL_FLAG = 1e-8
VARIANTS = ("general_p", "p_equals_2", "p_equals_sigma_c", "hsc_variant")


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 2000
    tol: float = 1e-15          # relative J decrease regarded as stagnation
    patience: int = 5
    grad_tol: float = 1e-10     # preconditioned gradient norm regarded as converged
    step0: float = 1.0
    step_floor: float = 1e-12
    seed_profile: str = "gaussian"
    seed_width: float = 1.0
    n_seeds: int = 1
    rng_seed: int = 0
    petviashvili_tol: float = 1e-13


@dataclass(frozen=True)
class GroundStateProblem:
    params: ModelParams
    grid: object
    variant: str = "general_p"
    options: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        P = self.params
        exps = derive_exponents(P)
        if self.variant == "p_equals_2":
            if P.p is not None and float(P.p) != 2.0:
                raise ValueError("p_equals_2 variant with p != 2")
            object.__setattr__(self, "params", P.with_p(2))
        elif self.variant == "p_equals_sigma_c":
            object.__setattr__(self, "params", P.with_p(exps.sigma_c))
        elif self.variant == "general_p" and P.p is None:
            raise ValueError("general_p variant needs p")
        theorem = "GNUsc" if self.variant == "hsc_variant" else "GNU"
        rep = validate_hypotheses(self.params, theorem)
        if not rep.all_satisfied:
            raise HypothesisError(rep)
        if self.grid.dim != P.N:
            raise ValueError(f"grid dimension {self.grid.dim} != N = {P.N}")

    @property
    def exponents(self):
        return derive_exponents(self.params)

    @property
    def sigma(self) -> float:
        return float(self.params.sigma)

    @property
    def b(self) -> float:
        return float(self.params.b)

    @property
    def p(self) -> float:
        return float(self.params.p) if self.params.p is not None else 2.0

    @property
    def s_c(self) -> float:
        return as_float(self.exponents.s_c)


@dataclass
class PohozaevReport:
    res_l6: float
    res_l5: float
    res_h1sc: float
    res_epsc: float
    coefficient_h1sc: float = float("nan")

    def as_dict(self):
        return {"res_l6": self.res_l6, "res_l5": self.res_l5, "res_h1sc": self.res_h1sc,
                "res_epsc": self.res_epsc, "coefficient_h1sc": self.coefficient_h1sc}

    @property
    def max_residual(self):
        return max(self.res_l6, self.res_l5, self.res_h1sc, self.res_epsc)


@dataclass
class GroundStateSolution:
    V: Field
    J_value: float
    K_opt: float
    residual: float
    pohozaev: Optional[PohozaevReport]
    norms: dict
    variant: str
    method: str
    iterations: int = 0
    extras: dict = field(default_factory=dict)
    params: Optional[ModelParams] = None

    def summary(self):
        out = {
            "variant": self.variant,
            "method": self.method,
            "J_value": self.J_value,
            "K_opt": self.K_opt,
            "residual": self.residual,
            "iterations": self.iterations,
            "norms": dict(self.norms),
            "grid": self.V.grid.describe(),
        }
        if self.params is not None:
            out["params"] = self.params.as_dict()
        if self.pohozaev is not None:
            out["pohozaev"] = self.pohozaev.as_dict()
        for k, v in self.extras.items():
            out[k] = v
        return out


# ---------------------------------------------------------------------------
# equation pieces


def nonlinear_term(grid, values, sigma, b):
    """|x|^{-b}|v|^{2σ}v with the quadrature-consistent weight."""
    rho = grid.effective_weight(b)
    return rho * np.abs(values) ** (2 * sigma) * values


def linear_symbol(grid, variant, s_c):
    """Symbol of the linear preconditioner: μ² + 1, or μ² + μ^{s_c} for the Ḣ^{s_c} variant."""
    mu = grid.symbol
    if variant == "hsc_variant":
        return mu ** 2 + mu ** s_c
    return mu ** 2 + 1.0


def equation_residual(V: Field, problem: GroundStateProblem):
    """Preconditioned relative residual of the elliptic equation solved by V.

    For the L^p variants the equation is Δ²V + |V|^{p-2}V = |x|^{-b}|V|^{2σ}V,
    for the Ḣ^{s_c} variant Δ²W + (-Δ)^{s_c}W = |x|^{-b}|W|^{2σ}W.  Returns
    (preconditioned, raw) where preconditioned = ||P^{-1}(lhs - rhs)|| / ||V||
    with P the linear part (Δ² + 1, resp. Δ² + (-Δ)^{s_c}) and raw =
    ||lhs - rhs|| / ||lhs||.
    """
    g = V.grid
    v = V.values
    c = V.spectral
    mu = g.symbol
    if problem.variant == "hsc_variant":
        lin_c = (mu ** 2 + mu ** problem.s_c) * c
        lin_extra = 0.0
    else:
        lin_c = mu ** 2 * c
        lin_extra = np.abs(v) ** (problem.p - 2) * v
    nl = nonlinear_term(g, v, problem.sigma, problem.b)
    lhs = g.inverse(lin_c) + lin_extra
    diff = lhs - nl
    if np.isrealobj(v):
        lhs, diff = lhs.real, diff.real
    pre = g.inverse(g.forward(diff) / linear_symbol(g, problem.variant, problem.s_c))
    nv = np.sqrt(fn.mass(V))
    pre_res = np.sqrt(np.sum(g.weights * np.abs(pre) ** 2)) / nv
    raw = np.sqrt(np.sum(g.weights * np.abs(diff) ** 2) / np.sum(g.weights * np.abs(lhs) ** 2))
    return float(pre_res), float(raw)


def collect_norms(V: Field, problem: GroundStateProblem) -> dict:
    exps = problem.exponents
    sig = problem.sigma
    sc = as_float(exps.s_c)
    out = {
        "L2": fn.lp_norm(V, 2),
        "Lp": fn.lp_norm(V, problem.p),
        "Lsigma_c": fn.lp_norm(V, as_float(exps.sigma_c)),
        "H2": fn.hdot_norm(V, 2),
        "L2sigma2_b": fn.lpb_norm(V, 2 * sig + 2, problem.b),
        "tail_fraction": fn.tail_fraction(V),
    }
    out["Hsc"] = fn.hdot_norm(V, sc) if sc >= 0 else float("nan")
    # truncation monitor: the decay rate is not known a priori (p = σ_c has no mass term)
    out["tail_flag"] = out["tail_fraction"] > TAIL_FLAG
    out["sign_changes"] = sign_changes(V)
    return out


def sign_changes(V: Field) -> int:
    """Sign changes of the real part along increasing radius, ignoring roundoff-level samples."""
    r = V.grid.radius.ravel()
    v = np.real(V.values).ravel()[np.argsort(r, kind="stable")]
    v = v[np.abs(v) > 1e-12 * np.max(np.abs(v))] if v.size else v
    return int(np.count_nonzero(np.diff(np.sign(v)))) if v.size else 0


def profile_distance(A: Field, B: Field) -> float:
    """Relative L² distance ||B - A|| / ||A|| with B sampled on A's grid.

    Profiles from the Weinstein path live on a relabelled grid; radial grids
    resample through their own interpolant, Cartesian grids must coincide.
    """
    if B.grid != A.grid:
        if A.grid.kind != "radial" or B.grid.kind != "radial":
            raise ValueError("only radial profiles can be compared across grids")
        B = Field(A.grid, B.grid.interpolate(B.values, A.grid.r))
    d = Field(A.grid, B.values - A.values)
    return float(np.sqrt(fn.mass(d) / fn.mass(A)))


def seed_field(grid, profile: str = "gaussian", width: float = 1.0, rng=None, jitter: float = 0.0):
    """Radially symmetric starting profile, optionally with a smooth random modulation."""
    r = grid.radius
    x = r / width
    if profile == "gaussian":
        v = np.exp(-0.5 * x * x)
    elif profile == "sech":
        v = 1.0 / np.cosh(x)
    elif profile == "gauss_poly":
        v = (1.0 + 0.5 * x * x) * np.exp(-0.5 * x * x)
    elif profile == "exp":
        v = (1.0 + x) * np.exp(-x)
    else:
        raise ValueError(f"unknown seed profile {profile!r}")
    if jitter and rng is not None:
        a = rng.normal(size=3)
        v = v * (1.0 + jitter * sum(a[k] * np.exp(-0.5 * (x / (k + 1.5)) ** 2) for k in range(3)))
    return Field(grid, v.astype(float))
