"""Sharp Gagliardo-Nirenberg constants and the inequality sweep."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..discretization import Field
from ..discretization import functionals as fn
from ..errors import ConsistencyError
from ..params import as_float, gn_powers
from .core import GroundStateProblem, GroundStateSolution


def kopt_general(problem: GroundStateProblem, vp_norm: float) -> float:
    """K_opt expressed through ||V||_p (valid for every admissible p)."""
    exps = problem.exponents
    sig, b, p = problem.sigma, problem.b, problem.p
    sc, sp = as_float(exps.s_c), as_float(exps.s_p)
    sgc = as_float(exps.sigma_c)
    d = sig * (sc - sp) + (2 - sp)
    first = (d / (sig * (2 - sc))) ** ((4 - b) * (p - sgc) / (2 * p * (2 - sp)))
    second = (sig + 1) * (2 - sp) / d
    return first * second * vp_norm ** (-(8 * sig - (p - 2) * (4 - b)) / (4 - 2 * sp))


def kopt_mass(problem: GroundStateProblem, q_l2: float) -> float:
    """p = 2 form through ||Q||_2 (the form used in the H² global-existence argument)."""
    sig, sc = problem.sigma, problem.s_c
    return ((sig * (2 - sc) / (sig * sc + 2)) ** (sig * sc / 2)
            * (2 * sig + 2) / (sig * sc + 2) * q_l2 ** (-2 * sig))


def kopt_mass_printed(problem: GroundStateProblem, q_l2: float) -> float:
    """The p = 2 corollary constant exactly as printed; recorded, never asserted.

    It differs from ``kopt_mass`` by the factor σ(2 - s_c), see the ledger.
    """
    N, sig, b = problem.params.N, problem.sigma, problem.b
    return ((N * sig + b) / (4 - b - sig * (N - 4))) ** ((-b - N * sig) / 4) * (2 * sig + 2) / q_l2 ** (2 * sig)


def kopt_critical(problem: GroundStateProblem, v_sigc: float) -> float:
    """p = σ_c form: (σ+1)/||V||_{σ_c}^{2σ}."""
    return (problem.sigma + 1) / v_sigc ** (2 * problem.sigma)


def kopt_forms(solution: GroundStateSolution, problem: GroundStateProblem) -> dict:
    """All closed forms of K_opt that apply to this problem (asserted ones first)."""
    V = solution.V
    sig = problem.sigma
    out = {"inverse_J": 1.0 / solution.J_value}
    info = {}
    if problem.variant == "hsc_variant":
        out["hsc"] = (sig + 1) / fn.hdot_norm(V, problem.s_c) ** (2 * sig)
        return out | {"_info": info}
    p = problem.p
    out["general"] = kopt_general(problem, fn.lp_norm(V, p))
    sgc = as_float(problem.exponents.sigma_c)
    if abs(p - 2) < 1e-14:
        out["p2"] = kopt_mass(problem, fn.lp_norm(V, 2))
        info["p2_printed"] = kopt_mass_printed(problem, fn.lp_norm(V, 2))
    if abs(p - sgc) < 1e-12:
        out["sigma_c"] = kopt_critical(problem, fn.lp_norm(V, sgc))
    return out | {"_info": info}


def compute_kopt(solution: GroundStateSolution, problem: GroundStateProblem,
                 tol: float = 1e-10) -> float:
    """K_opt from the general formula, cross-checked against every specialization and 1/J."""
    forms = kopt_forms(solution, problem)
    info = forms.pop("_info")
    main = forms["hsc"] if problem.variant == "hsc_variant" else forms["general"]
    solution.extras["kopt_forms"] = dict(forms)
    if info:
        solution.extras["kopt_not_asserted"] = info
    for name, val in forms.items():
        if abs(val - main) > tol * abs(main):
            raise ConsistencyError(
                f"K_opt forms disagree: {name} = {val!r} vs {main!r} "
                f"(relative {abs(val - main) / abs(main):.2e})")
    return main


# ---------------------------------------------------------------------------
# inequality sweep


def gn_ratio(f: Field, K: float, problem: GroundStateProblem) -> float:
    """∫|x|^{-b}|f|^{2σ+2} divided by the right-hand side of the sharp inequality."""
    sig, b = problem.sigma, problem.b
    B = fn.lpb_integral(f, 2 * sig + 2, b)
    D = fn.hdot_sq(f, 2)
    if problem.variant == "hsc_variant":
        rhs = K * D * fn.hdot_sq(f, problem.s_c) ** sig
    else:
        a, c = (float(x) for x in gn_powers(problem.params, problem.exponents))
        rhs = K * D ** (a / 2) * fn.lp_norm(f, problem.p) ** c
    return B / rhs


@dataclass
class GNReport:
    ratios: list
    max_ratio: float
    argmax: int
    ratio_at_V: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1 + self.tolerance and abs(self.ratio_at_V - 1) <= self.tolerance

    def as_dict(self):
        return {"max_ratio": self.max_ratio, "argmax": self.argmax,
                "ratio_at_V": self.ratio_at_V, "passed": self.passed, "n": len(self.ratios)}


def gn_verify(solution: GroundStateSolution, test_family, problem: GroundStateProblem,
              tol: float = 1e-3) -> GNReport:
    fams = list(test_family)
    if not fams:
        raise ValueError("empty test family")
    K = solution.K_opt
    ratios = [gn_ratio(f, K, problem) for f in fams]
    k = int(np.argmax(ratios))
    return GNReport(ratios, float(ratios[k]), k, gn_ratio(solution.V, K, problem), tol)


def characteristic_length(V: Field) -> float:
    """Radius where |V| first drops below half its maximum."""
    r = V.grid.radius.ravel()
    a = np.abs(V.values).ravel()
    order = np.argsort(r, kind="stable")
    r, a = r[order], a[order]
    below = np.nonzero(a < 0.5 * a.max())[0]
    return float(r[below[0]]) if below.size else float(r[-1])


def default_test_family(V: Field, n_widths: int = 10, rng=None):
    """Smooth radial test functions at widths spread around the scale of V.

    Five profile shapes (Gaussian, sech, sech², a Gaussian times a quadratic,
    and a sign-changing Gaussian) at ``n_widths`` widths, plus small random
    perturbations of V when an ``rng`` is supplied.
    """
    ell = characteristic_length(V)
    r = V.grid.radius
    shapes = [
        lambda x: np.exp(-x * x),
        lambda x: 1.0 / np.cosh(x),
        lambda x: 1.0 / np.cosh(x) ** 2,
        lambda x: (1 + x * x) * np.exp(-x * x),
        lambda x: (1 - 2 * x * x / 3) * np.exp(-x * x),
    ]
    out = []
    for w in np.geomspace(0.4 * ell, 2.5 * ell, n_widths):
        for s in shapes:
            out.append(Field(V.grid, s(r / w)))
    if rng is not None:
        for _ in range(5):
            eps = 0.05 * rng.standard_normal()
            w = ell * (0.5 + rng.random())
            out.append(Field(V.grid, V.values + eps * np.max(np.abs(V.values)) * np.exp(-(r / w) ** 2)))
    return out
