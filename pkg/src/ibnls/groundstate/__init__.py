from .core import (
    VARIANTS, GroundStateProblem, GroundStateSolution, PohozaevReport, SolverOptions,
    collect_norms, equation_residual, nonlinear_term, profile_distance, seed_field, sign_changes,
)
from .petviashvili import petviashvili_iterate, petviashvili_p2, solve_p2
from .pohozaev import h1sc_coefficient, pohozaev_check
from .sharp import (
    GNReport, compute_kopt, default_test_family, gn_ratio, gn_verify, kopt_critical,
    kopt_forms, kopt_general, kopt_mass, kopt_mass_printed,
)
from .weinstein import (
    Quotient, WeinsteinResult, alpha_beta, hsc_ground_state, minimize_weinstein,
    rescale_minimizer, solve_weinstein,
)


def solve(problem: GroundStateProblem, method: str = "auto") -> GroundStateSolution:
    """Ground state for any variant: Petviashvili for p = 2, Weinstein descent otherwise."""
    if method == "auto":
        if problem.variant == "hsc_variant":
            return hsc_ground_state(problem)
        method = "petviashvili" if problem.variant == "p_equals_2" else "weinstein"
    if method == "petviashvili":
        return solve_p2(problem)
    if method == "weinstein":
        return solve_weinstein(problem)
    raise ValueError(f"unknown method {method!r}")
