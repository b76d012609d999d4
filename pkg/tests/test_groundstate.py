import numpy as np
import pytest

from ibnls.discretization import CartesianGrid, Field, RadialGrid
from ibnls.discretization import functionals as fn
from ibnls.errors import HypothesisError
from ibnls.groundstate import (
    GroundStateProblem, Quotient, alpha_beta, default_test_family, equation_residual, gn_verify,
    kopt_mass_printed, minimize_weinstein, pohozaev_check, profile_distance, seed_field, sign_changes, solve, solve_p2,
    solve_weinstein,
)
from ibnls.params import ModelParams


def test_petviashvili_converges(q_small):
    prob, Q = q_small
    assert Q.method.startswith("petviashvili")
    assert Q.residual <= 1e-8
    assert equation_residual(Q.V, prob)[0] == pytest.approx(Q.residual, rel=1e-6, abs=1e-14)
    assert Q.pohozaev.max_residual <= 1e-3
    v = Q.V.values
    # peaked at the origin; fourth-order ground states have small oscillating tails
    assert np.argmax(np.abs(v)) == 0 and v[0] > 0
    assert np.min(v) > -0.05 * v[0]
    assert Q.norms["tail_fraction"] < 1e-6


def test_pohozaev_identities(q_small):
    prob, Q = q_small
    rep = pohozaev_check(Q.V, prob)
    for k, v in rep.as_dict().items():
        if k.startswith("res_"):
            assert v <= 1e-6, k
    # a Gaussian is not a solution: the identities detect it
    g = Field(Q.V.grid, np.exp(-Q.V.grid.r ** 2))
    assert pohozaev_check(g, prob).max_residual > 1e-2


def test_kopt_forms_agree(q_small):
    prob, Q = q_small
    forms = Q.extras["kopt_forms"]
    assert set(forms) >= {"inverse_J", "general", "p2"}
    # closed forms lean on the Pohozaev identities, so they agree to that accuracy
    tol = max(1e-10, 10 * Q.pohozaev.max_residual)
    for v in forms.values():
        assert v == pytest.approx(Q.K_opt, rel=tol)


def test_printed_corollary_constant_differs_by_known_factor(q_small):
    prob, Q = q_small
    printed = kopt_mass_printed(prob, fn.lp_norm(Q.V, 2))
    sig, sc = prob.sigma, prob.s_c
    assert printed / Q.K_opt == pytest.approx(sig * (2 - sc), rel=1e-10)


def test_energy_identity(q_small):
    prob, Q = q_small
    sc = prob.s_c
    E, M = fn.energy(Q.V, prob.params), fn.mass(Q.V)
    assert E == pytest.approx(sc / (2 * (2 - sc)) * M, rel=1e-6)


def test_gn_sweep_never_exceeds_one(q_small, rng):
    prob, Q = q_small
    fam = default_test_family(Q.V, n_widths=10, rng=rng)
    assert len(fam) >= 50
    rep = gn_verify(Q, fam, prob)
    assert rep.passed
    assert rep.max_ratio <= 1 + 1e-3
    assert abs(rep.ratio_at_V - 1) <= 1e-8


def test_weinstein_agrees_with_petviashvili(q_small):
    prob, Q = q_small
    W = solve_weinstein(prob)
    assert W.residual <= 1e-6
    assert W.J_value == pytest.approx(Q.J_value, rel=1e-8)
    assert profile_distance(Q.V, W.V) <= 1e-4


def test_minimizer_normalization(q_small):
    prob, Q = q_small
    res = minimize_weinstein(prob)
    g = res.g_star
    assert fn.hdot_norm(g, 2) == pytest.approx(1.0, rel=1e-10)
    assert fn.lp_norm(g, 2) == pytest.approx(1.0, rel=1e-10)
    assert res.J_value == pytest.approx(1.0 / fn.lpb_integral(g, 4, 0.5), rel=1e-12)
    a, b, _ = alpha_beta(prob, res.J_value)
    assert a > 0 and b > 0


@pytest.mark.parametrize("variant, p", [("p_equals_2", 2), ("general_p", 3)])
def test_gradient_matches_finite_differences(variant, p, rng):
    P = ModelParams(3, 1, "1/2", p=p)
    grid = RadialGrid.from_extent(3, 256, 15.0)
    q = Quotient(GroundStateProblem(P, grid, variant))
    f = seed_field(grid, "gauss_poly", 1.3)
    grad = q.grad(f)
    h = 1e-5
    for _ in range(4):
        # random but band-limited: white noise would let the O(h²μ⁴) curvature dominate
        d = grid.inverse(rng.standard_normal(grid.shape) * np.exp(-grid.symbol ** 2))
        fd = (q.value(Field(grid, f.values + h * d)) - q.value(Field(grid, f.values - h * d))) / (2 * h)
        an = float(np.sum(grid.weights * grad * d))
        assert an == pytest.approx(fd, rel=1e-5)


def test_seed_field_profiles():
    grid = RadialGrid.from_extent(3, 64, 8.0)
    for prof in ("gaussian", "sech", "gauss_poly", "exp"):
        v = seed_field(grid, prof).values
        assert v[0] == pytest.approx(1.0, abs=0.05) and v[-1] < 1e-2
    with pytest.raises(ValueError):
        seed_field(grid, "triangle")


def test_problem_validation():
    grid = RadialGrid.from_extent(3, 64, 8.0)
    with pytest.raises(ValueError):
        GroundStateProblem(ModelParams(3, 1, 1), grid, "nonsense")
    with pytest.raises(ValueError):
        GroundStateProblem(ModelParams(3, 1, 1), grid, "general_p")  # needs p
    with pytest.raises(HypothesisError):
        GroundStateProblem(ModelParams(3, 1, 3), grid, "p_equals_2")  # b >= N
    with pytest.raises(ValueError):
        GroundStateProblem(ModelParams(5, 1, 1), grid, "p_equals_2")  # grid is 3-D
    prob = GroundStateProblem(ModelParams(3, 2, 1), grid, "p_equals_sigma_c")
    assert prob.p == 4.0


def test_mass_critical_energy_vanishes():
    P = ModelParams(3, 1, 1)
    prob = GroundStateProblem(P, RadialGrid.from_extent(3, 512, 30.0), "p_equals_2")
    Q = solve(prob)
    assert abs(fn.energy(Q.V, prob.params)) <= 1e-3 * fn.mass(Q.V)
    # K_opt = (σ+1)/||Q||^{2σ} in this case
    assert Q.K_opt == pytest.approx(2 / fn.mass(Q.V), rel=1e-8)


def test_cartesian_ground_state_matches_radial():
    P = ModelParams(3, 1, "1/2")
    rad = solve_p2(GroundStateProblem(P, RadialGrid.from_extent(3, 512, 16.0), "p_equals_2"))
    cart = solve_p2(GroundStateProblem(P, CartesianGrid(3, 32, 8.0), "p_equals_2"))
    assert cart.residual <= 1e-8
    assert cart.J_value == pytest.approx(rad.J_value, rel=1e-2)


def test_summary_is_plain_data(q_small):
    _, Q = q_small
    s = Q.summary()
    assert s["variant"] == "p_equals_2"
    assert s["params"] == {"N": 3, "sigma": 1, "b": "1/2", "p": 2}
    assert "pohozaev" in s and "grid" in s


def test_sign_changes_and_tail_monitor(q_small):
    _, Q = q_small
    assert Q.norms["sign_changes"] >= 1  # oscillating tail is recorded, not suppressed
    assert not Q.norms["tail_flag"]
    g = RadialGrid.from_extent(3, 64, 8.0)
    assert sign_changes(Field(g, np.exp(-g.r ** 2))) == 0
    assert sign_changes(Field(g, np.cos(g.r))) == 3


def test_sigma_c_ground_state_flags_slow_decay():
    P = ModelParams(3, 2, 1)
    prob = GroundStateProblem(P, RadialGrid.from_extent(3, 512, 30.0), "p_equals_sigma_c")
    V = solve(prob)
    assert V.residual <= 1e-8
    assert V.pohozaev.max_residual <= 1e-8
    # no mass term: V decays algebraically, so the box truncation is flagged
    assert V.norms["tail_flag"]
