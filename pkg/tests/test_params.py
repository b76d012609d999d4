from fractions import Fraction

import pytest

from ibnls.errors import DomainError
from ibnls.params import (
    INF, THEOREMS, Admissibility, ModelParams, Regime, check_admissible_pair,
    classify_regime, derive_exponents, gn_powers, validate_hypotheses,
)


def test_exponents_n5():
    e = derive_exponents(ModelParams(5, 1, 1))
    assert e.s_c == 1
    assert e.sigma_c == Fraction(10, 3)
    assert e.four_star == 3
    assert e.two_star == 10
    assert isinstance(e.s_c, Fraction)


def test_exponents_mass_critical_n3():
    e = derive_exponents(ModelParams(3, 1, 1))
    assert e.s_c == 0
    assert e.four_star is INF and e.two_star is INF
    assert classify_regime(e) is Regime.MASS_CRITICAL


def test_exponents_with_p():
    e = derive_exponents(ModelParams(3, 2, 1, p=2))
    assert e.s_c == Fraction(3, 4)
    assert e.s_p == 0
    assert e.sigma_c == 4


def test_sigma_c_embedding_form():
    for N, sig, b in [(3, 2, 1), (5, 1, 1), (4, Fraction(3, 2), Fraction(1, 2))]:
        e = derive_exponents(ModelParams(N, sig, b))
        assert 0 < e.s_c < 2
        assert e.sigma_c == Fraction(2 * N) / (N - 2 * e.s_c)


def test_b_at_least_four_is_domain_error():
    with pytest.raises(DomainError):
        derive_exponents(ModelParams(3, 1, 4))


@pytest.mark.parametrize("kw", [dict(N=0, sigma=1, b=1), dict(N=3, sigma=0, b=1),
                                dict(N=3, sigma=1, b=0), dict(N=3, sigma=1, b=1, p=0.5)])
def test_model_params_invariants(kw):
    with pytest.raises(ValueError):
        ModelParams(**kw)


@pytest.mark.parametrize("params, regime", [
    ((5, 1, 1), Regime.INTERCRITICAL),
    ((3, 1, 1), Regime.MASS_CRITICAL),
    ((6, 1, 2), Regime.ENERGY_CRITICAL),
    ((3, "1/2", 1), Regime.MASS_SUBCRITICAL),
    ((8, 2, 1), Regime.ENERGY_SUPERCRITICAL),
])
def test_classify(params, regime):
    assert classify_regime(derive_exponents(ModelParams(*params))) is regime


def test_float_inputs_classified_with_tolerance():
    # 1/3 as a float is not exactly representable; mass-critical still found
    e = derive_exponents(ModelParams(3, 1.0, 1.0))
    assert classify_regime(e) is Regime.MASS_CRITICAL
    e = derive_exponents(ModelParams(6, 1.0, 2.0 + 1e-14))
    assert classify_regime(e) is Regime.ENERGY_CRITICAL


def test_s_c_monotone_in_sigma_and_b():
    base = derive_exponents(ModelParams(5, 1, 1)).s_c
    assert derive_exponents(ModelParams(5, Fraction(11, 10), 1)).s_c > base
    assert derive_exponents(ModelParams(5, 1, Fraction(11, 10))).s_c > base


def test_gn_powers_sum():
    P = ModelParams(3, 2, 1, p=3)
    a, c = gn_powers(P)
    assert a + c == 2 * P.sigma + 2


def test_lwp_examples():
    assert validate_hypotheses(ModelParams(5, 1, 1), "LWP").all_satisfied
    rep = validate_hypotheses(ModelParams(5, "0.55", 1), "LWP")
    assert not rep.all_satisfied
    failed = [c.text for c in rep.checks if not c.satisfied]
    assert failed == ["sigma > max((4-b)/N, 1/2)"]


def test_gnu_example():
    rep = validate_hypotheses(ModelParams(3, 1, 1, p=2), "GNU")
    assert rep.all_satisfied
    rep = validate_hypotheses(ModelParams(3, 1, 1, p=6), "GNU")  # p = 12/2 is excluded
    assert not rep.all_satisfied
    assert [c.status for c in rep.boundary_hits] == ["boundary"]


def test_gnu_without_p_fails_cleanly():
    rep = validate_hypotheses(ModelParams(3, 1, 1), "GNU")
    assert not rep.all_satisfied
    assert any("is given" in c.text for c in rep.checks)


def test_global_window():
    assert validate_hypotheses(ModelParams(3, 2, 1), "Global").all_satisfied
    # σ = (4-b)/N exactly: endpoint reported as boundary, not satisfied
    rep = validate_hypotheses(ModelParams(3, 1, 1), "Global")
    assert not rep.all_satisfied
    assert len(rep.boundary_hits) == 1


def test_sigma_at_four_star_is_boundary():
    rep = validate_hypotheses(ModelParams(5, 3, 1), "LWP")
    hits = rep.boundary_hits
    assert [c.text for c in hits] == ["sigma < 4*"]
    assert not rep.all_satisfied


def test_crossing_endpoint_flips_one_check():
    lo = validate_hypotheses(ModelParams(5, "0.59", 1), "LWP")
    hi = validate_hypotheses(ModelParams(5, "0.61", 1), "LWP")
    flips = [a.text for a, b in zip(lo.checks, hi.checks) if a.satisfied != b.satisfied]
    assert len(flips) == 1


def test_all_theorems_known_and_unknown_rejected():
    P = ModelParams(5, 1, 1, p=2)
    for th in THEOREMS:
        rep = validate_hypotheses(P, th)
        assert rep.all_satisfied == all(c.satisfied for c in rep.checks)
        assert rep.as_dict()["theorem"] == th
    with pytest.raises(ValueError):
        validate_hypotheses(P, "NoSuchTheorem")


def test_theorem_a_window_differs_from_lwp():
    # σ = 0.55 is outside the LWP window but inside Theorem A's
    P = ModelParams(5, "0.55", 1)
    assert validate_hypotheses(P, "TheoremA").all_satisfied
    assert not validate_hypotheses(P, "LWP").all_satisfied


def test_admissible_pairs():
    assert check_admissible_pair(INF, 2, 0, 5) is Admissibility.B_ADMISSIBLE
    assert check_admissible_pair(float("inf"), 2, 0, 5) is Admissibility.B_ADMISSIBLE
    assert check_admissible_pair(14, Fraction(70, 31), 0, 5) is Admissibility.B_ADMISSIBLE
    assert check_admissible_pair(2, 2, 0, 5) is Admissibility.NEITHER


def test_hs_admissible_pair():
    # 4/q = N/2 - N/r - s with N=5, s=1, r=5 -> 4/q = 1/2
    assert check_admissible_pair(8, 5, 1, 5) is Admissibility.HS_ADMISSIBLE
    # r = 3 sits on the lower end 2N/(N-2s), which is included
    assert check_admissible_pair(INF, 3, Fraction(5, 6), 5) is Admissibility.HS_ADMISSIBLE
    # r = 2N/(N-4) = 10 is excluded even though the scaling relation holds (q = 4)
    assert check_admissible_pair(4, 10, 1, 5) is Admissibility.NEITHER


def test_exact_vs_float_agree():
    a = derive_exponents(ModelParams(5, Fraction(7, 5), Fraction(1, 3)))
    b = derive_exponents(ModelParams(5, 1.4, 1 / 3))
    assert float(a.s_c) == pytest.approx(b.s_c, abs=1e-14)
    assert float(a.sigma_c) == pytest.approx(b.sigma_c, abs=1e-14)
