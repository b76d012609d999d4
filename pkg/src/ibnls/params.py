"""Model parameters, critical exponents and theorem hypothesis windows.

Every exponent is computed in exact rational arithmetic when the inputs are
rational (ints, ``Fraction`` or decimal strings such as ``"0.55"``).  Float
inputs are compared with a relative tolerance of 1e-12.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Optional, Union

from .errors import DomainError

FLOAT_TOL = 1e-12


class _Infinity:
    """Positive infinity as a first-class exponent value.

    Compares greater than every finite real, equals ``math.inf`` and converts
    to it with ``float()``.
    """

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __float__(self):
        return math.inf

    def __hash__(self):
        return hash(math.inf)

    def __eq__(self, other):
        return other is self or (isinstance(other, float) and other == math.inf)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return self.__eq__(other)

    def __gt__(self, other):
        return not self.__eq__(other)

    def __ge__(self, other):
        return True

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()

Scalar = Union[Fraction, float]
Extended = Union[Fraction, float, _Infinity]


def to_scalar(x) -> Scalar:
    """Coerce user input to ``Fraction`` (exact) or ``float``."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if s.lower() in ("inf", "+inf", "infinity"):
            raise ValueError("infinite value not allowed here")
        return Fraction(s)
    if isinstance(x, Real):
        return float(x)
    raise TypeError(f"cannot interpret {x!r} as a number")


def is_exact(*xs) -> bool:
    return all(
        isinstance(x, (int, Fraction, _Infinity)) and not isinstance(x, bool) for x in xs
    )


def compare(x: Extended, y: Extended, tol: float = FLOAT_TOL) -> int:
    """Three-way comparison: exact for rationals, tolerant for floats."""
    xinf, yinf = x == INF, y == INF
    if xinf or yinf:
        return int(xinf) - int(yinf)
    if is_exact(x, y):
        return (x > y) - (x < y)
    fx, fy = float(x), float(y)
    if abs(fx - fy) <= tol * max(1.0, abs(fx), abs(fy)):
        return 0
    return 1 if fx > fy else -1


def as_float(x) -> float:
    return math.inf if x == INF else float(x)


@dataclass(frozen=True)
class ModelParams:
    N: int
    sigma: Scalar
    b: Scalar
    p: Optional[Scalar] = None

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N:
            raise ValueError("N must be a positive integer")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "sigma", to_scalar(self.sigma))
        object.__setattr__(self, "b", to_scalar(self.b))
        if self.p is not None:
            object.__setattr__(self, "p", to_scalar(self.p))
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if not self.b > 0:
            raise ValueError("b must be > 0")
        if self.p is not None and not self.p >= 1:
            raise ValueError("p must be >= 1")

    @property
    def exact(self) -> bool:
        return is_exact(self.sigma, self.b) and (self.p is None or is_exact(self.p))

    def with_p(self, p) -> "ModelParams":
        return ModelParams(self.N, self.sigma, self.b, p)

    def as_dict(self):
        out = {"N": self.N, "sigma": _fmt(self.sigma), "b": _fmt(self.b)}
        if self.p is not None:
            out["p"] = _fmt(self.p)
        return out


def _fmt(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if x == INF:
        return "inf"
    return float(x)


@dataclass(frozen=True)
class CriticalExponents:
    s_c: Scalar
    sigma_c: Scalar
    s_p: Optional[Scalar]
    four_star: Extended
    two_star: Extended
    N: int = field(default=0, compare=False)

    def as_dict(self):
        return {
            "s_c": _fmt(self.s_c),
            "sigma_c": _fmt(self.sigma_c),
            "s_p": None if self.s_p is None else _fmt(self.s_p),
            "four_star": _fmt(self.four_star),
            "two_star": _fmt(self.two_star),
        }


class Regime(enum.Enum):
    MASS_SUBCRITICAL = "mass-subcritical"
    MASS_CRITICAL = "mass-critical"
    INTERCRITICAL = "intercritical"
    ENERGY_CRITICAL = "energy-critical"
    ENERGY_SUPERCRITICAL = "energy-supercritical"


def derive_exponents(params: ModelParams) -> CriticalExponents:
    N, sig, b = params.N, params.sigma, params.b
    if compare(b, 4) >= 0:
        raise DomainError("b >= 4: sigma_c = 2N sigma/(4-b) is undefined")
    half_n = Fraction(N, 2)
    s_c = half_n - (4 - b) / (2 * sig)
    sigma_c = 2 * N * sig / (4 - b)
    s_p = None if params.p is None else half_n - N / params.p
    if N >= 5:
        four_star = (4 - b) / (N - 4)
        two_star: Extended = Fraction(2 * N, N - 4)
    else:
        four_star = INF
        two_star = INF
    return CriticalExponents(s_c, sigma_c, s_p, four_star, two_star, N=N)


def classify_regime(exponents: CriticalExponents) -> Regime:
    s = exponents.s_c
    c0 = compare(s, 0)
    if c0 < 0:
        return Regime.MASS_SUBCRITICAL
    if c0 == 0:
        return Regime.MASS_CRITICAL
    c2 = compare(s, 2)
    if c2 < 0:
        return Regime.INTERCRITICAL
    if c2 == 0:
        return Regime.ENERGY_CRITICAL
    return Regime.ENERGY_SUPERCRITICAL


def gn_powers(params: ModelParams, exps: Optional[CriticalExponents] = None):
    """Powers (a, c) of ||Δu|| and ||u||_p in the Gagliardo-Nirenberg bound.

    a + c = 2σ + 2, which makes the Weinstein quotient scale invariant.
    """
    exps = exps or derive_exponents(params)
    if exps.s_p is None:
        raise ValueError("p is required")
    sig, sc, sp = params.sigma, exps.s_c, exps.s_p
    a = (2 * sig * (sc - sp) + 2 * (2 - sp)) / (2 - sp)
    c = 2 * sig * (2 - sc) / (2 - sp)
    return a, c


# ---------------------------------------------------------------------------
# hypothesis windows


@dataclass(frozen=True)
class Check:
    text: str
    satisfied: bool
    boundary: bool = False

    @property
    def status(self) -> str:
        if self.boundary:
            return "boundary"
        return "pass" if self.satisfied else "fail"


@dataclass(frozen=True)
class HypothesisReport:
    theorem: str
    checks: tuple

    @property
    def all_satisfied(self) -> bool:
        return all(c.satisfied for c in self.checks)

    @property
    def boundary_hits(self):
        return [c for c in self.checks if c.boundary]

    def as_dict(self):
        return {
            "theorem": self.theorem,
            "all_satisfied": self.all_satisfied,
            "checks": [{"condition": c.text, "status": c.status} for c in self.checks],
        }

    def format(self) -> str:
        lines = [f"{self.theorem}: {'OK' if self.all_satisfied else 'NOT SATISFIED'}"]
        lines += [f"  [{c.status:>8}] {c.text}" for c in self.checks]
        return "\n".join(lines)


def _lt(x, y, text) -> Check:
    """Strict inequality x < y; equality is a boundary hit, never a pass."""
    c = compare(x, y)
    return Check(text, c < 0, boundary=(c == 0))


def _le(x, y, text) -> Check:
    return Check(text, compare(x, y) <= 0)


def _max(*xs):
    best = xs[0]
    for x in xs[1:]:
        if compare(x, best) > 0:
            best = x
    return best


def _min(*xs):
    best = xs[0]
    for x in xs[1:]:
        if compare(x, best) < 0:
            best = x
    return best


def _b_window(P, upper, label):
    return [_lt(0, P.b, "b > 0"), _lt(P.b, upper, f"b < {label}")]


def _gnu_checks(P: ModelParams, E: CriticalExponents, p, ptext="p"):
    N, b, sig = P.N, P.b, P.sigma
    checks = [Check("N >= 1", N >= 1)]
    checks += _b_window(P, _min(Fraction(N), Fraction(4)), "min(N, 4)")
    checks += [_lt(0, sig, "sigma > 0"), _lt(sig, E.four_star, "sigma < 4*")]
    if p is None:
        checks.append(Check(f"{ptext} is given", False))
        return checks
    checks.append(_le(2, p, f"{ptext} >= 2"))
    if compare(b, N) < 0:
        pmax = (2 * sig + 2) * N / (N - b)
        checks.append(_lt(p, pmax, f"{ptext} < (2 sigma + 2) N / (N - b)"))
    else:
        checks.append(Check(f"{ptext} < (2 sigma + 2) N / (N - b) (needs b < N)", False))
    return checks


def _subcritical_window(P, E):
    """Shared window of the Hsc-Ḣ² global and concentration results (N >= 5)."""
    N, b, sig = P.N, P.b, P.sigma
    checks = [Check("N >= 5", N >= 5)]
    checks.append(_lt(_max((4 - b) / N, Fraction(1, 2)), sig, "sigma > max((4-b)/N, 1/2)"))
    if N >= 5:
        checks.append(_lt(sig, (4 - b) / (N - 4), "sigma < (4-b)/(N-4)"))
    else:
        checks.append(Check("sigma < (4-b)/(N-4) (requires N >= 5)", False))
    checks += _b_window(P, _min(Fraction(N, 2), Fraction(4)), "min(N/2, 4)")
    return checks


def _checks_for(theorem, P: ModelParams, E: CriticalExponents):
    N, b, sig = P.N, P.b, P.sigma
    half_or_4 = _min(Fraction(N, 2), Fraction(4))
    if theorem == "LWP":
        return [
            Check("N >= 5", N >= 5),
            *_b_window(P, half_or_4, "min(N/2, 4)"),
            _lt(_max((4 - b) / N, Fraction(1, 2)), sig, "sigma > max((4-b)/N, 1/2)"),
            _lt(sig, E.four_star, "sigma < 4*"),
        ]
    if theorem == "TheoremA":
        return [
            Check("N >= 3", N >= 3),
            *_b_window(P, half_or_4, "min(N/2, 4)"),
            _lt(_max(Fraction(0), (1 - b) / N), sig, "sigma > max(0, (1-b)/N)"),
            _lt(sig, E.four_star, "sigma < 4*"),
        ]
    if theorem == "GNU":
        return _gnu_checks(P, E, P.p)
    if theorem == "CorollaryGN_i":
        return _gnu_checks(P, E, Fraction(2), "p = 2")
    if theorem == "CorollaryGN_ii":
        return _gnu_checks(P, E, E.sigma_c, "p = sigma_c")
    if theorem == "Global":
        return [
            Check("N >= 3", N >= 3),
            _lt((4 - b) / N, sig, "sigma > (4-b)/N"),
            _lt(sig, E.four_star, "sigma < 4*"),
            *_b_window(P, half_or_4, "min(N/2, 4)"),
        ]
    if theorem in ("GWPC", "Concentration", "Global2", "ConcentrationSc"):
        return _subcritical_window(P, E)
    if theorem == "GNUsc":
        return [
            Check("N >= 1", N >= 1),
            *_b_window(P, Fraction(4), "4"),
            _lt((4 - b) / N, sig, "sigma > (4-b)/N"),
            _lt(sig, E.four_star, "sigma < 4*"),
        ]
    raise ValueError(f"unknown theorem identifier {theorem!r}; expected one of {THEOREMS}")


THEOREMS = (
    "LWP", "TheoremA", "GNU", "CorollaryGN_i", "CorollaryGN_ii", "Global",
    "GWPC", "Concentration", "GNUsc", "Global2", "ConcentrationSc",
)


def validate_hypotheses(params: ModelParams, theorem: str) -> HypothesisReport:
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem identifier {theorem!r}; expected one of {THEOREMS}")
    if compare(params.b, 4) >= 0:
        # σ_c and s_c still make sense for the checks below only if b < 4
        return HypothesisReport(theorem, (Check("b < 4 (exponents defined)", False),))
    exps = derive_exponents(params)
    return HypothesisReport(theorem, tuple(_checks_for(theorem, params, exps)))


# ---------------------------------------------------------------------------
# admissible pairs


class Admissibility(enum.Enum):
    B_ADMISSIBLE = "B-admissible"
    HS_ADMISSIBLE = "Hs-admissible"
    NEITHER = "neither"


def _inv(q):
    if q == INF or (isinstance(q, float) and math.isinf(q)):
        return Fraction(0)
    return 1 / to_scalar(q)


def check_admissible_pair(q, r, s, N: int) -> Admissibility:
    r = to_scalar(r)
    s = to_scalar(s)
    if not (q == INF or (isinstance(q, float) and math.isinf(q))) and compare(to_scalar(q), 1) < 0:
        return Admissibility.NEITHER
    if compare(r, 1) < 0:
        return Admissibility.NEITHER
    lhs = 4 * _inv(q)
    rhs = Fraction(N, 2) - N / r - s
    if compare(lhs, rhs) != 0:
        return Admissibility.NEITHER
    upper: Extended = Fraction(2 * N, N - 4) if N >= 5 else INF
    if compare(s, 0) == 0:
        ok = compare(2, r) <= 0 and compare(r, upper) < 0
        return Admissibility.B_ADMISSIBLE if ok else Admissibility.NEITHER
    if compare(s, 2) >= 0:
        return Admissibility.NEITHER
    if N >= 5:
        lower = 2 * N / (N - 2 * s)
        ok = compare(lower, r) <= 0 and compare(r, upper) < 0
    else:
        ok = compare(2, r) <= 0
    return Admissibility.HS_ADMISSIBLE if ok else Admissibility.NEITHER
