"""Global-existence criteria evaluated on data, ground states and trajectories."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .discretization import Field
from .discretization import functionals as fn
from .errors import DomainError
from .params import ModelParams, as_float, derive_exponents

BOUNDARY_RTOL = 1e-12
WINDOW_SLACK = 1e-3


@dataclass
class ThresholdReport:
    criterion: str
    lhs: float
    rhs: float
    satisfied: bool
    margin: float
    status: str = ""
    info: dict = field(default_factory=dict)

    def as_dict(self):
        out = {"criterion": self.criterion, "lhs": self.lhs, "rhs": self.rhs,
               "satisfied": self.satisfied, "margin": self.margin, "status": self.status}
        if self.info:
            out["info"] = dict(self.info)
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def strict_report(criterion: str, lhs: float, rhs: float, **info) -> ThresholdReport:
    """lhs < rhs, with near-equality reported as a boundary hit (not satisfied)."""
    lhs, rhs = float(lhs), float(rhs)
    margin = (rhs - lhs) / rhs if rhs != 0 else -math.inf
    if abs(lhs - rhs) <= BOUNDARY_RTOL * max(abs(lhs), abs(rhs)):
        status, ok = "boundary", False
    elif lhs < rhs:
        status, ok = "satisfied", True
    else:
        status, ok = "violated", False
    return ThresholdReport(criterion, lhs, rhs, ok, margin, status, info)


def _inapplicable(criterion, reason, **info):
    return ThresholdReport(criterion, math.nan, math.nan, False, math.nan, "inapplicable",
                           {"reason": reason, **info})


def _intercritical_sc(params: ModelParams) -> float:
    sc = as_float(derive_exponents(params).s_c)
    if not 0 < sc < 2:
        raise DomainError(f"criterion needs 0 < s_c < 2 (got s_c = {sc})")
    return sc


def _require_variant(sol, variant):
    if sol.variant != variant:
        raise ValueError(f"expected a {variant} ground state, got {sol.variant}")


def global_criterion_h2(u0: Field, Q, params: ModelParams):
    """(cond1, cond3) reports for H² global existence below the ground state Q."""
    _require_variant(Q, "p_equals_2")
    sc = _intercritical_sc(params)
    MQ = fn.mass(Q.V)
    EQ = fn.energy(Q.V, params)
    EQ_identity = sc / (2 * (2 - sc)) * MQ
    gap = abs(EQ - EQ_identity) / max(abs(EQ), abs(EQ_identity))
    id_info = {"E_Q": EQ, "E_Q_identity": EQ_identity, "identity_gap": gap,
               "identity_flag": gap > 1e-3}

    E0, M0 = fn.energy(u0, params), fn.mass(u0)
    if E0 <= 0:
        cond1 = _inapplicable("cond1", "criterion inapplicable, energy negative" if E0 < 0
                              else "criterion inapplicable, energy zero", E0=E0, **id_info)
    else:
        cond1 = strict_report("cond1", E0 ** sc * M0 ** (2 - sc), EQ ** sc * MQ ** (2 - sc),
                              **id_info)

    def cond3_side(u):
        return fn.hdot_norm(u, 2) ** sc * math.sqrt(fn.mass(u)) ** (2 - sc)

    cond3 = strict_report("cond3", cond3_side(u0), cond3_side(Q.V))
    return cond1, cond3


def mass_critical_criterion(u0: Field, Q, params: ModelParams = None) -> ThresholdReport:
    """||u0||₂ < ||Q||₂ in the mass-critical case, with the K_opt = (σ+1)||Q||^{-2σ} check."""
    params = params if params is not None else Q.params
    if params is None:
        raise ValueError("model parameters unknown")
    sc = as_float(derive_exponents(params).s_c)
    if abs(sc) > 1e-12:
        raise DomainError(f"mass-critical criterion needs s_c = 0 (got {sc})")
    qn = fn.lp_norm(Q.V, 2)
    kopt = (float(params.sigma) + 1) * qn ** (-2 * float(params.sigma))
    rep = strict_report("mass_critical", fn.lp_norm(u0, 2), qn)
    rep.info.update({"K_opt": Q.K_opt, "K_opt_mass_form": kopt,
                     "K_opt_gap": abs(kopt - Q.K_opt) / abs(kopt)})
    return rep


def _trace_max(trace, name):
    if not trace.records:
        raise ValueError("empty trace")
    v = trace.column(name)
    return float(np.max(v))


def sigma_c_criterion(trace, V) -> ThresholdReport:
    """sup_t ||u(t)||_{σ_c} < ||V||_{σ_c}."""
    _require_variant(V, "p_equals_sigma_c")
    sgc = as_float(derive_exponents(V.params).sigma_c)
    return strict_report("sigma_c", _trace_max(trace, "lsigmac"), fn.lp_norm(V.V, sgc))


def hsc_criterion(trace, W) -> ThresholdReport:
    """sup_t ||u(t)||_{Ḣ^{s_c}} < ||W||_{Ḣ^{s_c}}."""
    _require_variant(W, "hsc_variant")
    sc = as_float(derive_exponents(W.params).s_c)
    return strict_report("hsc", _trace_max(trace, "hdotsc"), fn.hdot_norm(W.V, sc))


def invariant_window(trace, Q, params: ModelParams, slack: float = WINDOW_SLACK) -> dict:
    """Check ||Δu||^{s_c}||u||^{2−s_c} < ||ΔQ||^{s_c}||Q||^{2−s_c}(1+slack) at every record."""
    sc = _intercritical_sc(params)
    bound = fn.hdot_norm(Q.V, 2) ** sc * fn.lp_norm(Q.V, 2) ** (2 - sc)
    first = None
    worst = 0.0
    for i, r in enumerate(trace.records):
        val = r.hdot2 ** sc * math.sqrt(r.mass) ** (2 - sc)
        ratio = val / bound
        worst = max(worst, ratio)
        if first is None and not ratio < 1 + slack:
            first = {"index": i, "t": r.t, "ratio": ratio}
    out = {"holds_at_every_record": first is None, "first_violation": first,
           "max_ratio": worst, "bound": bound, "slack": slack, "n_records": len(trace.records)}
    if trace.records:
        r0 = trace.records[0]
        MQ = fn.mass(Q.V)
        EQ = fn.energy(Q.V, params)
        c1 = r0.energy > 0 and r0.energy ** sc * r0.mass ** (2 - sc) < EQ ** sc * MQ ** (2 - sc)
        c3 = r0.hdot2 ** sc * math.sqrt(r0.mass) ** (2 - sc) < bound
        out["initial_data_below_threshold"] = bool(c1 and c3)
    return out


def run_amplitude(Q, c: float, params: ModelParams, config) -> dict:
    """Evolve u0 = c·Q and evaluate the H² criteria on data and trajectory."""
    from .evolution import evolve

    u0 = Q.V * c
    cond1, cond3 = global_criterion_h2(u0, Q, params)
    trace = evolve(u0, config, params)
    win = invariant_window(trace, Q, params)
    return {"amplitude": c, "cond1": cond1.as_dict(), "cond3": cond3.as_dict(),
            "boundary": cond3.status == "boundary", "stop": trace.stop, "window": win,
            "trace": trace}
