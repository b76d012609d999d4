"""Implementations of the ibnls subcommands."""
from __future__ import annotations

import csv
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..discretization import CartesianGrid, Field, RadialGrid, save
from ..errors import ConfigError, NumericalFailure
from ..evolution import EvolutionConfig, evolve
from ..groundstate import (
    GroundStateProblem, SolverOptions, default_test_family, gn_ratio, gn_verify,
    hsc_ground_state, solve,
)
from ..params import ModelParams, as_float, derive_exponents, validate_hypotheses
from .. import thresholds as th
from . import svg
from .artifacts import SCHEMA_VERSION, dumps, write_json, write_manifest

log = logging.getLogger("ibnls")


# ---------------------------------------------------------------------------
# building blocks from a resolved config


def model_params(cfg) -> ModelParams:
    m = cfg["model"]
    try:
        return ModelParams(m["N"], m["sigma"], m["b"], m["p"])
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(f"invalid model parameters: {exc}") from None


def build_grid(cfg, N: int):
    g = cfg["grid"]
    if g["kind"] == "radial":
        return RadialGrid.from_extent(N, g["sizes"], g["extent"], scheme=g["scheme"],
                                      singular=g["singular"])
    if g["scheme"] != "auto":
        raise ConfigError("grid.scheme applies to radial grids only")
    return CartesianGrid(N, g["sizes"], g["extent"])


def solver_options(cfg, seed=None) -> SolverOptions:
    s = cfg["solver"]
    return SolverOptions(max_iter=s["max_iter"], tol=s["tol"], grad_tol=s["grad_tol"],
                         n_seeds=s["seeds"], rng_seed=s["seed"] if seed is None else seed,
                         seed_profile=s["seed_profile"], seed_width=s["seed_width"],
                         petviashvili_tol=s["petviashvili_tol"])


def evolution_config(cfg) -> EvolutionConfig:
    e = cfg["evolution"]
    return EvolutionConfig(dt0=e["dt0"], T=e["T"], scheme=e["scheme"], dt_min=e["dt_min"],
                           blowup_factor=e["blowup_factor"], lambda_c=e["lambda_c"],
                           lambda_theta=e["lambda_theta"], record_every=e["record_every"],
                           adaptive=e["adaptive"],
                           snapshot_times=tuple(cfg["output"]["snapshot_times"]))


def variant_params(params, variant):
    """Parameters with the p implied by the ground-state variant."""
    if variant == "p_equals_2":
        return params.with_p(2)
    if variant == "p_equals_sigma_c":
        return params.with_p(derive_exponents(params).sigma_c)
    return params


def print_hypotheses(params, theorems, stream=None):
    stream = stream or sys.stderr
    reps = {}
    for t in theorems:
        rep = validate_hypotheses(params, t)
        reps[t] = rep
        print(rep.format(), file=stream)
    return reps


def ground_state(params, grid, variant, cfg, seed=None):
    prob = GroundStateProblem(params, grid, variant, solver_options(cfg, seed))
    if variant == "hsc_variant":
        return hsc_ground_state(prob)
    return solve(prob, cfg["solver"]["method"])


def _wants(cfg, fmt):
    return fmt in cfg["output"]["formats"]


def _profile_svg(V: Field, title):
    r = V.grid.radius.ravel()
    v = np.real(V.values).ravel()
    order = np.argsort(r, kind="stable")
    return svg.line_chart([("V", r[order], v[order])], title=title, xlabel="|x|", ylabel="V")


# ---------------------------------------------------------------------------
# commands


def cmd_groundstate(cfg, out: Path, seed=None):
    params = model_params(cfg)
    variant = cfg["model"]["variant"]
    theorem = "GNUsc" if variant == "hsc_variant" else "GNU"
    print_hypotheses(variant_params(params, variant), [theorem])
    grid = build_grid(cfg, params.N)
    sol = ground_state(params, grid, variant, cfg, seed)
    summary = {"schema_version": SCHEMA_VERSION, **sol.summary()}
    write_json(out / "summary.json", summary)
    if _wants(cfg, "fld"):
        save(sol.V, out / "groundstate.fld")
    if _wants(cfg, "svg"):
        (out / "profile.svg").write_text(_profile_svg(sol.V, f"ground state ({variant})"))
    write_manifest(out, "groundstate", cfg, [grid, sol.V.grid])
    print(f"J = {sol.J_value!r}  K_opt = {sol.K_opt!r}  residual = {sol.residual:.3e}")
    return 0


def cmd_gn_verify(cfg, out: Path, seed=None):
    params = model_params(cfg)
    variant = cfg["model"]["variant"]
    theorem = "GNUsc" if variant == "hsc_variant" else "GNU"
    print_hypotheses(variant_params(params, variant), [theorem])
    grid = build_grid(cfg, params.N)
    sol = ground_state(params, grid, variant, cfg, seed)
    prob = GroundStateProblem(params, grid, variant, solver_options(cfg, seed))
    gn = cfg["gn"]
    rng = np.random.default_rng(prob.options.rng_seed) if gn["perturbations"] else None
    family = default_test_family(sol.V, gn["n_widths"], rng)
    rep = gn_verify(sol, family, prob, gn["tol"])
    if _wants(cfg, "csv"):
        with open(out / "gn_ratios.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("index", "ratio"))
            for i, r in enumerate(rep.ratios):
                w.writerow((i, repr(float(r))))
    summary = {"schema_version": SCHEMA_VERSION, "K_opt": sol.K_opt, "J_value": sol.J_value,
               "variant": variant, **rep.as_dict(),
               "scale_check": [gn_ratio(sol.V * c, sol.K_opt, prob) for c in (0.1, 10.0)]}
    write_json(out / "gn_summary.json", summary)
    write_manifest(out, "gn-verify", cfg, [grid, sol.V.grid])
    print(f"max ratio = {rep.max_ratio!r} over {len(rep.ratios)} functions; "
          f"ratio at V = {rep.ratio_at_V!r}; {'PASS' if rep.passed else 'FAIL'}")
    return 0 if rep.passed else 1


def _initial_data(cfg, params, grid, seed):
    e = cfg["evolution"]
    if e["initial"] == "zero":
        return Field(grid, np.zeros(grid.shape)), None
    if e["initial"] == "gaussian":
        r = grid.radius
        return Field(grid, e["amplitude"] * np.exp(-(r / e["width"]) ** 2)), None
    variant = cfg["model"]["variant"]
    Q = ground_state(params, grid, variant, cfg, seed)
    u0 = Q.V * e["amplitude"]
    if u0.grid != grid:
        # the Weinstein path returns V on its own (relabeled) grid; sample it back
        u0 = Field(grid, grid_sample(u0, grid))
    return u0, Q


def grid_sample(u: Field, grid):
    if isinstance(grid, RadialGrid):
        return u.grid.interpolate(u.values, grid.r)
    raise ConfigError("ground states on a rescaled Cartesian grid cannot be resampled")


def _criteria(cfg, params, u0, Q, trace, grid, seed):
    sc = as_float(derive_exponents(params).s_c)
    wanted = set(cfg["evolution"]["criteria"])
    if "none" in wanted:
        return {}
    if "auto" in wanted:
        wanted.discard("auto")
        if Q is not None and Q.variant == "p_equals_2":
            if 0 < sc < 2:
                wanted.add("h2")
            elif abs(sc) < 1e-12:
                wanted.add("mass_critical")
    out = {}
    if "h2" in wanted or "mass_critical" in wanted:
        if Q is None or Q.variant != "p_equals_2":
            Q = ground_state(params, grid, "p_equals_2", cfg, seed)
    if "h2" in wanted:
        c1, c3 = th.global_criterion_h2(u0, Q, params)
        out["cond1"] = c1.as_dict()
        out["cond3"] = c3.as_dict()
        out["cond4_window"] = th.invariant_window(trace, Q, params)
    if "mass_critical" in wanted:
        out["mass_critical"] = th.mass_critical_criterion(u0, Q, params).as_dict()
    if "sigma_c" in wanted:
        V = ground_state(params, grid, "p_equals_sigma_c", cfg, seed)
        out["sigma_c"] = th.sigma_c_criterion(trace, V).as_dict()
    if "hsc" in wanted:
        W = ground_state(params, grid, "hsc_variant", cfg, seed)
        out["hsc"] = th.hsc_criterion(trace, W).as_dict()
    return out


def _timeseries_svgs(out: Path, rows, tag=""):
    t = [r["t"] for r in rows]
    h2 = [r["h2"] for r in rows]
    (out / "h2.svg").write_text(svg.line_chart([("||Δu||", t, h2)], title=f"H² norm {tag}".strip(),
                                               xlabel="t", ylabel="||Δu||"))
    m0, e0 = rows[0]["mass"], rows[0]["energy"]

    def rel(v, v0):
        return abs(v - v0) / abs(v0) if v0 else abs(v - v0)
    series = [("mass", t, [rel(r["mass"], m0) for r in rows]),
              ("energy", t, [rel(r["energy"], e0) for r in rows])]
    (out / "conservation.svg").write_text(svg.line_chart(series, title="relative drift",
                                                         xlabel="t", ylabel="drift", logy=True))


def read_diagnostics(path):
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _write_trace(out: Path, cfg, trace):
    if _wants(cfg, "csv"):
        with open(out / "diagnostics.csv", "w", newline="") as fh:
            trace.to_csv(fh)
    if _wants(cfg, "fld") and trace.snapshots:
        (out / "snapshots").mkdir(exist_ok=True)
        for t, u in sorted(trace.snapshots.items()):
            save(u, out / "snapshots" / f"t_{t:.6g}.fld")
    if _wants(cfg, "svg") and trace.records:
        rows = [dict(zip(("t", "mass", "energy", "h2"), r.row()[:4])) for r in trace.records]
        _timeseries_svgs(out, rows)


def cmd_evolve(cfg, out: Path, seed=None):
    params = model_params(cfg)
    print_hypotheses(params, ["LWP", "Global"])
    grid = build_grid(cfg, params.N)
    ecfg = evolution_config(cfg)
    u0, Q = _initial_data(cfg, params, grid, seed)
    trace = evolve(u0, ecfg, params)
    _write_trace(out, cfg, trace)
    summary = {"schema_version": SCHEMA_VERSION, **trace.summary()}
    if trace.stop == "numerical_failure":
        if trace.last_good is not None:
            save(trace.last_good, out / "last_good.fld")
        write_json(out / "summary.json", summary)
        write_manifest(out, "evolve", cfg, [grid])
        saved = ("last good state saved to last_good.fld" if trace.last_good is not None
                 else "initial data not finite, nothing saved")
        raise NumericalFailure(f"non-finite values at t ~ {trace.records[-1].t!r}; {saved}")
    crit = _criteria(cfg, params, u0, Q, trace, grid, seed)
    write_json(out / "thresholds.json", {"schema_version": SCHEMA_VERSION, **crit})
    if "cond4_window" in crit:
        w = crit["cond4_window"]
        summary["cond4"] = ("cond4 holds at all records" if w["holds_at_every_record"]
                            else f"cond4 violated first at t = {w['first_violation']['t']!r}")
    write_json(out / "summary.json", summary)
    write_manifest(out, "evolve", cfg, [grid])
    print(f"stop = {trace.stop}; steps = {trace.steps}; records = {len(trace.records)}")
    if "cond4" in summary:
        print(summary["cond4"])
    return 0


def _amplitude_task(job):
    Q, c, params, ecfg, sub, formats = job
    sub = Path(sub)
    sub.mkdir(parents=True, exist_ok=True)
    res = th.run_amplitude(Q, c, params, ecfg)
    trace = res.pop("trace")
    cfg = {"output": {"formats": formats}}
    _write_trace(sub, cfg, trace)
    res["summary"] = trace.summary()
    res["directory"] = sub.name
    (sub / "summary.json").write_text(dumps(res))
    return res


def _amp_tag(c):
    return f"c_{c:.6g}"


def cmd_dichotomy(cfg, out: Path, seed=None, threads: int = 1):
    params = model_params(cfg)
    print_hypotheses(params, ["Global"])
    amps = []
    warnings = []
    for c in cfg["evolution"]["amplitudes"]:
        if c in amps:
            warnings.append(f"duplicate amplitude {c!r} ignored")
            log.warning("duplicate amplitude %r ignored", c)
        else:
            amps.append(c)
    if not amps:
        raise ConfigError("evolution.amplitudes is empty")
    grid = build_grid(cfg, params.N)
    Q = ground_state(params, grid, "p_equals_2", cfg, seed)
    if Q.V.grid != grid:
        Q.V = Field(grid, grid_sample(Q.V, grid))
    ecfg = replace(evolution_config(cfg), snapshot_times=())
    jobs = [(Q, c, params, ecfg, str(out / _amp_tag(c)), cfg["output"]["formats"]) for c in amps]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_amplitude_task, jobs))
    else:
        results = [_amplitude_task(j) for j in jobs]
    results.sort(key=lambda r: r["amplitude"])
    failed = [r["amplitude"] for r in results if r["stop"] == "numerical_failure"]
    merged = {"schema_version": SCHEMA_VERSION, "amplitudes": amps, "warnings": warnings,
              "runs": results, "failed": failed}
    write_json(out / "dichotomy.json", merged)
    if _wants(cfg, "svg") and _wants(cfg, "csv"):
        series = []
        for r in results:
            rows = read_diagnostics(out / r["directory"] / "diagnostics.csv")
            h0 = rows[0]["h2"] or 1.0
            series.append((f"c={r['amplitude']:g}", [x["t"] for x in rows], [x["h2"] / h0 for x in rows]))
        (out / "dichotomy.svg").write_text(svg.line_chart(series, title="||Δu(t)|| / ||Δu0||",
                                                          xlabel="t", ylabel="ratio"))
    write_manifest(out, "dichotomy", cfg, [grid], {"threads": threads})
    for r in results:
        print(f"c = {r['amplitude']:g}: stop = {r['stop']}, cond3 = {r['cond3']['status']}, "
              f"cond4 at all records = {r['window']['holds_at_every_record']}")
    if failed:
        raise NumericalFailure(f"runs failed for amplitudes {failed}")
    return 0


def cmd_report(out: Path):
    """Summarize the JSON artifacts found under ``out`` as Markdown (report.md)."""
    import json

    if not out.is_dir():
        raise ConfigError(f"no artifact directory at {out}")
    lines = [f"# ibnls report: {out.name}", ""]
    man = out / "manifest.json"
    if man.is_file():
        m = json.loads(man.read_text())
        lines += [f"command: {m.get('command')}, code version {m.get('code_version')}", ""]
    for path in sorted(out.rglob("*.json")):
        if path.name == "manifest.json":
            continue
        data = json.loads(path.read_text())
        lines.append(f"## {path.relative_to(out)}")
        lines.append("")
        for k in sorted(data):
            v = data[k]
            if isinstance(v, (dict, list)):
                continue
            lines.append(f"- {k}: {v}")
        lines.append("")
    for path in sorted(out.rglob("diagnostics.csv")):
        rows = read_diagnostics(path)
        if rows:
            _timeseries_svgs(path.parent, rows, path.parent.name if path.parent != out else "")
    text = "\n".join(lines)
    (out / "report.md").write_text(text + "\n")
    print(text)
    return 0
