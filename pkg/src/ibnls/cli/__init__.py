"""Command-line front end: ``ibnls {groundstate,gn-verify,evolve,dichotomy,report}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..errors import (
    ConfigError, ConsistencyError, DomainError, GridError, HypothesisError, NonConvergence,
    NumericalFailure,
)
from .artifacts import SCHEMA_VERSION, write_json
from .config import load_config

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_NUMERICAL = 0, 2, 3, 4

log = logging.getLogger("ibnls")


def build_parser():
    p = argparse.ArgumentParser(prog="ibnls", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in [("groundstate", "solve for a ground state"),
                        ("gn-verify", "sweep the sharp Gagliardo-Nirenberg inequality"),
                        ("evolve", "integrate the time-dependent equation"),
                        ("dichotomy", "evolve c*Q for a list of amplitudes c")]:
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, type=Path,
                       help="INI configuration, or a manifest.json from an earlier run")
        s.add_argument("--out", type=Path, help="artifact directory (default: output.directory)")
        s.add_argument("--seed", type=int, help="overrides solver.seed")
        s.add_argument("--threads", type=int, default=1,
                       help="worker processes for sweeps (1 keeps runs reproducible)")
    s = sub.add_parser("report", help="summarize an artifact directory")
    s.add_argument("--out", type=Path, required=True)
    return p


def _error_exit(exc, code, out):
    err = {"schema_version": SCHEMA_VERSION, "error": type(exc).__name__, "message": str(exc),
           "exit_code": code}
    if isinstance(exc, HypothesisError):
        err["theorem"] = exc.report.theorem
        err["failed"] = [c.text for c in exc.report.checks if not c.satisfied]
    if isinstance(exc, NonConvergence):
        err["iterations"] = exc.iterations
    if out is not None and out.is_dir():
        write_json(out / "error.json", err)
    print(json.dumps(err, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    from . import commands

    out = None
    try:
        if args.command == "report":
            return commands.cmd_report(args.out)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["solver"]["seed"] = args.seed
        out = args.out if args.out is not None else Path(cfg["output"]["directory"])
        out.mkdir(parents=True, exist_ok=True)
        stale = out / "error.json"
        if stale.exists():
            stale.unlink()
        if args.command == "groundstate":
            return commands.cmd_groundstate(cfg, out)
        if args.command == "gn-verify":
            return commands.cmd_gn_verify(cfg, out)
        if args.command == "evolve":
            return commands.cmd_evolve(cfg, out)
        return commands.cmd_dichotomy(cfg, out, threads=args.threads)
    except (ConfigError, HypothesisError, DomainError, GridError) as exc:
        return _error_exit(exc, EXIT_CONFIG, out)
    except (NonConvergence, ConsistencyError) as exc:
        return _error_exit(exc, EXIT_SOLVER, out)
    except NumericalFailure as exc:
        return _error_exit(exc, EXIT_NUMERICAL, out)


if __name__ == "__main__":
    sys.exit(main())
