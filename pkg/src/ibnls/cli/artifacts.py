"""Deterministic JSON/CSV writing and the per-directory manifest."""
from __future__ import annotations

import hashlib
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .. import __version__

SCHEMA_VERSION = 1


def clean(obj):
    """Make ``obj`` JSON-safe: numpy scalars -> Python, NaN -> null, ±inf -> strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "as_dict"):
        return clean(obj.as_dict())
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj), encoding="utf-8")


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir, command, config, grids=(), extra=None):
    """manifest.json: resolved config, version, grid checksums and artifact digests."""
    out_dir = Path(out_dir)
    files = sorted(p for p in out_dir.rglob("*") if p.is_file() and p.name != "manifest.json")
    man = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "code_version": __version__,
        "config": config,
        "grids": [{"describe": g.describe(), "checksum": g.checksum()} for g in grids],
        "artifacts": {str(p.relative_to(out_dir)): sha256_file(p) for p in files},
    }
    if extra:
        man.update(extra)
    write_json(out_dir / "manifest.json", man)
    return man
